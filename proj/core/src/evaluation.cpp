#include "sard/evaluation.hpp"

#include "sard/error.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

namespace sard {

std::vector<std::size_t> split_indices(const Archive& archive, const std::string& split) {
    if (split == "heldout") {
        auto idx = archive.indices_in("val");
        const auto test = archive.indices_in("test");
        idx.insert(idx.end(), test.begin(), test.end());
        std::sort(idx.begin(), idx.end());
        return idx;
    }
    if (split == "all") {
        std::vector<std::size_t> idx(archive.entries.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        return idx;
    }
    if (split != "train" && split != "val" && split != "test") throw InvalidArgument("unknown split: " + split);
    return archive.indices_in(split);
}

std::vector<EvalPair> prepare_eval_pairs(const Archive& archive, const std::vector<std::size_t>& indices) {
    if (!archive.normalization) throw InvalidArgument("archive has no normalization parameters");
    return prepare_eval_pairs(archive, indices, archive.clip, *archive.normalization);
}

std::vector<EvalPair> prepare_eval_pairs(const Archive& archive, const std::vector<std::size_t>& indices,
                                         const ClipPolicy& clip, const NormalizationParams& norm) {
    std::vector<EvalPair> out;
    for (std::size_t i : indices) {
        const ArchiveEntry& e = archive.entries.at(i);
        out.push_back({e.id, prepare_for_model(e.pair.truth, clip, ImageRole::Truth, norm),
                       prepare_for_model(e.pair.input, clip, ImageRole::Input, norm)});
    }
    return out;
}

MetricsReport evaluate_model(const nn::Network& net, const std::vector<EvalPair>& pairs, const EvalOptions& opts) {
    MetricsReport report;
    for (const auto& p : pairs) {
        const ImageGrid filtered = nn::predict(net, p.noisy, opts.tiles);
        report.rows.push_back(evaluate_pair(p.id, p.truth, p.noisy, filtered, opts.region, opts.ssim_window));
    }
    return report;
}

MethodResult evaluate_baseline(const std::string& method, double looks, const std::vector<EvalPair>& pairs,
                               const EvalOptions& opts) {
    std::optional<MethodResult> best;
    for (const auto& setting : baseline_sweep(method, looks)) {
        MethodResult r{method, setting.describe(), {}};
        for (const auto& p : pairs) {
            r.report.rows.push_back(
                evaluate_pair(p.id, p.truth, p.noisy, run_baseline(p.noisy, setting), opts.region, opts.ssim_window));
        }
        if (!best) {
            best = std::move(r);
            continue;
        }
        const MetricsRow a = r.report.aggregate(), b = best->report.aggregate();
        if (a.psnr_filtered > b.psnr_filtered || (a.psnr_filtered == b.psnr_filtered && a.ssim_filtered > b.ssim_filtered)) {
            best = std::move(r);
        }
    }
    return *best;
}

std::vector<MethodResult> compare_methods(const nn::Network* net, const std::vector<std::string>& methods,
                                          double looks, const std::vector<EvalPair>& pairs,
                                          const EvalOptions& opts) {
    if (pairs.empty()) throw InvalidArgument("compare: no images to evaluate");
    std::vector<MethodResult> results;
    if (net != nullptr) results.push_back({"model", "", evaluate_model(*net, pairs, opts)});
    for (const auto& m : methods) results.push_back(evaluate_baseline(m, looks, pairs, opts));
    std::stable_sort(results.begin(), results.end(), [](const MethodResult& a, const MethodResult& b) {
        return a.report.aggregate().psnr_filtered > b.report.aggregate().psnr_filtered;
    });
    return results;
}

std::string comparison_csv(const std::vector<MethodResult>& results) {
    std::ostringstream os;
    os << kCompareCsvHeader << '\n' << std::fixed << std::setprecision(4);
    for (std::size_t i = 0; i < results.size(); ++i) {
        const MetricsRow a = results[i].report.aggregate();
        os << i + 1 << ',' << results[i].method << ',' << results[i].setting << ',' << a.psnr_noisy << ','
           << a.psnr_filtered << ',' << a.ssim_noisy << ',' << a.ssim_filtered << ',' << a.enl_noisy << ','
           << a.enl_filtered << ',' << a.edge_median_absdiff << ',' << a.ks_statistic << '\n';
    }
    return os.str();
}

} // namespace sard
