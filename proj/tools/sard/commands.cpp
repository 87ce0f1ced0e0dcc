#include "commands.hpp"

#include "sard/archive.hpp"
#include "sard/error.hpp"
#include "sard/evaluation.hpp"
#include "sard/filters.hpp"
#include "sard/nn/checkpoint.hpp"
#include "sard/nn/inference.hpp"
#include "sard/nn/train.hpp"
#include "sard/rng.hpp"
#include "sard/sarg.hpp"
#include "sard/speckle.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace sard::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kRunConfig = "run_config.json";

std::size_t u(const json& cfg, const char* key) { return cfg.at(key).get<std::size_t>(); }
double f(const json& cfg, const char* key) { return cfg.at(key).get<double>(); }
std::string s(const json& cfg, const char* key) { return cfg.at(key).get<std::string>(); }

fs::path prepare_out(const json& cfg, const std::string& command) {
    const fs::path out = s(cfg, "out");
    if (out.empty()) throw InvalidArgument("--out must not be empty");
    fs::create_directories(out);
    const std::string text = json{{"command", command}, {"config", cfg}}.dump(2) + "\n";
    write_file_bytes(out / kRunConfig, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    return out;
}

std::string require_path(const json& cfg, const char* key) {
    std::string p = s(cfg, key);
    if (p.empty()) throw InvalidArgument(std::string("--") + key + " is required");
    return p;
}

void write_text(const fs::path& path, const std::string& text) {
    write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

NoiseModel parse_model(const std::string& name) {
    if (name == "gamma" || name == "gamma_intensity") return NoiseModel::GammaIntensity;
    if (name == "nakagami" || name == "nakagami_amplitude") return NoiseModel::NakagamiAmplitude;
    if (name == "gaussian" || name == "gaussian_additive") return NoiseModel::GaussianAdditive;
    throw InvalidArgument("unknown noise model '" + name + "' (gamma, nakagami, gaussian)");
}

std::optional<Rect> parse_region(const std::string& text) {
    if (text.empty()) return std::nullopt;
    std::vector<std::size_t> v;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        std::size_t used = 0;
        try {
            if (part.empty() || part.front() == '-') throw std::invalid_argument("negative");
            v.push_back(std::stoull(part, &used));
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != part.size()) throw InvalidArgument("--region expects x,y,w,h");
    }
    if (v.size() != 4 || v[2] == 0 || v[3] == 0) throw InvalidArgument("--region expects x,y,w,h with w, h > 0");
    return Rect{v[0], v[1], v[2], v[3]};
}

std::vector<std::string> parse_methods(const std::string& text) {
    if (text == "all") return baseline_names();
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        if (part.empty()) continue;
        if (std::find(baseline_names().begin(), baseline_names().end(), part) == baseline_names().end()) {
            throw InvalidArgument("unknown method '" + part + "'");
        }
        out.push_back(part);
    }
    return out;
}

nn::TileOptions tile_options(const json& cfg) {
    nn::TileOptions t;
    t.tile = u(cfg, "tile");
    t.overlap = u(cfg, "overlap");
    if (t.tile == 0 || t.overlap >= t.tile) throw InvalidArgument("--overlap must be smaller than --tile");
    return t;
}

std::vector<OptionSpec> tile_specs() {
    return {{"tile", 96u, "Inference tile size in pixels"}, {"overlap", 8u, "Overlap between tiles in pixels"}};
}

} // namespace

std::vector<OptionSpec> simulate_options() {
    return {{"model", "gamma", "Noise model: gamma, nakagami or gaussian"},
            {"looks", 4u, "Number of looks L"},
            {"size", 256u, "Field width and height"},
            {"channels", 1u, "Channels"},
            {"mean", 0.0, "Gaussian mean"},
            {"std", 0.1, "Gaussian standard deviation"},
            {"seed", 0u, "Random seed"},
            {"input", "", "Optional SARG image to corrupt instead of writing a bare field"},
            {"png", false, "Also write a PNG preview"},
            {"out", "simulate_out", "Output directory"}};
}

int run_simulate(const json& cfg) {
    SpeckleConfig noise;
    noise.model = parse_model(s(cfg, "model"));
    noise.looks = static_cast<std::uint32_t>(u(cfg, "looks"));
    noise.gauss_mean = f(cfg, "mean");
    noise.gauss_std = f(cfg, "std");
    noise.seed = u(cfg, "seed");
    noise.validate();
    const std::size_t size = u(cfg, "size"), channels = u(cfg, "channels");
    if (size == 0 || channels == 0) throw InvalidArgument("--size and --channels must be positive");
    const std::string input = s(cfg, "input");
    ImageGrid result;
    std::string name;
    if (!input.empty()) {
        const ImageGrid img = read_sarg(input);
        const fs::path out = prepare_out(cfg, "simulate");
        result = apply_noise(img, noise);
        name = "noisy";
        write_sarg(out / (name + ".sarg"), result);
        if (cfg.at("png").get<bool>()) write_png(out / (name + ".png"), result);
        std::cout << "wrote " << (out / (name + ".sarg")).string() << "\n";
        return 0;
    }
    const fs::path out = prepare_out(cfg, "simulate");
    switch (noise.model) {
    case NoiseModel::GammaIntensity:
        result = sample_gamma_speckle(size, size, channels, noise.looks, noise.seed);
        break;
    case NoiseModel::NakagamiAmplitude:
        result = sample_nakagami_speckle(size, size, channels, noise.looks, noise.seed);
        break;
    case NoiseModel::GaussianAdditive:
        result = sample_gaussian_noise(size, size, channels, noise.gauss_mean, noise.gauss_std, noise.seed);
        break;
    }
    name = "field";
    write_sarg(out / (name + ".sarg"), result);
    if (cfg.at("png").get<bool>()) write_png(out / (name + ".png"), result);
    std::cout << "wrote " << (out / (name + ".sarg")).string() << "\n";
    return 0;
}

std::vector<OptionSpec> build_dataset_options() {
    const SplitSpec split;
    return {{"synthetic", 0u, "Number of synthetic ground-truth images (0: read --stacks)"},
            {"stacks", "", "Directory of SARG time-series stacks"},
            {"size", 96u, "Synthetic image size"},
            {"frames", 0u, "Synthetic mode: temporal-average this many speckled looks into each truth"},
            {"edge_rich", false, "Synthetic mode: many shapes per image"},
            {"looks", 4u, "Looks of the speckle applied to every truth"},
            {"seed", 0u, "Random seed (noise, split, synthesis)"},
            {"clip_scope", "per_image", "Percentile clipping scope: per_image or global"},
            {"clip_percentile", 90.0, "Clipping percentile"},
            {"train", split.train, "Train fraction"},
            {"val", split.val, "Validation fraction"},
            {"test", split.test, "Test fraction"},
            {"out", "dataset", "Archive directory"}};
}

int run_build_dataset(const json& cfg) {
    SplitSpec split{f(cfg, "train"), f(cfg, "val"), f(cfg, "test"), u(cfg, "seed")};
    split.validate();
    ClipPolicy clip;
    const std::string scope = s(cfg, "clip_scope");
    if (scope == "per_image") {
        clip.scope = ClipPolicy::Scope::PerImage;
    } else if (scope == "global") {
        clip.scope = ClipPolicy::Scope::Global;
    } else {
        throw InvalidArgument("--clip-scope must be per_image or global");
    }
    clip.percentile = f(cfg, "clip_percentile");
    if (!(clip.percentile > 0.0 && clip.percentile <= 100.0)) throw InvalidArgument("--clip-percentile must be in (0, 100]");
    const auto looks = static_cast<std::uint32_t>(u(cfg, "looks"));
    if (looks == 0) throw InvalidArgument("--looks must be >= 1");
    const std::size_t count = u(cfg, "synthetic");
    const std::string stacks = s(cfg, "stacks");

    Archive archive;
    if (count > 0) {
        SyntheticDatasetOptions o;
        o.count = count;
        const std::size_t size = u(cfg, "size");
        if (size < 3) throw InvalidArgument("--size must be >= 3");
        o.field = cfg.at("edge_rich").get<bool>() ? SyntheticFieldOptions::edge_rich(size) : SyntheticFieldOptions{};
        o.field.width = o.field.height = size;
        o.frames = u(cfg, "frames");
        o.looks = looks;
        o.seed = u(cfg, "seed");
        o.split = split;
        o.clip = clip;
        archive = synthetic_archive(o);
    } else {
        if (stacks.empty()) throw InvalidArgument("either --synthetic N or --stacks DIR is required");
        if (!fs::is_directory(stacks)) throw InvalidArgument("--stacks " + stacks + " is not a directory");
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(stacks)) {
            if (e.is_regular_file() && e.path().extension() == ".sarg") files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        if (files.empty()) throw InvalidArgument("no .sarg stacks in " + stacks);
        std::vector<std::pair<std::string, ImageGrid>> truths;
        std::vector<std::string> failures;
        for (const auto& p : files) {
            try {
                TimeSeriesStack stack{read_sarg_frames(p), 0.0, 0.0};
                truths.emplace_back(p.stem().string(), temporal_average(stack));
            } catch (const Error& e) {
                failures.push_back(p.string() + ": " + e.what());
            }
        }
        if (!failures.empty()) {
            for (const auto& msg : failures) std::cerr << "bad stack " << msg << "\n";
            throw DataError(std::to_string(failures.size()) + " of " + std::to_string(files.size()) +
                            " stacks could not be used");
        }
        archive = assemble_archive(std::move(truths), looks, mix_seed(u(cfg, "seed"), 0x7900000), split, clip);
    }
    const fs::path out = prepare_out(cfg, "build-dataset");
    write_archive(archive, out);
    std::cout << "archive " << out.string() << ": " << archive.indices_in("train").size() << " train / "
              << archive.indices_in("val").size() << " val / " << archive.indices_in("test").size() << " test\n";
    return 0;
}

std::vector<OptionSpec> train_options() {
    const nn::TrainConfig d;
    return {{"archive", "", "Archive directory"},
            {"epochs", d.epochs, "Epochs"},
            {"batch", d.batch_size, "Batch size"},
            {"lr", d.lr0, "Initial learning rate"},
            {"decay", d.decay, "Learning-rate decay factor"},
            {"decay_step", d.decay_step, "Epochs between decays"},
            {"alpha", d.alpha, "MSE weight"},
            {"beta", d.beta, "SSIM weight"},
            {"gamma", d.gamma, "Total-variation weight"},
            {"looks", static_cast<std::size_t>(d.looks), "Looks of the fresh training speckle"},
            {"size", d.patch_size, "Training patch size"},
            {"width", d.layout.width, "Feature channels"},
            {"blocks", d.layout.blocks, "Conv-BN-ReLU blocks"},
            {"augment", d.augment, "Random rotations and flips"},
            {"seed", d.seed, "Random seed"},
            {"out", "train_out", "Output directory"}};
}

int run_train(const json& cfg) {
    nn::TrainConfig tc;
    tc.epochs = u(cfg, "epochs");
    tc.batch_size = u(cfg, "batch");
    tc.lr0 = f(cfg, "lr");
    tc.decay = f(cfg, "decay");
    tc.decay_step = u(cfg, "decay_step");
    tc.alpha = f(cfg, "alpha");
    tc.beta = f(cfg, "beta");
    tc.gamma = f(cfg, "gamma");
    tc.looks = static_cast<std::uint32_t>(u(cfg, "looks"));
    tc.patch_size = u(cfg, "size");
    tc.layout.width = u(cfg, "width");
    tc.layout.blocks = u(cfg, "blocks");
    tc.augment = cfg.at("augment").get<bool>();
    tc.seed = u(cfg, "seed");
    tc.validate();
    const Archive archive = read_archive(require_path(cfg, "archive"));
    if (!archive.entries.empty()) tc.layout.channels = archive.entries.front().pair.truth.channels();
    const fs::path out = prepare_out(cfg, "train");
    nn::TrainOptions opts;
    opts.checkpoint_dir = out;
    opts.on_epoch = [](const nn::EpochRecord& r) {
        std::printf("epoch %zu lr %.6g train_loss %.6f val_loss %.6f val_psnr %.4f val_ssim %.4f\n", r.epoch, r.lr,
                    r.train_loss, r.val_loss, r.val_psnr, r.val_ssim);
        std::fflush(stdout);
    };
    const nn::TrainResult result = nn::train(archive, tc, opts);
    nn::save_checkpoint(out / "model.sarc", result.model);
    nn::write_history_csv(out / "history.csv", result.history);
    std::cout << "model " << (out / "model.sarc").string() << " (" << result.model.network.parameter_count()
              << " trainable parameters)\n";
    return 0;
}

std::vector<OptionSpec> despeckle_options() {
    std::vector<OptionSpec> v{{"model", "", "Checkpoint (.sarc)"},
                              {"input", "", "SARG image to filter"},
                              {"region", "", "ENL rectangle x,y,w,h (default: most homogeneous 16x16 window)"},
                              {"png", false, "Also write PNG previews"},
                              {"out", "despeckle_out", "Output directory"}};
    for (auto& t : tile_specs()) v.push_back(t);
    return v;
}

int run_despeckle(const json& cfg) {
    const auto tiles = tile_options(cfg);
    const auto region_opt = parse_region(s(cfg, "region"));
    const nn::Model model = nn::load_checkpoint(require_path(cfg, "model"));
    const fs::path input_path = require_path(cfg, "input");
    const ImageGrid input = read_sarg(input_path);
    const fs::path out = prepare_out(cfg, "despeckle");
    const ImageGrid filtered = nn::despeckle(model, input, tiles);
    const std::string stem = input_path.stem().string();
    write_sarg(out / (stem + "_filtered.sarg"), filtered);
    if (cfg.at("png").get<bool>()) {
        write_png(out / (stem + ".png"), input);
        write_png(out / (stem + "_filtered.png"), filtered);
    }
    Rect region;
    if (region_opt) {
        region = *region_opt;
    } else {
        const auto plane = input.channel(0);
        const ImageGrid first(input.width(), input.height(), 1, std::vector<float>(plane.begin(), plane.end()));
        region = find_homogeneous_region(mean_filter(first, WindowSpec{7}));
    }
    const MetricsRow row = evaluate_without_truth(stem, input, filtered, region);
    std::ostringstream csv;
    csv << "id,region,enl_noisy,enl_filtered\n"
        << stem << ',' << region.x << ' ' << region.y << ' ' << region.width << ' ' << region.height << ','
        << std::fixed;
    csv.precision(4);
    csv << row.enl_noisy << ',' << row.enl_filtered << '\n';
    write_text(out / "enl.csv", csv.str());
    std::cout << "wrote " << (out / (stem + "_filtered.sarg")).string() << "; ENL " << row.enl_noisy << " -> "
              << row.enl_filtered << "\n";
    return 0;
}

std::vector<OptionSpec> evaluate_options() {
    std::vector<OptionSpec> v{{"model", "", "Checkpoint (.sarc)"},
                              {"archive", "", "Archive directory"},
                              {"split", "heldout", "train, val, test, heldout (val + test) or all"},
                              {"region", "", "ENL rectangle x,y,w,h (default: per-image most homogeneous window)"},
                              {"ssim_window", 0u, "SSIM window size (0: whole-image statistics)"},
                              {"out", "evaluate_out", "Output directory"}};
    for (auto& t : tile_specs()) v.push_back(t);
    return v;
}

int run_evaluate(const json& cfg) {
    EvalOptions opts;
    opts.tiles = tile_options(cfg);
    opts.region = parse_region(s(cfg, "region"));
    opts.ssim_window = u(cfg, "ssim_window");
    const nn::Model model = nn::load_checkpoint(require_path(cfg, "model"));
    if (!model.normalization) throw InvalidArgument("checkpoint has no normalization parameters");
    const Archive archive = read_archive(require_path(cfg, "archive"));
    const auto pairs = prepare_eval_pairs(archive, split_indices(archive, s(cfg, "split")), model.clip,
                                          *model.normalization);
    if (pairs.empty()) throw InvalidArgument("split '" + s(cfg, "split") + "' is empty");
    const fs::path out = prepare_out(cfg, "evaluate");
    const MetricsReport report = evaluate_model(model.network, pairs, opts);
    report.write_csv(out / "metrics.csv");
    const MetricsRow a = report.aggregate();
    std::printf("%zu images: PSNR %.4f -> %.4f dB, SSIM %.4f -> %.4f\n", report.rows.size(), a.psnr_noisy,
                a.psnr_filtered, a.ssim_noisy, a.ssim_filtered);
    return 0;
}

std::vector<OptionSpec> compare_options() {
    return {{"model", "", "Checkpoint (.sarc); omit to compare baselines only"},
            {"archive", "", "Archive directory"},
            {"methods", "all", "Comma-separated baselines: lee, lee_enhanced, kuan, frost, mean, median, bilateral"},
            {"split", "heldout", "train, val, test, heldout (val + test) or all"},
            {"region", "", "ENL rectangle x,y,w,h (default: per-image most homogeneous window)"},
            {"ssim_window", 0u, "SSIM window size (0: whole-image statistics)"},
            {"looks", 0u, "Looks assumed by the adaptive filters (0: from the archive)"},
            {"out", "compare_out", "Output directory"}};
}

int run_compare(const json& cfg) {
    EvalOptions opts;
    opts.region = parse_region(s(cfg, "region"));
    opts.ssim_window = u(cfg, "ssim_window");
    const auto methods = parse_methods(s(cfg, "methods"));
    std::optional<nn::Model> model;
    if (!s(cfg, "model").empty()) model = nn::load_checkpoint(s(cfg, "model"));
    const Archive archive = read_archive(require_path(cfg, "archive"));
    if (!archive.normalization) throw InvalidArgument("archive has no normalization parameters");
    const auto indices = split_indices(archive, s(cfg, "split"));
    if (indices.empty()) throw InvalidArgument("split '" + s(cfg, "split") + "' is empty");
    std::size_t looks = u(cfg, "looks");
    if (looks == 0) looks = archive.entries.at(indices.front()).pair.noise.looks;
    const ClipPolicy clip = model ? model->clip : archive.clip;
    const NormalizationParams norm =
        model && model->normalization ? *model->normalization : *archive.normalization;
    const auto pairs = prepare_eval_pairs(archive, indices, clip, norm);
    const fs::path out = prepare_out(cfg, "compare");
    const auto results =
        compare_methods(model ? &model->network : nullptr, methods, static_cast<double>(looks), pairs, opts);
    for (const auto& r : results) r.report.write_csv(out / ("metrics_" + r.method + ".csv"));
    const std::string csv = comparison_csv(results);
    write_text(out / "comparison.csv", csv);
    std::cout << csv;
    return 0;
}

} // namespace sard::cli
