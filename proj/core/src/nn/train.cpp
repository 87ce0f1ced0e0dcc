#include "sard/nn/train.hpp"

#include "sard/error.hpp"
#include "sard/metrics.hpp"
#include "sard/nn/checkpoint.hpp"
#include "sard/rng.hpp"
#include "sard/speckle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>

namespace sard::nn {

namespace {

constexpr std::uint64_t kInitSalt = 0x1417;
constexpr std::uint64_t kShuffleSalt = 0x5100000;
constexpr std::uint64_t kAugmentSalt = 0x5200000;
constexpr std::uint64_t kNoiseSalt = 0x5300000;

struct Prepared {
    ImageGrid input;
    ImageGrid truth;
};

std::size_t common_patch(const Archive& archive, const std::vector<std::size_t>& idx, std::size_t patch) {
    std::size_t p = patch;
    for (std::size_t i : idx) {
        const ImageGrid& t = archive.entries[i].pair.truth;
        p = std::min({p, t.width(), t.height()});
    }
    return p;
}

/// Ground truth of sample `i` for `epoch`, cropped to `patch` and augmented, plus its fresh speckled input.
Prepared training_sample(const Archive& archive, std::size_t i, std::size_t epoch, std::size_t patch,
                         const TrainConfig& cfg, const NormalizationParams& norm) {
    ImageGrid truth = archive.entries[i].pair.truth;
    CounterRng rng(mix_seed(mix_seed(cfg.seed, kAugmentSalt + epoch), i), 31, 0);
    if (truth.width() != patch || truth.height() != patch) {
        const auto x = rng.below(static_cast<std::uint32_t>(truth.width() - patch + 1));
        const auto y = rng.below(static_cast<std::uint32_t>(truth.height() - patch + 1));
        truth = apply_augment(truth, AugmentOp::crop(x, y, patch));
    }
    if (cfg.augment) {
        truth = rotate90(truth, static_cast<int>(rng.below(4)));
        if (rng.below(2) == 1) truth = flip_horizontal(truth);
    }
    SpeckleConfig noise;
    noise.model = NoiseModel::GammaIntensity;
    noise.looks = cfg.looks;
    noise.seed = mix_seed(mix_seed(cfg.seed, kNoiseSalt + epoch), i);
    const ImageGrid input = apply_noise(truth, noise);
    return {prepare_for_model(input, archive.clip, ImageRole::Input, norm),
            prepare_for_model(truth, archive.clip, ImageRole::Truth, norm)};
}

struct Validation {
    double loss = 0.0;
    double psnr = 0.0;
    double ssim = 0.0;
};

Validation validate(const Network& net, const std::vector<Prepared>& val, const LossWeights& weights) {
    Validation v;
    InferenceWorkspace<float> ws;
    Tensor pred;
    for (const auto& p : val) {
        const std::vector<ImageGrid> in{p.input}, gt{p.truth};
        const Tensor x = to_tensor<float>(in);
        const Tensor y = to_tensor<float>(gt);
        net.infer(x, pred, ws);
        v.loss += batch_loss(pred, y, weights).total;
        const ImageGrid out = to_image(pred, 0);
        v.psnr += psnr(p.truth, out);
        v.ssim += ssim(p.truth, out);
    }
    const double n = static_cast<double>(val.size());
    v.loss /= n;
    v.psnr /= n;
    v.ssim /= n;
    return v;
}

void save_last(const std::filesystem::path& dir, const Model& model) {
    std::filesystem::create_directories(dir);
    const auto tmp = dir / "last.sarc.tmp";
    save_checkpoint(tmp, model);
    std::filesystem::rename(tmp, dir / "last.sarc");
}

} // namespace

void TrainConfig::validate() const {
    if (epochs == 0 || batch_size < 2) throw InvalidArgument("train config: epochs >= 1 and batch >= 2 required");
    if (!(lr0 > 0.0) || !(decay > 0.0 && decay <= 1.0) || decay_step == 0) {
        throw InvalidArgument("train config: invalid learning-rate schedule");
    }
    if (!(alpha >= 0.0) || !(beta >= 0.0) || !(gamma >= 0.0)) {
        throw InvalidArgument("train config: loss weights must be nonnegative");
    }
    if (looks == 0) throw InvalidArgument("train config: looks must be >= 1");
    if (patch_size < 3) throw InvalidArgument("train config: patch size must be >= 3");
    layout.validate();
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
    j = {{"epochs", c.epochs},
         {"batch_size", c.batch_size},
         {"lr0", c.lr0},
         {"decay", c.decay},
         {"decay_step", c.decay_step},
         {"alpha", c.alpha},
         {"beta", c.beta},
         {"gamma", c.gamma},
         {"looks", c.looks},
         {"patch_size", c.patch_size},
         {"augment", c.augment},
         {"layout", c.layout},
         {"adam", {{"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}, {"eps", c.adam.eps}}},
         {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
    TrainConfig d;
    c.epochs = j.value("epochs", d.epochs);
    c.batch_size = j.value("batch_size", d.batch_size);
    c.lr0 = j.value("lr0", d.lr0);
    c.decay = j.value("decay", d.decay);
    c.decay_step = j.value("decay_step", d.decay_step);
    c.alpha = j.value("alpha", d.alpha);
    c.beta = j.value("beta", d.beta);
    c.gamma = j.value("gamma", d.gamma);
    c.looks = j.value("looks", d.looks);
    c.patch_size = j.value("patch_size", d.patch_size);
    c.augment = j.value("augment", d.augment);
    c.layout = j.contains("layout") ? j.at("layout").get<NetworkLayout>() : d.layout;
    if (j.contains("adam")) {
        const auto& a = j.at("adam");
        c.adam.beta1 = a.value("beta1", d.adam.beta1);
        c.adam.beta2 = a.value("beta2", d.adam.beta2);
        c.adam.eps = a.value("eps", d.adam.eps);
    } else {
        c.adam = d.adam;
    }
    c.seed = j.value("seed", d.seed);
}

void to_json(nlohmann::json& j, const EpochRecord& r) {
    j = {{"epoch", r.epoch},         {"lr", r.lr},           {"train_loss", r.train_loss},
         {"val_loss", r.val_loss}, {"val_psnr", r.val_psnr}, {"val_ssim", r.val_ssim}};
}

double lr_at(std::size_t epoch, const TrainConfig& cfg) {
    return step_decay_lr(epoch, cfg.lr0, cfg.decay, cfg.decay_step);
}

double train_step(Network& net, Adam<float>& adam, const Tensor& input, const Tensor& truth,
                  const LossWeights& weights, double lr) {
    Tensor filtered, grad;
    net.zero_grad();
    net.forward(input, filtered, Mode::Train);
    const LossTerms loss = batch_loss(filtered, truth, weights, &grad);
    if (!std::isfinite(loss.total)) throw DivergenceError("non-finite training loss", "loss");
    net.backward(grad);
    adam.step(net.params(), net.grads(), lr, net.param_blocks());
    return loss.total;
}

std::vector<double> fit_batch(Network& net, const Tensor& input, const Tensor& truth, const TrainConfig& cfg,
                              std::size_t steps) {
    Adam<float> adam(net.parameter_count(), cfg.adam);
    std::vector<double> losses;
    losses.reserve(steps);
    for (std::size_t s = 0; s < steps; ++s) {
        losses.push_back(train_step(net, adam, input, truth, cfg.loss_weights(), cfg.lr0));
    }
    return losses;
}

TrainResult train(const Archive& archive, const TrainConfig& cfg, const TrainOptions& options) {
    cfg.validate();
    if (!archive.normalization) throw InvalidArgument("train: archive has no normalization parameters");
    const auto train_idx = archive.indices_in("train");
    const auto val_idx = archive.indices_in("val");
    if (train_idx.size() < 2) throw InvalidArgument("train: need at least 2 training samples");
    if (val_idx.empty()) throw InvalidArgument("train: archive has no validation split");
    const NormalizationParams norm = *archive.normalization;
    for (std::size_t i : train_idx) {
        if (archive.entries[i].pair.truth.channels() != cfg.layout.channels) {
            throw InvalidArgument("train: channel count differs from the network layout");
        }
    }

    std::vector<Prepared> val;
    for (std::size_t i : val_idx) {
        const SamplePair& p = archive.entries[i].pair;
        val.push_back({prepare_for_model(p.input, archive.clip, ImageRole::Input, norm),
                       prepare_for_model(p.truth, archive.clip, ImageRole::Truth, norm)});
    }

    TrainResult result{Model{Network(cfg.layout), norm, archive.clip, cfg, 0}, {}};
    Network& net = result.model.network;
    net.init(mix_seed(cfg.seed, kInitSalt));
    Adam<float> adam(net.parameter_count(), cfg.adam);
    const std::size_t patch = common_patch(archive, train_idx, cfg.patch_size);
    const LossWeights weights = cfg.loss_weights();

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = lr_at(epoch, cfg);
        std::vector<std::size_t> order = train_idx;
        CounterRng shuffle(mix_seed(cfg.seed, kShuffleSalt + epoch), 30, 0);
        for (std::size_t k = order.size(); k > 1; --k) {
            std::swap(order[k - 1], order[shuffle.below(static_cast<std::uint32_t>(k))]);
        }
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            if (end - start < 2) break;
            std::vector<ImageGrid> inputs, truths;
            for (std::size_t k = start; k < end; ++k) {
                Prepared s = training_sample(archive, order[k], epoch, patch, cfg, norm);
                inputs.push_back(std::move(s.input));
                truths.push_back(std::move(s.truth));
            }
            loss_sum += train_step(net, adam, to_tensor<float>(inputs), to_tensor<float>(truths), weights, lr);
            ++batches;
        }
        const Validation v = validate(net, val, weights);
        EpochRecord rec{epoch, lr, loss_sum / static_cast<double>(batches), v.loss, v.psnr, v.ssim};
        if (!std::isfinite(rec.val_loss)) throw DivergenceError("non-finite validation loss", "loss");
        result.history.push_back(rec);
        result.model.epochs_trained = epoch + 1;
        if (options.checkpoint_dir) save_last(*options.checkpoint_dir, result.model);
        if (options.on_epoch) options.on_epoch(rec);
    }
    return result;
}

void write_history_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& history) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << "epoch,lr,train_loss,val_loss,val_psnr,val_ssim\n";
    for (const auto& r : history) {
        out << r.epoch << ',' << std::setprecision(9) << r.lr << ',' << r.train_loss << ',' << r.val_loss << ','
            << r.val_psnr << ',' << r.val_ssim << '\n';
    }
    if (!out) throw DataError("failed writing " + path.string());
}

} // namespace sard::nn
