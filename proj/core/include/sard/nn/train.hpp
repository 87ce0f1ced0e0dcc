#pragma once

#include "sard/archive.hpp"
#include "sard/dataset.hpp"
#include "sard/nn/loss.hpp"
#include "sard/nn/network.hpp"
#include "sard/nn/optim.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

namespace sard::nn {

struct TrainConfig {
    std::size_t epochs = 50;
    std::size_t batch_size = 16;
    double lr0 = 0.002;
    double decay = 0.8;
    std::size_t decay_step = 5;
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 0.00001;
    std::uint32_t looks = 4;
    /// Square training crop; images no larger than this are used whole.
    std::size_t patch_size = 96;
    /// Random quarter turns and horizontal flips, drawn per sample and epoch.
    bool augment = true;
    NetworkLayout layout;
    AdamConfig adam;
    std::uint64_t seed = 0;

    void validate() const;
    LossWeights loss_weights() const { return {alpha, beta, gamma}; }
};

void to_json(nlohmann::json& j, const TrainConfig& cfg);
void from_json(const nlohmann::json& j, TrainConfig& cfg);

/// lr0 * decay^floor(epoch / decay_step), epochs counted from 0.
double lr_at(std::size_t epoch, const TrainConfig& cfg);

/// A network together with everything inference needs to reproduce the training pipeline.
struct Model {
    Network network;
    std::optional<NormalizationParams> normalization;
    ClipPolicy clip;
    TrainConfig config;
    std::size_t epochs_trained = 0;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    /// Mean PSNR / SSIM between normalized truth and prediction over the validation split.
    double val_psnr = 0.0;
    double val_ssim = 0.0;

    friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

void to_json(nlohmann::json& j, const EpochRecord& r);

struct TrainOptions {
    /// When set, "last.sarc" there is replaced after every completed epoch.
    std::optional<std::filesystem::path> checkpoint_dir;
    std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainResult {
    Model model;
    std::vector<EpochRecord> history;
};

/// Training loop: each epoch shuffles the train split, and every sample takes its
/// ground truth, a random geometric augmentation, fresh Gamma(looks) speckle, the
/// clip/normalize path, forward, loss and one Adam update per batch. Validation runs on
/// the archived (frozen) val inputs in eval mode. A trailing batch of one sample is
/// dropped, since batch normalization needs two.
/// Throws DivergenceError on a non-finite loss or gradient; the last completed epoch's
/// checkpoint stays on disk.
TrainResult train(const Archive& archive, const TrainConfig& cfg, const TrainOptions& options = {});

/// One optimizer step on a fixed batch; returns the loss before the update.
double train_step(Network& net, Adam<float>& adam, const Tensor& input, const Tensor& truth,
                  const LossWeights& weights, double lr);

/// Repeats train_step on one batch at constant lr0; returns the loss of every step.
std::vector<double> fit_batch(Network& net, const Tensor& input, const Tensor& truth, const TrainConfig& cfg,
                              std::size_t steps);

void write_history_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& history);

} // namespace sard::nn
