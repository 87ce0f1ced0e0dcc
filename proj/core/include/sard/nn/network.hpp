#pragma once

#include "sard/nn/layers.hpp"
#include "sard/nn/tensor.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace sard::nn {

/// conv3x3(P -> width) + ReLU, `blocks` x [conv3x3(width -> width), BN, ReLU], conv3x3(width -> P).
struct NetworkLayout {
    std::size_t channels = 1;
    std::size_t width = 64;
    std::size_t blocks = 12;
    double bn_momentum = 0.99;
    double bn_eps = 1e-5;

    void validate() const;
    /// Trainable scalars (kernels, biases, BN scale and shift).
    std::size_t parameter_count() const;
    /// BN running means and variances.
    std::size_t buffer_count() const;
    /// Pixels of context each output depends on, per side: one per convolution.
    std::size_t receptive_radius() const { return blocks + 2; }

    friend bool operator==(const NetworkLayout&, const NetworkLayout&) = default;
};

void to_json(nlohmann::json& j, const NetworkLayout& layout);
void from_json(const nlohmann::json& j, NetworkLayout& layout);

/// Named slice of the flat parameter array.
struct ParamBlock {
    std::string name;
    std::size_t offset = 0;
    std::size_t size = 0;
};

enum class Mode { Train, Eval };

/// Reusable buffers for cache-free inference.
template <typename T>
struct InferenceWorkspace {
    BasicTensor<T> a;
    BasicTensor<T> b;
    BasicTensor<T> residual;
    std::vector<T> col;
};

/// The residual despeckler: r = CNN(x), filtered = sigmoid(x - r).
///
/// All trainable parameters sit in one flat array (with a gradient array of the same
/// layout), which keeps the optimizer and the checkpoint format layout-agnostic.
template <typename T>
class BasicNetwork {
public:
    explicit BasicNetwork(NetworkLayout layout = {});

    /// He-uniform kernels (limit sqrt(6 / fan_in)), zero biases, unit BN scale, zero shift,
    /// running statistics (0, 1).
    void init(std::uint64_t seed);

    const NetworkLayout& layout() const noexcept { return layout_; }
    std::size_t parameter_count() const noexcept { return params_.size(); }
    std::vector<T>& params() noexcept { return params_; }
    const std::vector<T>& params() const noexcept { return params_; }
    std::vector<T>& grads() noexcept { return grads_; }
    const std::vector<T>& grads() const noexcept { return grads_; }
    std::vector<T>& buffers() noexcept { return buffers_; }
    const std::vector<T>& buffers() const noexcept { return buffers_; }
    const std::vector<ParamBlock>& param_blocks() const noexcept { return blocks_; }

    void zero_grad();

    /// Forward pass keeping every activation for backward(). Input must lie in [0, 1]
    /// (tolerance 1e-6). Train mode uses batch statistics and updates the running ones.
    void forward(const BasicTensor<T>& x, BasicTensor<T>& filtered, Mode mode = Mode::Train,
                 BasicTensor<T>* residual = nullptr);

    /// Accumulates parameter gradients of the last Train-mode forward() given dL/dfiltered.
    void backward(const BasicTensor<T>& dfiltered, BasicTensor<T>* dinput = nullptr);

    /// Eval-mode forward without activation caching; safe to call concurrently.
    void infer(const BasicTensor<T>& x, BasicTensor<T>& filtered, InferenceWorkspace<T>& ws,
               BasicTensor<T>* residual = nullptr) const;
    void infer(const BasicTensor<T>& x, BasicTensor<T>& filtered) const;

    /// Copy with parameters converted to another precision.
    template <typename U>
    BasicNetwork<U> cast() const;

private:
    void check_input(const BasicTensor<T>& x) const;

    NetworkLayout layout_;
    std::vector<Conv3x3<T>> convs_;
    std::vector<BatchNorm<T>> norms_;
    std::vector<T> params_;
    std::vector<T> grads_;
    std::vector<T> buffers_;
    std::vector<ParamBlock> blocks_;

    struct Cache {
        bool valid = false;
        BasicTensor<T> x;
        std::vector<BasicTensor<T>> acts;
        std::vector<BasicTensor<T>> pre;
        std::vector<BatchStats> stats;
        BasicTensor<T> filtered;
        std::vector<T> col;
    } cache_;
};

using Network = BasicNetwork<float>;

/// sigmoid(x - r) saturated to the open interval (0, 1) at precision T.
template <typename T>
T subtract_sigmoid(T x, T r);

} // namespace sard::nn
