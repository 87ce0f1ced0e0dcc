#pragma once

#include "sard/nn/network.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace sard::nn {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam with bias correction. Moments are kept per scalar, mirroring the parameter array.
template <typename T>
class Adam {
public:
    Adam(std::size_t size, AdamConfig config = {});

    /// One update. Throws DivergenceError naming the offending block (from `blocks`, when
    /// given) if any gradient is non-finite; parameters are left untouched in that case.
    void step(std::vector<T>& params, const std::vector<T>& grads, double lr,
              std::span<const ParamBlock> blocks = {});

    std::size_t steps() const noexcept { return t_; }
    const AdamConfig& config() const noexcept { return config_; }
    const std::vector<T>& first_moment() const noexcept { return m_; }
    const std::vector<T>& second_moment() const noexcept { return v_; }

private:
    AdamConfig config_;
    std::vector<T> m_;
    std::vector<T> v_;
    std::size_t t_ = 0;
};

/// lr0 * decay^floor(epoch / step)
double step_decay_lr(std::size_t epoch, double lr0, double decay, std::size_t step);

} // namespace sard::nn
