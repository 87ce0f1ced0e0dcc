#include "sard/nn/optim.hpp"

#include "sard/error.hpp"

#include <cmath>

namespace sard::nn {

template <typename T>
Adam<T>::Adam(std::size_t size, AdamConfig config) : config_(config), m_(size, T(0)), v_(size, T(0)) {
    if (!(config.beta1 >= 0.0 && config.beta1 < 1.0) || !(config.beta2 >= 0.0 && config.beta2 < 1.0) ||
        !(config.eps > 0.0)) {
        throw InvalidArgument("adam: invalid constants");
    }
}

template <typename T>
void Adam<T>::step(std::vector<T>& params, const std::vector<T>& grads, double lr, std::span<const ParamBlock> blocks) {
    if (params.size() != m_.size() || grads.size() != m_.size()) throw InvalidArgument("adam: size mismatch");
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (!std::isfinite(static_cast<double>(grads[i]))) {
            std::string layer = "param[" + std::to_string(i) + "]";
            for (const auto& b : blocks) {
                if (i >= b.offset && i < b.offset + b.size) layer = b.name;
            }
            throw DivergenceError("non-finite gradient in " + layer, layer);
        }
    }
    ++t_;
    const double b1 = config_.beta1, b2 = config_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        const double m = b1 * m_[i] + (1.0 - b1) * g;
        const double v = b2 * v_[i] + (1.0 - b2) * g * g;
        m_[i] = static_cast<T>(m);
        v_[i] = static_cast<T>(v);
        params[i] = static_cast<T>(params[i] - lr * (m / c1) / (std::sqrt(v / c2) + config_.eps));
    }
}

double step_decay_lr(std::size_t epoch, double lr0, double decay, std::size_t step) {
    if (step == 0) throw InvalidArgument("lr schedule: decay step must be positive");
    return lr0 * std::pow(decay, static_cast<double>(epoch / step));
}

template class Adam<float>;
template class Adam<double>;

} // namespace sard::nn
