#include "sard/nn/network.hpp"

#include "sard/error.hpp"
#include "sard/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sard::nn {

void NetworkLayout::validate() const {
    if (channels == 0 || width == 0) throw InvalidArgument("network layout: channels and width must be positive");
    if (!(bn_momentum >= 0.0 && bn_momentum < 1.0) || !(bn_eps > 0.0)) {
        throw InvalidArgument("network layout: invalid batch-norm constants");
    }
}

std::size_t NetworkLayout::parameter_count() const {
    const std::size_t head = 9 * channels * width + width;
    const std::size_t block = 9 * width * width + width + 2 * width;
    const std::size_t tail = 9 * width * channels + channels;
    return head + blocks * block + tail;
}

std::size_t NetworkLayout::buffer_count() const { return blocks * 2 * width; }

void to_json(nlohmann::json& j, const NetworkLayout& l) {
    j = {{"channels", l.channels},       {"width", l.width},   {"blocks", l.blocks},
         {"bn_momentum", l.bn_momentum}, {"bn_eps", l.bn_eps}, {"parameter_count", l.parameter_count()}};
}

void from_json(const nlohmann::json& j, NetworkLayout& l) {
    l.channels = j.at("channels").get<std::size_t>();
    l.width = j.at("width").get<std::size_t>();
    l.blocks = j.at("blocks").get<std::size_t>();
    l.bn_momentum = j.at("bn_momentum").get<double>();
    l.bn_eps = j.at("bn_eps").get<double>();
}

template <typename T>
T subtract_sigmoid(T x, T r) {
    constexpr T lo = std::numeric_limits<T>::min();
    constexpr T hi = T(1) - std::numeric_limits<T>::epsilon() / T(2);
    const T s = T(1) / (T(1) + std::exp(r - x));
    return std::clamp(s, lo, hi);
}

template <typename T>
BasicNetwork<T>::BasicNetwork(NetworkLayout layout) : layout_(layout) {
    layout_.validate();
    std::size_t offset = 0;
    std::size_t buffer_offset = 0;
    auto add_conv = [&](const std::string& name, std::size_t in, std::size_t out) {
        convs_.emplace_back(in, out, offset);
        blocks_.push_back({name + ".weight", offset, 9 * in * out});
        blocks_.push_back({name + ".bias", offset + 9 * in * out, out});
        offset += convs_.back().param_count();
    };
    add_conv("head", layout_.channels, layout_.width);
    for (std::size_t b = 0; b < layout_.blocks; ++b) {
        const std::string name = "block" + std::to_string(b + 1);
        add_conv(name + ".conv", layout_.width, layout_.width);
        norms_.emplace_back(layout_.width, offset, buffer_offset, layout_.bn_momentum, layout_.bn_eps);
        blocks_.push_back({name + ".bn.gamma", offset, layout_.width});
        blocks_.push_back({name + ".bn.beta", offset + layout_.width, layout_.width});
        offset += norms_.back().param_count();
        buffer_offset += norms_.back().buffer_count();
    }
    add_conv("tail", layout_.width, layout_.channels);
    params_.assign(offset, T(0));
    grads_.assign(offset, T(0));
    buffers_.assign(buffer_offset, T(0));
    for (const auto& bn : norms_) {
        std::fill_n(buffers_.begin() + static_cast<std::ptrdiff_t>(bn.buffer_offset() + bn.channels()), bn.channels(),
                    T(1));
        std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(bn.offset()), bn.channels(), T(1));
    }
}

template <typename T>
void BasicNetwork<T>::init(std::uint64_t seed) {
    std::fill(params_.begin(), params_.end(), T(0));
    for (std::size_t i = 0; i < convs_.size(); ++i) {
        const auto& conv = convs_[i];
        CounterRng rng(mix_seed(seed, i), 20, 0);
        const double limit = std::sqrt(6.0 / static_cast<double>(9 * conv.in_channels()));
        for (std::size_t k = 0; k < conv.weight_count(); ++k) {
            params_[conv.offset() + k] = static_cast<T>((2.0 * rng.uniform() - 1.0) * limit);
        }
    }
    for (const auto& bn : norms_) {
        std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(bn.offset()), bn.channels(), T(1));
        std::fill_n(buffers_.begin() + static_cast<std::ptrdiff_t>(bn.buffer_offset()), bn.channels(), T(0));
        std::fill_n(buffers_.begin() + static_cast<std::ptrdiff_t>(bn.buffer_offset() + bn.channels()), bn.channels(),
                    T(1));
    }
    cache_.valid = false;
}

template <typename T>
void BasicNetwork<T>::zero_grad() {
    std::fill(grads_.begin(), grads_.end(), T(0));
}

template <typename T>
void BasicNetwork<T>::check_input(const BasicTensor<T>& x) const {
    if (x.c != layout_.channels) throw InvalidArgument("network: input channel count mismatch");
    if (x.size() == 0) throw InvalidArgument("network: empty input");
    for (T v : x.data) {
        if (!(v >= T(-1e-6) && v <= T(1) + T(1e-6))) {
            throw InvalidArgument("network: input must be normalized into [0, 1]");
        }
    }
}

template <typename T>
void BasicNetwork<T>::forward(const BasicTensor<T>& x, BasicTensor<T>& filtered, Mode mode,
                              BasicTensor<T>* residual) {
    check_input(x);
    const std::size_t nb = layout_.blocks;
    Cache& c = cache_;
    c.valid = false;
    c.x = x;
    c.acts.resize(nb + 1);
    c.pre.resize(nb);
    c.stats.resize(nb);
    convs_[0].forward(params_.data(), x, c.acts[0], c.col);
    relu_inplace(c.acts[0]);
    for (std::size_t b = 0; b < nb; ++b) {
        convs_[b + 1].forward(params_.data(), c.acts[b], c.pre[b], c.col);
        if (mode == Mode::Train) {
            norms_[b].forward_train(params_.data(), buffers_.data(), c.pre[b], c.acts[b + 1], c.stats[b]);
        } else {
            norms_[b].forward_eval(params_.data(), buffers_.data(), c.pre[b], c.acts[b + 1]);
        }
        relu_inplace(c.acts[b + 1]);
    }
    BasicTensor<T> r;
    convs_[nb + 1].forward(params_.data(), c.acts[nb], r, c.col);
    filtered.resize(x.n, x.h, x.w, x.c);
    for (std::size_t i = 0; i < x.size(); ++i) filtered.data[i] = subtract_sigmoid(x.data[i], r.data[i]);
    c.filtered = filtered;
    c.valid = mode == Mode::Train;
    if (residual != nullptr) *residual = std::move(r);
}

template <typename T>
void BasicNetwork<T>::backward(const BasicTensor<T>& dfiltered, BasicTensor<T>* dinput) {
    Cache& c = cache_;
    if (!c.valid) throw InvalidArgument("network: backward() needs a preceding Train-mode forward()");
    if (!dfiltered.same_shape(c.filtered)) throw InvalidArgument("network: gradient shape mismatch");
    const std::size_t nb = layout_.blocks;
    BasicTensor<T> dz(dfiltered.n, dfiltered.h, dfiltered.w, dfiltered.c);
    for (std::size_t i = 0; i < dz.size(); ++i) {
        const T s = c.filtered.data[i];
        dz.data[i] = dfiltered.data[i] * s * (T(1) - s);
    }
    BasicTensor<T> dr(dz.n, dz.h, dz.w, dz.c);
    for (std::size_t i = 0; i < dz.size(); ++i) dr.data[i] = -dz.data[i];
    BasicTensor<T> dh, dpre;
    convs_[nb + 1].backward(params_.data(), grads_.data(), c.acts[nb], dr, &dh, c.col);
    for (std::size_t b = nb; b-- > 0;) {
        relu_backward_inplace(c.acts[b + 1], dh);
        norms_[b].backward(params_.data(), grads_.data(), c.stats[b], c.pre[b], dh, dpre);
        convs_[b + 1].backward(params_.data(), grads_.data(), c.acts[b], dpre, &dh, c.col);
    }
    relu_backward_inplace(c.acts[0], dh);
    if (dinput != nullptr) {
        BasicTensor<T> dx;
        convs_[0].backward(params_.data(), grads_.data(), c.x, dh, &dx, c.col);
        for (std::size_t i = 0; i < dx.size(); ++i) dx.data[i] += dz.data[i];
        *dinput = std::move(dx);
    } else {
        convs_[0].backward(params_.data(), grads_.data(), c.x, dh, nullptr, c.col);
    }
}

template <typename T>
void BasicNetwork<T>::infer(const BasicTensor<T>& x, BasicTensor<T>& filtered, InferenceWorkspace<T>& ws,
                            BasicTensor<T>* residual) const {
    check_input(x);
    const std::size_t nb = layout_.blocks;
    convs_[0].forward(params_.data(), x, ws.a, ws.col);
    relu_inplace(ws.a);
    for (std::size_t b = 0; b < nb; ++b) {
        convs_[b + 1].forward(params_.data(), ws.a, ws.b, ws.col);
        norms_[b].forward_eval(params_.data(), buffers_.data(), ws.b, ws.b);
        relu_inplace(ws.b);
        std::swap(ws.a, ws.b);
    }
    convs_[nb + 1].forward(params_.data(), ws.a, ws.residual, ws.col);
    filtered.resize(x.n, x.h, x.w, x.c);
    for (std::size_t i = 0; i < x.size(); ++i) filtered.data[i] = subtract_sigmoid(x.data[i], ws.residual.data[i]);
    if (residual != nullptr) *residual = ws.residual;
}

template <typename T>
void BasicNetwork<T>::infer(const BasicTensor<T>& x, BasicTensor<T>& filtered) const {
    InferenceWorkspace<T> ws;
    infer(x, filtered, ws);
}

template <typename T>
template <typename U>
BasicNetwork<U> BasicNetwork<T>::cast() const {
    BasicNetwork<U> out(layout_);
    std::transform(params_.begin(), params_.end(), out.params().begin(), [](T v) { return static_cast<U>(v); });
    std::transform(buffers_.begin(), buffers_.end(), out.buffers().begin(), [](T v) { return static_cast<U>(v); });
    return out;
}

template float subtract_sigmoid<float>(float, float);
template double subtract_sigmoid<double>(double, double);
template class BasicNetwork<float>;
template class BasicNetwork<double>;
template BasicNetwork<double> BasicNetwork<float>::cast<double>() const;
template BasicNetwork<float> BasicNetwork<double>::cast<float>() const;
template BasicNetwork<float> BasicNetwork<float>::cast<float>() const;

} // namespace sard::nn
