#include "pig/grad/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace pig::grad {

Tensor& ParameterSet::add(std::string name, Tensor tensor) {
    for (const auto& [n, t] : entries_)
        if (n == name) throw std::invalid_argument("parameter set: duplicate name " + name);
    tensor.set_requires_grad(true);
    entries_.emplace_back(std::move(name), std::move(tensor));
    return entries_.back().second;
}

std::vector<Tensor> ParameterSet::tensors() const {
    std::vector<Tensor> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.second);
    return out;
}

std::size_t ParameterSet::scalar_count() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.second.numel();
    return n;
}

void ParameterSet::set_requires_grad(bool flag) {
    for (auto& e : entries_) e.second.set_requires_grad(flag);
}

void ParameterSet::zero_grad() {
    for (auto& e : entries_) e.second.zero_grad();
}

void ParameterSet::append(const ParameterSet& other) {
    for (const auto& e : other.entries_) entries_.push_back(e);
}

void ParameterSet::copy_values_from(const ParameterSet& other) {
    if (other.entries_.size() != entries_.size()) throw std::invalid_argument("parameter set: size mismatch");
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        auto dst = entries_[i].second.mutable_values();
        auto src = other.entries_[i].second.values();
        if (dst.size() != src.size()) throw std::invalid_argument("parameter set: shape mismatch at " + entries_[i].first);
        std::copy(src.begin(), src.end(), dst.begin());
    }
}

void ParameterSet::blend_towards(const ParameterSet& other, double rate) {
    if (other.entries_.size() != entries_.size()) throw std::invalid_argument("parameter set: size mismatch");
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        auto dst = entries_[i].second.mutable_values();
        auto src = other.entries_[i].second.values();
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = (1.0 - rate) * dst[k] + rate * src[k];
    }
}

Tensor activate(const Tensor& x, Activation act) {
    switch (act) {
    case Activation::None: return x;
    case Activation::Elu: return elu(x);
    case Activation::Tanh: return tanh(x);
    case Activation::Sigmoid: return sigmoid(x);
    }
    return x;
}

Linear::Linear(std::size_t in, std::size_t out, Rng& rng, ParameterSet& params, const std::string& name,
               double init_scale)
    : in_(in), out_(out) {
    const double limit = init_scale * std::sqrt(6.0 / static_cast<double>(in + out));
    std::vector<double> w(in * out);
    for (auto& v : w) v = rng.uniform(-limit, limit);
    weight_ = params.add(name + ".W", Tensor::from({in, out}, std::move(w)));
    bias_ = params.add(name + ".b", Tensor::zeros({1, out}));
}

Mlp::Mlp(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out, Rng& rng, ParameterSet& params,
         const std::string& name, Activation hidden_act, Activation out_act, double out_init_scale)
    : hidden_act_(hidden_act), out_act_(out_act) {
    std::size_t prev = in;
    for (std::size_t i = 0; i < hidden.size(); ++i) {
        layers_.emplace_back(prev, hidden[i], rng, params, name + ".l" + std::to_string(i));
        prev = hidden[i];
    }
    layers_.emplace_back(prev, out, rng, params, name + ".out", out_init_scale);
}

Tensor Mlp::operator()(const Tensor& x) const {
    Tensor h = x;
    for (std::size_t i = 0; i + 1 < layers_.size(); ++i) h = activate(layers_[i](h), hidden_act_);
    return activate(layers_.back()(h), out_act_);
}

GruCell::GruCell(std::size_t input, std::size_t hidden, Rng& rng, ParameterSet& params, const std::string& name)
    : hidden_(hidden), gates_(input + hidden, 3 * hidden, rng, params, name + ".gates") {}

Tensor GruCell::operator()(const Tensor& x, const Tensor& h) const {
    auto parts = gates_(concat({x, h}));
    auto reset = sigmoid(slice_cols(parts, 0, hidden_));
    auto cand = tanh(mul(reset, slice_cols(parts, hidden_, hidden_)));
    auto update = sigmoid(add_scalar(slice_cols(parts, 2 * hidden_, hidden_), -1.0));
    return add(mul(update, cand), mul(one_minus(update), h));
}

} // namespace pig::grad
