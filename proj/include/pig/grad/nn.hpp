#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "pig/grad/ops.hpp"
#include "pig/grad/tensor.hpp"
#include "pig/util/rng.hpp"

namespace pig::grad {

// Ordered, named collection of learnable leaves.
class ParameterSet {
public:
    Tensor& add(std::string name, Tensor tensor);
    const std::vector<std::pair<std::string, Tensor>>& entries() const { return entries_; }
    std::vector<Tensor> tensors() const;
    std::size_t scalar_count() const;
    void set_requires_grad(bool flag);
    void zero_grad();
    void append(const ParameterSet& other);
    // Copies values from a set with identical names and shapes.
    void copy_values_from(const ParameterSet& other);
    // this = (1 - rate) * this + rate * other
    void blend_towards(const ParameterSet& other, double rate);

private:
    std::vector<std::pair<std::string, Tensor>> entries_;
};

enum class Activation { None, Elu, Tanh, Sigmoid };

Tensor activate(const Tensor& x, Activation act);

class Linear {
public:
    Linear() = default;
    // Glorot-uniform weights scaled by `init_scale`, zero bias.
    Linear(std::size_t in, std::size_t out, Rng& rng, ParameterSet& params, const std::string& name,
           double init_scale = 1.0);

    Tensor operator()(const Tensor& x) const { return affine(x, weight_, bias_); }
    std::size_t in() const { return in_; }
    std::size_t out() const { return out_; }
    Tensor& weight() { return weight_; }
    Tensor& bias() { return bias_; }

private:
    std::size_t in_ = 0, out_ = 0;
    Tensor weight_, bias_;
};

class Mlp {
public:
    Mlp() = default;
    Mlp(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out, Rng& rng, ParameterSet& params,
        const std::string& name, Activation hidden_act = Activation::Elu, Activation out_act = Activation::None,
        double out_init_scale = 1.0);

    Tensor operator()(const Tensor& x) const;
    std::size_t in() const { return layers_.empty() ? 0 : layers_.front().in(); }
    std::size_t out() const { return layers_.empty() ? 0 : layers_.back().out(); }
    std::vector<Linear>& layers() { return layers_; }

private:
    std::vector<Linear> layers_;
    Activation hidden_act_ = Activation::Elu;
    Activation out_act_ = Activation::None;
};

// Gated recurrent cell in the layout used by latent-dynamics models:
// one affine map of [x, h] produces reset, candidate and update parts.
class GruCell {
public:
    GruCell() = default;
    GruCell(std::size_t input, std::size_t hidden, Rng& rng, ParameterSet& params, const std::string& name);

    Tensor operator()(const Tensor& x, const Tensor& h) const;
    std::size_t hidden() const { return hidden_; }

private:
    std::size_t hidden_ = 0;
    Linear gates_;
};

} // namespace pig::grad
