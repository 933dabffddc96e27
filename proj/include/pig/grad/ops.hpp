#pragma once

#include <cstddef>
#include <vector>

#include "pig/grad/tensor.hpp"
#include "pig/util/rng.hpp"

namespace pig::grad {

// Binary elementwise ops. `b` either matches `a` exactly or is a single row
// ([M] or [1,M]) broadcast over the leading (batch) rows of `a`.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double offset);
// 1 - a
Tensor one_minus(const Tensor& a);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor affine(const Tensor& x, const Tensor& weight, const Tensor& bias);

Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor elu(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor square(const Tensor& a);
Tensor softplus(const Tensor& a);

// Concatenation along the feature (last) axis; all parts share the row count.
Tensor concat(const std::vector<Tensor>& parts);
// Concatenation along rows; all parts share the column count.
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor slice_cols(const Tensor& a, std::size_t start, std::size_t count);
Tensor slice_rows(const Tensor& a, std::size_t start, std::size_t count);
Tensor reshape(const Tensor& a, Shape shape);

// The feature axis is split into `groups` equal blocks, normalized separately.
Tensor softmax(const Tensor& a, std::size_t groups = 1);
Tensor log_softmax(const Tensor& a, std::size_t groups = 1);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
// Per-row sum, shape [rows, 1].
Tensor sum_cols(const Tensor& a);

Tensor clamp_min(const Tensor& a, double lo);

// Identity forward, blocks all gradient flow backward.
Tensor stop_gradient(const Tensor& a);

// Samples one class per group. Forward is the one-hot sample; backward routes
// the incoming gradient through the softmax Jacobian of the logits.
Tensor straight_through_onehot(const Tensor& logits, std::size_t groups, Rng& rng);
// Same backward, forward is the arg-max one-hot.
Tensor straight_through_mode(const Tensor& logits, std::size_t groups);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator*(const Tensor& a, double s) { return scale(a, s); }
inline Tensor operator*(double s, const Tensor& a) { return scale(a, s); }

} // namespace pig::grad
