#include "pig/grad/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pig/kernels/gemm.hpp"

namespace pig::grad {

namespace {

enum class Broadcast { Same, Row };

Broadcast broadcast_kind(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() == b.shape()) return Broadcast::Same;
    if (a.numel() == b.numel() && a.rows() == b.rows() && a.cols() == b.cols()) return Broadcast::Same;
    if (b.rows() == 1 && b.numel() == a.cols() && a.rows() > 1) return Broadcast::Row;
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
}

void accumulate_broadcast(std::vector<double>& dst, std::span<const double> g, Broadcast kind,
                          std::size_t cols, double sign) {
    if (kind == Broadcast::Same) {
        for (std::size_t i = 0; i < g.size(); ++i) dst[i] += sign * g[i];
    } else {
        for (std::size_t i = 0; i < g.size(); ++i) dst[i % cols] += sign * g[i];
    }
}

template <class Fwd, class Deriv>
Tensor unary(OpKind kind, const Tensor& a, Fwd fwd, Deriv deriv) {
    auto in = a.values();
    std::vector<double> out(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = fwd(in[i]);
    return make_op(kind, a.shape(), std::move(out), {a}, [deriv](Node& self) {
        auto& x = *self.inputs[0];
        if (!x.requires_grad) return;
        auto& gx = x.grad_buffer();
        for (std::size_t i = 0; i < self.grad.size(); ++i)
            gx[i] += self.grad[i] * deriv(x.value[i], self.value[i]);
    });
}

std::size_t group_width(const Tensor& a, std::size_t groups, const char* op) {
    if (groups == 0 || a.cols() % groups != 0)
        throw ShapeError(std::string(op) + ": feature width " + std::to_string(a.cols()) +
                         " not divisible into " + std::to_string(groups) + " groups");
    return a.cols() / groups;
}

// softmax of every block of `width` contiguous values
void block_softmax(std::span<const double> in, std::span<double> out, std::size_t width) {
    for (std::size_t base = 0; base < in.size(); base += width) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < width; ++c) mx = std::max(mx, in[base + c]);
        double total = 0.0;
        for (std::size_t c = 0; c < width; ++c) {
            out[base + c] = std::exp(in[base + c] - mx);
            total += out[base + c];
        }
        for (std::size_t c = 0; c < width; ++c) out[base + c] /= total;
    }
}

void softmax_jacobian_accumulate(std::span<const double> probs, std::span<const double> g,
                                 std::vector<double>& dst, std::size_t width) {
    for (std::size_t base = 0; base < probs.size(); base += width) {
        double dot = 0.0;
        for (std::size_t c = 0; c < width; ++c) dot += g[base + c] * probs[base + c];
        for (std::size_t c = 0; c < width; ++c) dst[base + c] += probs[base + c] * (g[base + c] - dot);
    }
}

Tensor straight_through_impl(const Tensor& logits, std::size_t groups, Rng* rng) {
    const std::size_t width = group_width(logits, groups, "straight_through");
    std::vector<double> probs(logits.numel());
    block_softmax(logits.values(), probs, width);
    std::vector<double> onehot(logits.numel(), 0.0);
    for (std::size_t base = 0; base < probs.size(); base += width) {
        std::size_t pick = 0;
        if (rng) {
            double u = rng->uniform();
            double acc = 0.0;
            pick = width - 1;
            for (std::size_t c = 0; c < width; ++c) {
                acc += probs[base + c];
                if (u < acc) {
                    pick = c;
                    break;
                }
            }
        } else {
            for (std::size_t c = 1; c < width; ++c)
                if (probs[base + c] > probs[base + pick]) pick = c;
        }
        onehot[base + pick] = 1.0;
    }
    return make_op(OpKind::StraightThrough, logits.shape(), std::move(onehot), {logits},
                   [probs = std::move(probs), width](Node& self) {
                       auto& x = *self.inputs[0];
                       if (!x.requires_grad) return;
                       softmax_jacobian_accumulate(probs, self.grad, x.grad_buffer(), width);
                   });
}

} // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    const auto kind = broadcast_kind(a, b, "add");
    const std::size_t cols = a.cols();
    auto av = a.values();
    auto bv = b.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] + bv[kind == Broadcast::Same ? i : i % cols];
    return make_op(OpKind::Add, a.shape(), std::move(out), {a, b}, [kind, cols](Node& self) {
        auto& x = *self.inputs[0];
        auto& y = *self.inputs[1];
        if (x.requires_grad) accumulate_broadcast(x.grad_buffer(), self.grad, Broadcast::Same, cols, 1.0);
        if (y.requires_grad) accumulate_broadcast(y.grad_buffer(), self.grad, kind, cols, 1.0);
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    const auto kind = broadcast_kind(a, b, "sub");
    const std::size_t cols = a.cols();
    auto av = a.values();
    auto bv = b.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] - bv[kind == Broadcast::Same ? i : i % cols];
    return make_op(OpKind::Sub, a.shape(), std::move(out), {a, b}, [kind, cols](Node& self) {
        auto& x = *self.inputs[0];
        auto& y = *self.inputs[1];
        if (x.requires_grad) accumulate_broadcast(x.grad_buffer(), self.grad, Broadcast::Same, cols, 1.0);
        if (y.requires_grad) accumulate_broadcast(y.grad_buffer(), self.grad, kind, cols, -1.0);
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    const auto kind = broadcast_kind(a, b, "mul");
    const std::size_t cols = a.cols();
    auto av = a.values();
    auto bv = b.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] * bv[kind == Broadcast::Same ? i : i % cols];
    return make_op(OpKind::Mul, a.shape(), std::move(out), {a, b}, [kind, cols](Node& self) {
        auto& x = *self.inputs[0];
        auto& y = *self.inputs[1];
        const bool same = kind == Broadcast::Same;
        if (x.requires_grad) {
            auto& gx = x.grad_buffer();
            for (std::size_t i = 0; i < self.grad.size(); ++i)
                gx[i] += self.grad[i] * y.value[same ? i : i % cols];
        }
        if (y.requires_grad) {
            auto& gy = y.grad_buffer();
            for (std::size_t i = 0; i < self.grad.size(); ++i)
                gy[same ? i : i % cols] += self.grad[i] * x.value[i];
        }
    });
}

Tensor scale(const Tensor& a, double factor) {
    auto av = a.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] * factor;
    return make_op(OpKind::Scale, a.shape(), std::move(out), {a}, [factor](Node& self) {
        auto& x = *self.inputs[0];
        if (!x.requires_grad) return;
        auto& gx = x.grad_buffer();
        for (std::size_t i = 0; i < self.grad.size(); ++i) gx[i] += self.grad[i] * factor;
    });
}

Tensor add_scalar(const Tensor& a, double offset) {
    auto av = a.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] + offset;
    return make_op(OpKind::AddScalar, a.shape(), std::move(out), {a}, [](Node& self) {
        auto& x = *self.inputs[0];
        if (!x.requires_grad) return;
        auto& gx = x.grad_buffer();
        for (std::size_t i = 0; i < self.grad.size(); ++i) gx[i] += self.grad[i];
    });
}

Tensor one_minus(const Tensor& a) { return add_scalar(scale(a, -1.0), 1.0); }

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (b.shape().size() != 2 || a.cols() != b.shape()[0])
        throw ShapeError("matmul: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    const std::size_t n = a.rows(), k = a.cols(), m = b.shape()[1];
    std::vector<double> out(n * m);
    kernels::gemm_nn(a.values(), b.values(), out, n, k, m);
    Shape shape = a.shape().size() >= 2 ? a.shape() : Shape{m};
    shape.back() = m;
    return make_op(OpKind::MatMul, std::move(shape), std::move(out), {a, b}, [n, k, m](Node& self) {
        auto& x = *self.inputs[0];
        auto& w = *self.inputs[1];
        if (x.requires_grad) kernels::gemm_nt(self.grad, w.value, x.grad_buffer(), n, m, k, true);
        if (w.requires_grad) kernels::gemm_tn(x.value, self.grad, w.grad_buffer(), n, k, m, true);
    });
}

Tensor affine(const Tensor& x, const Tensor& weight, const Tensor& bias) {
    if (weight.shape().size() != 2 || x.cols() != weight.shape()[0])
        throw ShapeError("affine: shape mismatch " + shape_str(x.shape()) + " vs " +
                         shape_str(weight.shape()));
    const std::size_t n = x.rows(), k = x.cols(), m = weight.shape()[1];
    if (bias.numel() != m)
        throw ShapeError("affine: bias shape " + shape_str(bias.shape()) + " vs output width " +
                         std::to_string(m));
    std::vector<double> out(n * m);
    auto bv = bias.values();
    for (std::size_t i = 0; i < n; ++i)
        std::copy(bv.begin(), bv.end(), out.begin() + static_cast<std::ptrdiff_t>(i * m));
    kernels::gemm_nn(x.values(), weight.values(), out, n, k, m, true);
    Shape shape = x.shape().size() >= 2 ? x.shape() : Shape{m};
    shape.back() = m;
    return make_op(OpKind::Affine, std::move(shape), std::move(out), {x, weight, bias},
                   [n, k, m](Node& self) {
                       auto& in = *self.inputs[0];
                       auto& w = *self.inputs[1];
                       auto& b = *self.inputs[2];
                       if (in.requires_grad) kernels::gemm_nt(self.grad, w.value, in.grad_buffer(), n, m, k, true);
                       if (w.requires_grad) kernels::gemm_tn(in.value, self.grad, w.grad_buffer(), n, k, m, true);
                       if (b.requires_grad) {
                           auto& gb = b.grad_buffer();
                           for (std::size_t i = 0; i < n; ++i)
                               for (std::size_t j = 0; j < m; ++j) gb[j] += self.grad[i * m + j];
                       }
                   });
}

Tensor tanh(const Tensor& a) {
    return unary(OpKind::Tanh, a, [](double x) { return std::tanh(x); },
                 [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& a) {
    return unary(OpKind::Sigmoid, a,
                 [](double x) {
                     if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
                     double e = std::exp(x);
                     return e / (1.0 + e);
                 },
                 [](double, double y) { return y * (1.0 - y); });
}

Tensor elu(const Tensor& a) {
    return unary(OpKind::Elu, a, [](double x) { return x > 0 ? x : std::expm1(x); },
                 [](double x, double y) { return x > 0 ? 1.0 : y + 1.0; });
}

Tensor exp(const Tensor& a) {
    return unary(OpKind::Exp, a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
    return unary(OpKind::Log, a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor square(const Tensor& a) {
    return unary(OpKind::Square, a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Tensor softplus(const Tensor& a) {
    return unary(OpKind::Softplus, a,
                 [](double x) { return std::log1p(std::exp(-std::abs(x))) + std::max(x, 0.0); },
                 [](double x, double) {
                     if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
                     double e = std::exp(x);
                     return e / (1.0 + e);
                 });
}

Tensor concat(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw ShapeError("concat: no inputs");
    const std::size_t rows = parts[0].rows();
    std::vector<std::size_t> widths;
    std::size_t total = 0;
    for (const auto& p : parts) {
        if (p.rows() != rows)
            throw ShapeError("concat: row mismatch " + shape_str(parts[0].shape()) + " vs " + shape_str(p.shape()));
        widths.push_back(p.cols());
        total += p.cols();
    }
    std::vector<double> out(rows * total);
    std::size_t offset = 0;
    for (std::size_t k = 0; k < parts.size(); ++k) {
        auto v = parts[k].values();
        const std::size_t w = widths[k];
        for (std::size_t r = 0; r < rows; ++r)
            std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(r * w), w,
                        out.begin() + static_cast<std::ptrdiff_t>(r * total + offset));
        offset += w;
    }
    Shape shape = parts[0].shape().size() >= 2 ? parts[0].shape() : Shape{total};
    shape.back() = total;
    return make_op(OpKind::Concat, std::move(shape), std::move(out), parts,
                   [widths, rows, total](Node& self) {
                       std::size_t offset = 0;
                       for (std::size_t k = 0; k < self.inputs.size(); ++k) {
                           auto& in = *self.inputs[k];
                           const std::size_t w = widths[k];
                           if (in.requires_grad) {
                               auto& g = in.grad_buffer();
                               for (std::size_t r = 0; r < rows; ++r)
                                   for (std::size_t c = 0; c < w; ++c) g[r * w + c] += self.grad[r * total + offset + c];
                           }
                           offset += w;
                       }
                   });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw ShapeError("concat_rows: no inputs");
    const std::size_t cols = parts[0].cols();
    std::size_t rows = 0;
    std::vector<std::size_t> sizes;
    for (const auto& p : parts) {
        if (p.cols() != cols)
            throw ShapeError("concat_rows: column mismatch " + shape_str(parts[0].shape()) + " vs " +
                             shape_str(p.shape()));
        rows += p.rows();
        sizes.push_back(p.numel());
    }
    std::vector<double> out;
    out.reserve(rows * cols);
    for (const auto& p : parts) out.insert(out.end(), p.values().begin(), p.values().end());
    return make_op(OpKind::ConcatRows, Shape{rows, cols}, std::move(out), parts, [sizes](Node& self) {
        std::size_t offset = 0;
        for (std::size_t k = 0; k < self.inputs.size(); ++k) {
            auto& in = *self.inputs[k];
            if (in.requires_grad) {
                auto& g = in.grad_buffer();
                for (std::size_t i = 0; i < sizes[k]; ++i) g[i] += self.grad[offset + i];
            }
            offset += sizes[k];
        }
    });
}

Tensor slice_cols(const Tensor& a, std::size_t start, std::size_t count) {
    const std::size_t rows = a.rows(), cols = a.cols();
    if (start + count > cols)
        throw ShapeError("slice_cols: range [" + std::to_string(start) + "," + std::to_string(start + count) +
                         ") outside " + shape_str(a.shape()));
    auto v = a.values();
    std::vector<double> out(rows * count);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < count; ++c) out[r * count + c] = v[r * cols + start + c];
    Shape shape = a.shape().size() >= 2 ? a.shape() : Shape{count};
    shape.back() = count;
    return make_op(OpKind::SliceCols, std::move(shape), std::move(out), {a}, [rows, cols, start, count](Node& self) {
        auto& in = *self.inputs[0];
        if (!in.requires_grad) return;
        auto& g = in.grad_buffer();
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < count; ++c) g[r * cols + start + c] += self.grad[r * count + c];
    });
}

Tensor slice_rows(const Tensor& a, std::size_t start, std::size_t count) {
    const std::size_t rows = a.rows(), cols = a.cols();
    if (start + count > rows)
        throw ShapeError("slice_rows: range [" + std::to_string(start) + "," + std::to_string(start + count) +
                         ") outside " + shape_str(a.shape()));
    auto v = a.values();
    std::vector<double> out(v.begin() + static_cast<std::ptrdiff_t>(start * cols),
                            v.begin() + static_cast<std::ptrdiff_t>((start + count) * cols));
    return make_op(OpKind::SliceRows, Shape{count, cols}, std::move(out), {a}, [start, cols](Node& self) {
        auto& in = *self.inputs[0];
        if (!in.requires_grad) return;
        auto& g = in.grad_buffer();
        for (std::size_t i = 0; i < self.grad.size(); ++i) g[start * cols + i] += self.grad[i];
    });
}

Tensor reshape(const Tensor& a, Shape shape) {
    if (grad::numel(shape) != a.numel())
        throw ShapeError("reshape: " + shape_str(a.shape()) + " cannot become " + shape_str(shape));
    std::vector<double> out(a.values().begin(), a.values().end());
    return make_op(OpKind::Reshape, std::move(shape), std::move(out), {a}, [](Node& self) {
        auto& in = *self.inputs[0];
        if (!in.requires_grad) return;
        auto& g = in.grad_buffer();
        for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
    });
}

Tensor softmax(const Tensor& a, std::size_t groups) {
    const std::size_t width = group_width(a, groups, "softmax");
    std::vector<double> out(a.numel());
    block_softmax(a.values(), out, width);
    return make_op(OpKind::Softmax, a.shape(), std::move(out), {a}, [width](Node& self) {
        auto& in = *self.inputs[0];
        if (!in.requires_grad) return;
        softmax_jacobian_accumulate(self.value, self.grad, in.grad_buffer(), width);
    });
}

Tensor log_softmax(const Tensor& a, std::size_t groups) {
    const std::size_t width = group_width(a, groups, "log_softmax");
    auto in = a.values();
    std::vector<double> out(a.numel());
    for (std::size_t base = 0; base < in.size(); base += width) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < width; ++c) mx = std::max(mx, in[base + c]);
        double total = 0.0;
        for (std::size_t c = 0; c < width; ++c) total += std::exp(in[base + c] - mx);
        const double lse = mx + std::log(total);
        for (std::size_t c = 0; c < width; ++c) out[base + c] = in[base + c] - lse;
    }
    return make_op(OpKind::LogSoftmax, a.shape(), std::move(out), {a}, [width](Node& self) {
        auto& x = *self.inputs[0];
        if (!x.requires_grad) return;
        auto& gx = x.grad_buffer();
        for (std::size_t base = 0; base < self.value.size(); base += width) {
            double gsum = 0.0;
            for (std::size_t c = 0; c < width; ++c) gsum += self.grad[base + c];
            for (std::size_t c = 0; c < width; ++c)
                gx[base + c] += self.grad[base + c] - std::exp(self.value[base + c]) * gsum;
        }
    });
}

Tensor sum(const Tensor& a) {
    double total = 0.0;
    for (double v : a.values()) total += v;
    return make_op(OpKind::Sum, Shape{}, {total}, {a}, [](Node& self) {
        auto& x = *self.inputs[0];
        if (!x.requires_grad) return;
        auto& gx = x.grad_buffer();
        for (auto& g : gx) g += self.grad[0];
    });
}

Tensor mean(const Tensor& a) {
    double total = 0.0;
    for (double v : a.values()) total += v;
    const double n = static_cast<double>(a.numel());
    return make_op(OpKind::Mean, Shape{}, {total / n}, {a}, [n](Node& self) {
        auto& x = *self.inputs[0];
        if (!x.requires_grad) return;
        auto& gx = x.grad_buffer();
        for (auto& g : gx) g += self.grad[0] / n;
    });
}

Tensor sum_cols(const Tensor& a) {
    const std::size_t rows = a.rows(), cols = a.cols();
    auto v = a.values();
    std::vector<double> out(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) out[r] += v[r * cols + c];
    return make_op(OpKind::SumCols, Shape{rows, 1}, std::move(out), {a}, [cols](Node& self) {
        auto& x = *self.inputs[0];
        if (!x.requires_grad) return;
        auto& gx = x.grad_buffer();
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[i / cols];
    });
}

Tensor clamp_min(const Tensor& a, double lo) {
    return unary(OpKind::ClampMin, a, [lo](double x) { return x > lo ? x : lo; },
                 [lo](double x, double) { return x > lo ? 1.0 : 0.0; });
}

Tensor stop_gradient(const Tensor& a) {
    std::vector<double> out(a.values().begin(), a.values().end());
    return make_op(OpKind::StopGradient, a.shape(), std::move(out), {}, {});
}

Tensor straight_through_onehot(const Tensor& logits, std::size_t groups, Rng& rng) {
    return straight_through_impl(logits, groups, &rng);
}

Tensor straight_through_mode(const Tensor& logits, std::size_t groups) {
    return straight_through_impl(logits, groups, nullptr);
}

} // namespace pig::grad
