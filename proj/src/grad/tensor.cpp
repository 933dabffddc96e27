#include "pig/grad/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

namespace pig::grad {

std::size_t numel(const Shape& shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream out;
    out << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out << ',';
        out << shape[i];
    }
    out << ']';
    return out.str();
}

const char* op_name(OpKind kind) {
    switch (kind) {
    case OpKind::Leaf: return "leaf";
    case OpKind::Add: return "add";
    case OpKind::Sub: return "sub";
    case OpKind::Mul: return "mul";
    case OpKind::Scale: return "scale";
    case OpKind::AddScalar: return "add_scalar";
    case OpKind::MatMul: return "matmul";
    case OpKind::Affine: return "affine";
    case OpKind::Tanh: return "tanh";
    case OpKind::Sigmoid: return "sigmoid";
    case OpKind::Elu: return "elu";
    case OpKind::Exp: return "exp";
    case OpKind::Log: return "log";
    case OpKind::Square: return "square";
    case OpKind::Softplus: return "softplus";
    case OpKind::Concat: return "concat";
    case OpKind::ConcatRows: return "concat_rows";
    case OpKind::SliceCols: return "slice_cols";
    case OpKind::SliceRows: return "slice_rows";
    case OpKind::Softmax: return "softmax";
    case OpKind::LogSoftmax: return "log_softmax";
    case OpKind::Sum: return "sum";
    case OpKind::Mean: return "mean";
    case OpKind::SumCols: return "sum_cols";
    case OpKind::ClampMin: return "clamp_min";
    case OpKind::StopGradient: return "stop_gradient";
    case OpKind::StraightThrough: return "straight_through";
    case OpKind::Reshape: return "reshape";
    }
    return "?";
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    auto node = std::make_shared<Node>();
    node->value.assign(grad::numel(shape), value);
    node->shape = std::move(shape);
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
    if (grad::numel(shape) != values.size())
        throw ShapeError("tensor: shape " + shape_str(shape) + " does not hold " +
                         std::to_string(values.size()) + " values");
    auto node = std::make_shared<Node>();
    node->shape = std::move(shape);
    node->value = std::move(values);
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value, bool requires_grad) { return from({}, {value}, requires_grad); }

std::size_t Tensor::rows() const {
    const auto& s = shape();
    if (s.size() <= 1) return 1;
    std::size_t r = 1;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) r *= s[i];
    return r;
}

std::size_t Tensor::cols() const {
    const auto& s = shape();
    return s.empty() ? 1 : s.back();
}

double Tensor::item() const {
    if (numel() != 1) throw ShapeError("item: tensor of shape " + shape_str(shape()) + " is not a scalar");
    return node_->value[0];
}

void Tensor::set_requires_grad(bool flag) {
    if (node_->kind != OpKind::Leaf) throw std::logic_error("set_requires_grad: only leaves can be toggled");
    node_->requires_grad = flag;
}

void Tensor::zero_grad() {
    if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::clone_detached() const { return from(shape(), node_->value, false); }

Tensor make_op(OpKind kind, Shape shape, std::vector<double> value, std::vector<Tensor> inputs,
               std::function<void(Node&)> backward_fn) {
    auto node = std::make_shared<Node>();
    node->kind = kind;
    node->shape = std::move(shape);
    node->value = std::move(value);
    bool any = false;
    for (const auto& t : inputs) any = any || t.requires_grad();
    if (any) {
        node->requires_grad = true;
        node->inputs.reserve(inputs.size());
        for (auto& t : inputs) node->inputs.push_back(t.node());
        node->backward = std::move(backward_fn);
    }
    return Tensor(std::move(node));
}

ComputationRecord build_record(const Tensor& root) {
    ComputationRecord record;
    if (!root.requires_grad()) return record;
    std::unordered_set<const Node*> visited;
    // iterative post-order DFS
    std::vector<std::pair<const Node*, std::size_t>> stack;
    stack.emplace_back(root.node().get(), 0);
    visited.insert(root.node().get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->inputs.size()) {
            const Node* child = node->inputs[next++].get();
            if (child->requires_grad && visited.insert(child).second) stack.emplace_back(child, 0);
        } else {
            record.order.push_back(node);
            stack.pop_back();
        }
    }
    return record;
}

void backward(const Tensor& loss) {
    if (loss.numel() != 1)
        throw ShapeError("backward: loss must be a scalar, got shape " + shape_str(loss.shape()));
    if (!loss.requires_grad()) return;
    auto record = build_record(loss);
    for (const Node* n : record.order) {
        auto* node = const_cast<Node*>(n);
        if (node->kind != OpKind::Leaf) node->grad.assign(node->value.size(), 0.0);
    }
    auto* root = const_cast<Node*>(record.order.back());
    root->grad_buffer()[0] += 1.0;
    for (auto it = record.order.rbegin(); it != record.order.rend(); ++it) {
        auto* node = const_cast<Node*>(*it);
        if (node->kind == OpKind::Leaf || !node->backward) continue;
        node->backward(*node);
    }
    // interior buffers are no longer needed
    for (const Node* n : record.order) {
        auto* node = const_cast<Node*>(n);
        if (node->kind != OpKind::Leaf) {
            node->grad.clear();
            node->grad.shrink_to_fit();
        }
    }
}

} // namespace pig::grad
