#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pig::grad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class OpKind : std::uint8_t {
    Leaf,
    Add,
    Sub,
    Mul,
    Scale,
    AddScalar,
    MatMul,
    Affine,
    Tanh,
    Sigmoid,
    Elu,
    Exp,
    Log,
    Square,
    Softplus,
    Concat,
    ConcatRows,
    SliceCols,
    SliceRows,
    Softmax,
    LogSoftmax,
    Sum,
    Mean,
    SumCols,
    ClampMin,
    StopGradient,
    StraightThrough,
    Reshape,
};

const char* op_name(OpKind kind);

struct Node;
using NodePtr = std::shared_ptr<Node>;

// Graph node. Inputs are held by shared ownership, so a result keeps its whole
// history alive until it is dropped; there are no back-references and the
// graph cannot form cycles.
struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    bool requires_grad = false;
    OpKind kind = OpKind::Leaf;
    std::vector<NodePtr> inputs;
    std::function<void(Node&)> backward;

    std::vector<double>& grad_buffer() {
        if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
        return grad;
    }
};

// Value-semantics handle to a node. Copies share the node.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(NodePtr node) : node_(std::move(node)) {}

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const { return static_cast<bool>(node_); }
    const Shape& shape() const { return node_->shape; }
    std::size_t numel() const { return node_->value.size(); }
    // Leading dimensions flattened; the last dimension is the feature axis.
    std::size_t rows() const;
    std::size_t cols() const;

    std::span<const double> values() const { return node_->value; }
    std::span<double> mutable_values() { return node_->value; }
    double item() const;
    double at(std::size_t r, std::size_t c) const { return node_->value[r * cols() + c]; }

    bool requires_grad() const { return node_->requires_grad; }
    void set_requires_grad(bool flag);

    bool has_grad() const { return node_->grad.size() == node_->value.size(); }
    std::span<const double> grad() const { return node_->grad; }
    std::span<double> mutable_grad() { return node_->grad_buffer(); }
    void zero_grad();

    OpKind kind() const { return node_->kind; }
    const NodePtr& node() const { return node_; }

    // Fresh leaf holding a copy of the values, no history.
    Tensor clone_detached() const;

private:
    NodePtr node_;
};

// Topologically ordered list of the differentiable nodes reachable from a
// root; inputs always precede the nodes that consume them.
struct ComputationRecord {
    std::vector<const Node*> order;
};

ComputationRecord build_record(const Tensor& root);

// Reverse-mode sweep from a scalar loss. Leaf gradients accumulate; gradients
// of interior nodes are reset first, so calling it twice on the same graph
// adds the leaf gradients twice and nothing else.
void backward(const Tensor& loss);

// Helper used by op implementations.
Tensor make_op(OpKind kind, Shape shape, std::vector<double> value, std::vector<Tensor> inputs,
               std::function<void(Node&)> backward_fn);

} // namespace pig::grad
