#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mnav/geometry.hpp"

namespace mnav::ad {

// Reverse-mode tape over dense row-major matrix buffers. Nodes are evaluated
// eagerly as they are built, forward() replays the whole tape bit-identically,
// and reverse() accumulates adjoints for every node in one backward sweep.
//
// Second-order structure (parameter gradients of losses that contain input
// gradients) is obtained by building forward-mode tangent chains out of these
// same primitives, so a single reverse sweep differentiates through them.

enum class Op : uint8_t {
    Leaf,
    Add, Sub, Mul, Div, Lerp,
    Scale, ScaleBy, Offset, Neg,
    Sin, Cos, Tanh, Exp, Log, Sqrt, Square,
    Abs,        // exact; derivative 0 at 0
    Sign,       // -1/0/+1; zero derivative
    SmoothAbs,  // sqrt(x^2 + eps^2)
    MatMul,     // (r x k) * (k x m)
    AddColVec,  // matrix + column vector broadcast over columns
    ConcatRows,
    GroupSum,   // sum over groups of `group` consecutive rows
    GroupMax,   // max over groups; gradient to the first argmax
    GroupTake,  // gather rows at another GroupMax node's argmax indices
    SumCols,    // (r x m) -> (r x 1)
};

const char* op_name(Op op);

struct Shape {
    int rows = 0, cols = 0;
    int size() const { return rows * cols; }
    bool operator==(const Shape&) const = default;
};

struct Val {
    int32_t id = -1;
    bool valid() const { return id >= 0; }
};

enum class Role : uint8_t { Plain = 0, Input = 1, Param = 2 };

struct Node {
    Op op = Op::Leaf;
    Shape shape;
    int32_t a = -1, b = -1, c = -1;  // operand ids
    double k = 0.0;                  // scalar constant
    int32_t group = 0;
    size_t val = 0;   // value arena offset
    size_t adj = 0;   // adjoint arena offset
    size_t aux = 0;   // int arena offset (argmax indices)
    Role role = Role::Plain;
};

class Tape {
public:
    Val leaf(Shape s, std::span<const double> vals, Role role = Role::Plain);
    Val constant(Shape s, std::span<const double> vals) { return leaf(s, vals, Role::Plain); }
    Val scalar(double v) { return leaf({1, 1}, std::span<const double>(&v, 1)); }

    Val add(Val a, Val b);
    Val sub(Val a, Val b);
    Val mul(Val a, Val b);
    Val div(Val a, Val b);
    /// t*u + (1-t)*v elementwise.
    Val lerp(Val t, Val u, Val v);
    Val scale(Val a, double k);
    /// Elementwise product with a (1 x 1) node (broadcast scalar).
    Val scale_by(Val a, Val s);
    Val offset(Val a, double k);
    Val neg(Val a);
    Val sin(Val a);
    Val cos(Val a);
    Val tanh(Val a);
    Val exp(Val a);
    Val log(Val a);
    Val sqrt(Val a);
    Val square(Val a);
    Val abs(Val a);
    Val sign(Val a);
    Val smooth_abs(Val a, double eps);
    Val matmul(Val a, Val b);
    Val add_colvec(Val a, Val v);
    Val concat_rows(Val a, Val b);
    Val group_sum(Val a, int group);
    Val group_max(Val a, int group);
    /// Forward-mode companion of group_max: picks a's rows at the argmax
    /// indices recorded by the referenced GroupMax node.
    Val group_take(Val a, Val max_node);
    Val sum_cols(Val a);

    /// Replay every node from current leaf values.
    void forward();
    /// Replay nodes with ids in [from, to).
    void forward_range(int from, int to);
    /// Zero adjoints, seed the scalar root with 1, sweep backward.
    void reverse(Val root);

    void set_leaf(Val leaf, std::span<const double> vals);
    std::span<const double> values(Val v) const;
    std::span<const double> adjoints(Val v) const;
    double value_scalar(Val v) const { return values(v)[0]; }
    Shape shape(Val v) const { return nodes_[v.id].shape; }

    const std::vector<Node>& nodes() const { return nodes_; }
    size_t node_count() const { return nodes_.size(); }

    /// Index of the first node holding a non-finite value, or -1.
    int first_nonfinite() const;
    /// Throws NumericError naming the offending node if any value is non-finite.
    void check_finite() const;
    /// Same check over adjoint buffers (used by the training NaN guard).
    bool adjoints_finite() const;

private:
    Val push(Node n);
    void eval_node(int i);
    void adjoint_node(int i);
    double* val_ptr(int i) { return values_.data() + nodes_[i].val; }
    const double* val_ptr(int i) const { return values_.data() + nodes_[i].val; }
    double* adj_ptr(int i) { return adjoints_.data() + nodes_[i].adj; }

    std::vector<Node> nodes_;
    std::vector<double> values_;
    std::vector<double> adjoints_;
    std::vector<int32_t> aux_;
    std::vector<double> scratch_;
};

/// Smooth surrogate for max_j |x_ij| over groups of `group` rows: the even
/// p-norm (p = 16) with a tiny floor keeping the root differentiable at 0.
/// This is the max-smooth composite the metric head trains with.
Val pnorm16_rows(Tape& t, Val delta, int group, double eps = 1e-240);

/// Spec-level convenience wrappers.
void evaluate(Tape& tape);
std::span<const double> input_gradient(Tape& tape, Val root, Val input);

}  // namespace mnav::ad
