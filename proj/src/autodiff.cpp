#include "mnav/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "mnav/error.hpp"
#include "mnav/kernels.hpp"

namespace mnav::ad {

const char* op_name(Op op) {
    switch (op) {
        case Op::Leaf: return "leaf";
        case Op::Add: return "add";
        case Op::Sub: return "sub";
        case Op::Mul: return "mul";
        case Op::Div: return "div";
        case Op::Lerp: return "lerp";
        case Op::Scale: return "scale";
        case Op::ScaleBy: return "scale_by";
        case Op::Offset: return "offset";
        case Op::Neg: return "neg";
        case Op::Sin: return "sin";
        case Op::Cos: return "cos";
        case Op::Tanh: return "tanh";
        case Op::Exp: return "exp";
        case Op::Log: return "log";
        case Op::Sqrt: return "sqrt";
        case Op::Square: return "square";
        case Op::Abs: return "abs";
        case Op::Sign: return "sign";
        case Op::SmoothAbs: return "smooth_abs";
        case Op::MatMul: return "matmul";
        case Op::AddColVec: return "add_colvec";
        case Op::ConcatRows: return "concat_rows";
        case Op::GroupSum: return "group_sum";
        case Op::GroupMax: return "group_max";
        case Op::GroupTake: return "group_take";
        case Op::SumCols: return "sum_cols";
    }
    return "?";
}

Val Tape::push(Node n) {
    n.val = values_.size();
    n.adj = n.val;
    values_.resize(values_.size() + n.shape.size());
    if (n.op == Op::GroupMax) {
        n.aux = aux_.size();
        aux_.resize(aux_.size() + n.shape.size());
    }
    nodes_.push_back(n);
    const int id = static_cast<int>(nodes_.size()) - 1;
    eval_node(id);
    return {id};
}

Val Tape::leaf(Shape s, std::span<const double> vals, Role role) {
    if (static_cast<int>(vals.size()) != s.size())
        throw DomainError("tape: leaf size mismatch");
    Node n;
    n.op = Op::Leaf;
    n.shape = s;
    n.role = role;
    n.val = values_.size();
    n.adj = n.val;
    values_.insert(values_.end(), vals.begin(), vals.end());
    nodes_.push_back(n);
    return {static_cast<int>(nodes_.size()) - 1};
}

void Tape::set_leaf(Val leaf, std::span<const double> vals) {
    const Node& n = nodes_[leaf.id];
    if (n.op != Op::Leaf) throw DomainError("tape: set_leaf on a non-leaf");
    if (static_cast<int>(vals.size()) != n.shape.size())
        throw DomainError("tape: set_leaf size mismatch");
    std::memcpy(values_.data() + n.val, vals.data(), vals.size() * sizeof(double));
}

namespace {
Shape require_same(const Node& a, const Node& b, const char* what) {
    if (!(a.shape == b.shape)) throw DomainError(std::string("tape: shape mismatch in ") + what);
    return a.shape;
}
}  // namespace

Val Tape::add(Val a, Val b) { return push({Op::Add, require_same(nodes_[a.id], nodes_[b.id], "add"), a.id, b.id}); }
Val Tape::sub(Val a, Val b) { return push({Op::Sub, require_same(nodes_[a.id], nodes_[b.id], "sub"), a.id, b.id}); }
Val Tape::mul(Val a, Val b) { return push({Op::Mul, require_same(nodes_[a.id], nodes_[b.id], "mul"), a.id, b.id}); }
Val Tape::div(Val a, Val b) { return push({Op::Div, require_same(nodes_[a.id], nodes_[b.id], "div"), a.id, b.id}); }

Val Tape::lerp(Val t, Val u, Val v) {
    Shape s = require_same(nodes_[t.id], nodes_[u.id], "lerp");
    require_same(nodes_[u.id], nodes_[v.id], "lerp");
    Node n{Op::Lerp, s, t.id, u.id};
    n.c = v.id;
    return push(n);
}

Val Tape::scale(Val a, double k) {
    Node n{Op::Scale, nodes_[a.id].shape, a.id};
    n.k = k;
    return push(n);
}

Val Tape::scale_by(Val a, Val s) {
    if (nodes_[s.id].shape.size() != 1) throw DomainError("tape: scale_by needs a 1x1 scalar");
    return push({Op::ScaleBy, nodes_[a.id].shape, a.id, s.id});
}
Val Tape::offset(Val a, double k) {
    Node n{Op::Offset, nodes_[a.id].shape, a.id};
    n.k = k;
    return push(n);
}
Val Tape::neg(Val a) { return push({Op::Neg, nodes_[a.id].shape, a.id}); }
Val Tape::sin(Val a) { return push({Op::Sin, nodes_[a.id].shape, a.id}); }
Val Tape::cos(Val a) { return push({Op::Cos, nodes_[a.id].shape, a.id}); }
Val Tape::tanh(Val a) { return push({Op::Tanh, nodes_[a.id].shape, a.id}); }
Val Tape::exp(Val a) { return push({Op::Exp, nodes_[a.id].shape, a.id}); }
Val Tape::log(Val a) { return push({Op::Log, nodes_[a.id].shape, a.id}); }
Val Tape::sqrt(Val a) { return push({Op::Sqrt, nodes_[a.id].shape, a.id}); }
Val Tape::square(Val a) { return push({Op::Square, nodes_[a.id].shape, a.id}); }
Val Tape::abs(Val a) { return push({Op::Abs, nodes_[a.id].shape, a.id}); }
Val Tape::sign(Val a) { return push({Op::Sign, nodes_[a.id].shape, a.id}); }

Val Tape::smooth_abs(Val a, double eps) {
    Node n{Op::SmoothAbs, nodes_[a.id].shape, a.id};
    n.k = eps;
    return push(n);
}

Val Tape::matmul(Val a, Val b) {
    const Shape& sa = nodes_[a.id].shape;
    const Shape& sb = nodes_[b.id].shape;
    if (sa.cols != sb.rows) throw DomainError("tape: matmul inner dimension mismatch");
    return push({Op::MatMul, {sa.rows, sb.cols}, a.id, b.id});
}

Val Tape::add_colvec(Val a, Val v) {
    const Shape& sa = nodes_[a.id].shape;
    const Shape& sv = nodes_[v.id].shape;
    if (sv.rows != sa.rows || sv.cols != 1) throw DomainError("tape: add_colvec shape mismatch");
    return push({Op::AddColVec, sa, a.id, v.id});
}

Val Tape::concat_rows(Val a, Val b) {
    const Shape& sa = nodes_[a.id].shape;
    const Shape& sb = nodes_[b.id].shape;
    if (sa.cols != sb.cols) throw DomainError("tape: concat_rows column mismatch");
    return push({Op::ConcatRows, {sa.rows + sb.rows, sa.cols}, a.id, b.id});
}

Val Tape::group_sum(Val a, int group) {
    const Shape& sa = nodes_[a.id].shape;
    if (group < 1 || sa.rows % group != 0) throw DomainError("tape: bad group length");
    Node n{Op::GroupSum, {sa.rows / group, sa.cols}, a.id};
    n.group = group;
    return push(n);
}

Val Tape::group_max(Val a, int group) {
    const Shape& sa = nodes_[a.id].shape;
    if (group < 1 || sa.rows % group != 0) throw DomainError("tape: bad group length");
    Node n{Op::GroupMax, {sa.rows / group, sa.cols}, a.id};
    n.group = group;
    return push(n);
}

Val Tape::group_take(Val a, Val max_node) {
    const Node& ref = nodes_[max_node.id];
    if (ref.op != Op::GroupMax) throw DomainError("tape: group_take needs a GroupMax reference");
    if (!(nodes_[a.id].shape == nodes_[ref.a].shape))
        throw DomainError("tape: group_take shape mismatch");
    Node n{Op::GroupTake, ref.shape, a.id, max_node.id};
    n.group = ref.group;
    return push(n);
}

Val Tape::sum_cols(Val a) {
    const Shape& sa = nodes_[a.id].shape;
    return push({Op::SumCols, {sa.rows, 1}, a.id});
}

void Tape::eval_node(int i) {
    Node& n = nodes_[i];
    const int sz = n.shape.size();
    double* out = val_ptr(i);
    const double* A = n.a >= 0 ? val_ptr(n.a) : nullptr;
    const double* B = n.b >= 0 ? val_ptr(n.b) : nullptr;

    switch (n.op) {
        case Op::Leaf: break;
        case Op::Add: for (int j = 0; j < sz; ++j) out[j] = A[j] + B[j]; break;
        case Op::Sub: for (int j = 0; j < sz; ++j) out[j] = A[j] - B[j]; break;
        case Op::Mul: for (int j = 0; j < sz; ++j) out[j] = A[j] * B[j]; break;
        case Op::Div: for (int j = 0; j < sz; ++j) out[j] = A[j] / B[j]; break;
        case Op::Lerp: {
            const double* C = val_ptr(static_cast<int>(n.c));
            for (int j = 0; j < sz; ++j) out[j] = A[j] * B[j] + (1.0 - A[j]) * C[j];
            break;
        }
        case Op::Scale: for (int j = 0; j < sz; ++j) out[j] = A[j] * n.k; break;
        case Op::ScaleBy: {
            const double s = B[0];
            for (int j = 0; j < sz; ++j) out[j] = A[j] * s;
            break;
        }
        case Op::Offset: for (int j = 0; j < sz; ++j) out[j] = A[j] + n.k; break;
        case Op::Neg: for (int j = 0; j < sz; ++j) out[j] = -A[j]; break;
        case Op::Sin: for (int j = 0; j < sz; ++j) out[j] = std::sin(A[j]); break;
        case Op::Cos: for (int j = 0; j < sz; ++j) out[j] = std::cos(A[j]); break;
        case Op::Tanh: for (int j = 0; j < sz; ++j) out[j] = std::tanh(A[j]); break;
        case Op::Exp: for (int j = 0; j < sz; ++j) out[j] = std::exp(A[j]); break;
        case Op::Log: for (int j = 0; j < sz; ++j) out[j] = std::log(A[j]); break;
        case Op::Sqrt: for (int j = 0; j < sz; ++j) out[j] = std::sqrt(A[j]); break;
        case Op::Square: for (int j = 0; j < sz; ++j) out[j] = A[j] * A[j]; break;
        case Op::Abs: for (int j = 0; j < sz; ++j) out[j] = std::fabs(A[j]); break;
        case Op::Sign:
            for (int j = 0; j < sz; ++j) out[j] = A[j] > 0.0 ? 1.0 : (A[j] < 0.0 ? -1.0 : 0.0);
            break;
        case Op::SmoothAbs:
            for (int j = 0; j < sz; ++j) out[j] = std::sqrt(A[j] * A[j] + n.k * n.k);
            break;
        case Op::MatMul: {
            const Shape& sa = nodes_[n.a].shape;
            kernels::matmul_nn(A, B, out, sa.rows, sa.cols, n.shape.cols);
            break;
        }
        case Op::AddColVec: {
            const int m = n.shape.cols;
            for (int r = 0; r < n.shape.rows; ++r) {
                const double bias = B[r];
                for (int j = 0; j < m; ++j) out[static_cast<size_t>(r) * m + j] = A[static_cast<size_t>(r) * m + j] + bias;
            }
            break;
        }
        case Op::ConcatRows: {
            const int na = nodes_[n.a].shape.size();
            std::memcpy(out, A, static_cast<size_t>(na) * sizeof(double));
            std::memcpy(out + na, B, static_cast<size_t>(nodes_[n.b].shape.size()) * sizeof(double));
            break;
        }
        case Op::GroupSum: {
            const int m = n.shape.cols, g = n.group;
            for (int r = 0; r < n.shape.rows; ++r) {
                double* orow = out + static_cast<size_t>(r) * m;
                const double* arow = A + static_cast<size_t>(r) * g * m;
                for (int j = 0; j < m; ++j) orow[j] = arow[j];
                for (int l = 1; l < g; ++l) {
                    const double* al = arow + static_cast<size_t>(l) * m;
                    for (int j = 0; j < m; ++j) orow[j] += al[j];
                }
            }
            break;
        }
        case Op::GroupMax: {
            const int m = n.shape.cols, g = n.group;
            int32_t* arg = aux_.data() + n.aux;
            for (int r = 0; r < n.shape.rows; ++r) {
                double* orow = out + static_cast<size_t>(r) * m;
                int32_t* irow = arg + static_cast<size_t>(r) * m;
                const double* arow = A + static_cast<size_t>(r) * g * m;
                for (int j = 0; j < m; ++j) {
                    orow[j] = arow[j];
                    irow[j] = 0;
                }
                for (int l = 1; l < g; ++l) {
                    const double* al = arow + static_cast<size_t>(l) * m;
                    for (int j = 0; j < m; ++j) {
                        if (al[j] > orow[j]) {  // strict: ties keep the first index
                            orow[j] = al[j];
                            irow[j] = l;
                        }
                    }
                }
            }
            break;
        }
        case Op::GroupTake: {
            const Node& ref = nodes_[n.b];
            const int m = n.shape.cols, g = n.group;
            const int32_t* arg = aux_.data() + ref.aux;
            for (int r = 0; r < n.shape.rows; ++r) {
                const double* arow = A + static_cast<size_t>(r) * g * m;
                const int32_t* irow = arg + static_cast<size_t>(r) * m;
                double* orow = out + static_cast<size_t>(r) * m;
                for (int j = 0; j < m; ++j) orow[j] = arow[static_cast<size_t>(irow[j]) * m + j];
            }
            break;
        }
        case Op::SumCols: {
            const Shape& sa = nodes_[n.a].shape;
            for (int r = 0; r < sa.rows; ++r) {
                const double* arow = A + static_cast<size_t>(r) * sa.cols;
                double acc = 0.0;
                for (int j = 0; j < sa.cols; ++j) acc += arow[j];
                out[r] = acc;
            }
            break;
        }
    }
}

void Tape::forward() {
    for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) eval_node(i);
}

void Tape::forward_range(int from, int to) {
    for (int i = std::max(0, from); i < std::min(to, static_cast<int>(nodes_.size())); ++i)
        eval_node(i);
}

void Tape::adjoint_node(int i) {
    const Node& n = nodes_[i];
    if (n.op == Op::Leaf) return;
    const int sz = n.shape.size();
    const double* g = adjoints_.data() + n.adj;
    const double* out = val_ptr(i);
    const double* A = n.a >= 0 ? val_ptr(n.a) : nullptr;
    const double* B = n.b >= 0 ? val_ptr(n.b) : nullptr;
    double* ga = n.a >= 0 ? adj_ptr(n.a) : nullptr;
    double* gb = n.b >= 0 ? adj_ptr(n.b) : nullptr;

    switch (n.op) {
        case Op::Leaf: break;
        case Op::Add:
            for (int j = 0; j < sz; ++j) ga[j] += g[j];
            for (int j = 0; j < sz; ++j) gb[j] += g[j];
            break;
        case Op::Sub:
            for (int j = 0; j < sz; ++j) ga[j] += g[j];
            for (int j = 0; j < sz; ++j) gb[j] -= g[j];
            break;
        case Op::Mul:
            for (int j = 0; j < sz; ++j) ga[j] += g[j] * B[j];
            for (int j = 0; j < sz; ++j) gb[j] += g[j] * A[j];
            break;
        case Op::Div:
            for (int j = 0; j < sz; ++j) ga[j] += g[j] / B[j];
            for (int j = 0; j < sz; ++j) gb[j] -= g[j] * out[j] / B[j];
            break;
        case Op::Lerp: {
            const double* C = val_ptr(static_cast<int>(n.c));
            double* gc = adj_ptr(static_cast<int>(n.c));
            for (int j = 0; j < sz; ++j) ga[j] += g[j] * (B[j] - C[j]);
            for (int j = 0; j < sz; ++j) gb[j] += g[j] * A[j];
            for (int j = 0; j < sz; ++j) gc[j] += g[j] * (1.0 - A[j]);
            break;
        }
        case Op::Scale: for (int j = 0; j < sz; ++j) ga[j] += g[j] * n.k; break;
        case Op::ScaleBy: {
            const double s = B[0];
            double acc = 0.0;
            for (int j = 0; j < sz; ++j) ga[j] += g[j] * s;
            for (int j = 0; j < sz; ++j) acc += g[j] * A[j];
            gb[0] += acc;
            break;
        }
        case Op::Offset: for (int j = 0; j < sz; ++j) ga[j] += g[j]; break;
        case Op::Neg: for (int j = 0; j < sz; ++j) ga[j] -= g[j]; break;
        case Op::Sin: for (int j = 0; j < sz; ++j) ga[j] += g[j] * std::cos(A[j]); break;
        case Op::Cos: for (int j = 0; j < sz; ++j) ga[j] -= g[j] * std::sin(A[j]); break;
        case Op::Tanh: for (int j = 0; j < sz; ++j) ga[j] += g[j] * (1.0 - out[j] * out[j]); break;
        case Op::Exp: for (int j = 0; j < sz; ++j) ga[j] += g[j] * out[j]; break;
        case Op::Log: for (int j = 0; j < sz; ++j) ga[j] += g[j] / A[j]; break;
        case Op::Sqrt: for (int j = 0; j < sz; ++j) ga[j] += g[j] / (2.0 * out[j]); break;
        case Op::Square: for (int j = 0; j < sz; ++j) ga[j] += 2.0 * g[j] * A[j]; break;
        case Op::Abs:
            for (int j = 0; j < sz; ++j)
                ga[j] += A[j] > 0.0 ? g[j] : (A[j] < 0.0 ? -g[j] : 0.0);
            break;
        case Op::Sign: break;  // derivative zero everywhere it exists
        case Op::SmoothAbs:
            for (int j = 0; j < sz; ++j) ga[j] += g[j] * A[j] / out[j];
            break;
        case Op::MatMul: {
            const Shape& sa = nodes_[n.a].shape;
            const int m = n.shape.cols;
            kernels::matmul_nt_acc(g, B, ga, sa.rows, sa.cols, m, scratch_);
            kernels::matmul_tn_acc(A, g, gb, sa.rows, sa.cols, m);
            break;
        }
        case Op::AddColVec: {
            const int m = n.shape.cols;
            for (int j = 0; j < sz; ++j) ga[j] += g[j];
            for (int r = 0; r < n.shape.rows; ++r) {
                double acc = 0.0;
                const double* grow = g + static_cast<size_t>(r) * m;
                for (int j = 0; j < m; ++j) acc += grow[j];
                gb[r] += acc;
            }
            break;
        }
        case Op::ConcatRows: {
            const int na = nodes_[n.a].shape.size();
            const int nb = nodes_[n.b].shape.size();
            for (int j = 0; j < na; ++j) ga[j] += g[j];
            for (int j = 0; j < nb; ++j) gb[j] += g[na + j];
            break;
        }
        case Op::GroupSum: {
            const int m = n.shape.cols, gl = n.group;
            for (int r = 0; r < n.shape.rows; ++r) {
                const double* grow = g + static_cast<size_t>(r) * m;
                double* arow = ga + static_cast<size_t>(r) * gl * m;
                for (int l = 0; l < gl; ++l) {
                    double* al = arow + static_cast<size_t>(l) * m;
                    for (int j = 0; j < m; ++j) al[j] += grow[j];
                }
            }
            break;
        }
        case Op::GroupMax: {
            const int m = n.shape.cols, gl = n.group;
            const int32_t* arg = aux_.data() + n.aux;
            for (int r = 0; r < n.shape.rows; ++r) {
                const double* grow = g + static_cast<size_t>(r) * m;
                const int32_t* irow = arg + static_cast<size_t>(r) * m;
                double* arow = ga + static_cast<size_t>(r) * gl * m;
                for (int j = 0; j < m; ++j)
                    arow[static_cast<size_t>(irow[j]) * m + j] += grow[j];
            }
            break;
        }
        case Op::GroupTake: {
            const Node& ref = nodes_[n.b];
            const int m = n.shape.cols, gl = n.group;
            const int32_t* arg = aux_.data() + ref.aux;
            for (int r = 0; r < n.shape.rows; ++r) {
                const double* grow = g + static_cast<size_t>(r) * m;
                const int32_t* irow = arg + static_cast<size_t>(r) * m;
                double* arow = ga + static_cast<size_t>(r) * gl * m;
                for (int j = 0; j < m; ++j)
                    arow[static_cast<size_t>(irow[j]) * m + j] += grow[j];
            }
            break;
        }
        case Op::SumCols: {
            const Shape& sa = nodes_[n.a].shape;
            for (int r = 0; r < sa.rows; ++r) {
                const double gr = g[r];
                double* arow = ga + static_cast<size_t>(r) * sa.cols;
                for (int j = 0; j < sa.cols; ++j) arow[j] += gr;
            }
            break;
        }
    }
}

void Tape::reverse(Val root) {
    const Node& r = nodes_[root.id];
    if (r.shape.size() != 1) throw DomainError("tape: reverse needs a scalar root");
    adjoints_.assign(values_.size(), 0.0);
    adjoints_[r.adj] = 1.0;
    for (int i = root.id; i >= 0; --i) adjoint_node(i);
}

std::span<const double> Tape::values(Val v) const {
    const Node& n = nodes_[v.id];
    return {values_.data() + n.val, static_cast<size_t>(n.shape.size())};
}

std::span<const double> Tape::adjoints(Val v) const {
    const Node& n = nodes_[v.id];
    return {adjoints_.data() + n.adj, static_cast<size_t>(n.shape.size())};
}

int Tape::first_nonfinite() const {
    for (size_t i = 0; i < nodes_.size(); ++i) {
        const Node& n = nodes_[i];
        const double* v = values_.data() + n.val;
        for (int j = 0; j < n.shape.size(); ++j)
            if (!std::isfinite(v[j])) return static_cast<int>(i);
    }
    return -1;
}

void Tape::check_finite() const {
    const int bad = first_nonfinite();
    if (bad >= 0)
        throw NumericError("tape: non-finite value at node " + std::to_string(bad) + " (" +
                           op_name(nodes_[bad].op) + ")");
}

bool Tape::adjoints_finite() const {
    for (double a : adjoints_)
        if (!std::isfinite(a)) return false;
    return true;
}

Val pnorm16_rows(Tape& t, Val delta, int group, double eps) {
    Val p2 = t.square(delta);
    Val p4 = t.square(p2);
    Val p8 = t.square(p4);
    Val p16 = t.square(p8);
    Val s = t.offset(t.group_sum(p16, group), eps);
    Val r = t.sqrt(t.sqrt(t.sqrt(t.sqrt(s))));
    return r;
}

void evaluate(Tape& tape) {
    tape.forward();
    tape.check_finite();
}

std::span<const double> input_gradient(Tape& tape, Val root, Val input) {
    tape.reverse(root);
    return tape.adjoints(input);
}

}  // namespace mnav::ad
