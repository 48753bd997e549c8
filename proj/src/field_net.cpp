#include "mnav/field_net.hpp"

#include <cmath>
#include <cstring>

#include "mnav/error.hpp"
#include "mnav/kernels.hpp"
#include "mnav/rng.hpp"

namespace mnav {

namespace {
constexpr double kPnormEps = 1e-240;
constexpr double kConeFreq = 0.02;  // near-DC probe frequency (cycles per unit)
constexpr double kDegenerateGrad = 1e-12;
}  // namespace

void NetConfig::validate() const {
    if (n_fourier < 1 || hidden_width < 1 || n_blocks < 1 || a < 1 || b < 1)
        throw DomainError("net config: all counts must be >= 1");
    if (fourier_scale <= 0.0) throw DomainError("net config: fourier_scale must be positive");
}

Subnetwork::Subnetwork(int id, const NetConfig& cfg, const BBox& box, double d_max)
    : id_(id), config_(cfg), d_max_(d_max) {
    cfg.validate();
    if (d_max <= 0.0) throw DomainError("subnetwork: d_max must be positive");
    set_bbox(box);

    const int F = cfg.n_fourier, W = cfg.hidden_width, AB = cfg.latent_size();
    auto tensor = [this](const char* name, int rows, int cols) {
        size_t off = layout_.empty() ? 0 : layout_.back().offset + layout_.back().size();
        layout_.push_back({name, off, rows, cols});
    };
    tensor("wu", W, 2 * F);
    tensor("bu", W, 1);
    tensor("wv", W, 2 * F);
    tensor("bv", W, 1);
    tensor("wp", W, 2 * F);
    tensor("bp", W, 1);
    for (int l = 0; l < cfg.n_blocks; ++l) {
        const std::string p = "blk" + std::to_string(l) + ".";
        tensor((p + "w1").c_str(), W, W);
        tensor((p + "b1").c_str(), W, 1);
        tensor((p + "w2").c_str(), W, W);
        tensor((p + "b2").c_str(), W, 1);
        tensor((p + "alpha").c_str(), 1, 1);
    }
    tensor("wout", AB, W);
    tensor("bout", AB, 1);

    Rng rng(cfg.seed);
    B_.resize(static_cast<size_t>(F) * 2);
    // Per-row scales spread log-uniformly below fourier_scale: the field
    // needs near-DC rows for the long-range cone and fast rows for the
    // boundary layer near obstacles. The first `a` rows are near-DC probes
    // in evenly spread directions; together with the head init below they
    // realize a distance cone at startup, the free-space Eikonal solution.
    const int n_cone = std::min(cfg.a, F);
    for (int r = 0; r < F; ++r) {
        if (r < n_cone) {
            const double ang = M_PI * (r + 0.5) / n_cone;
            B_[static_cast<size_t>(r) * 2] = kConeFreq * std::cos(ang);
            B_[static_cast<size_t>(r) * 2 + 1] = kConeFreq * std::sin(ang);
            continue;
        }
        const double row_scale =
            cfg.fourier_scale * std::exp(-std::log(16.0) * rng.uniform());
        B_[static_cast<size_t>(r) * 2] = rng.normal() * row_scale;
        B_[static_cast<size_t>(r) * 2 + 1] = rng.normal() * row_scale;
    }

    params_.assign(layout_.back().offset + layout_.back().size(), 0.0);
    for (const TensorRef& t : layout_) {
        if (t.cols == 1) continue;  // biases and alphas start at zero
        const double limit = std::sqrt(6.0 / (t.rows + t.cols));
        for (int i = 0; i < t.size(); ++i) params_[t.offset + i] = rng.uniform(-limit, limit);
    }
    // Head init: wp passes the cone rows through, wout routes cone row r to
    // latent (r, 0) and keeps the random remainder small, so the fresh field
    // is an isotropic distance cone the training only has to bend.
    {
        const int W = cfg.hidden_width;
        auto ref = [this](const char* name) -> TensorRef& {
            for (auto& t : layout_)
                if (t.name == name) return t;
            throw DomainError("subnetwork: missing tensor");
        };
        TensorRef& wp = ref("wp");
        for (int i = 0; i < wp.size(); ++i) params_[wp.offset + i] *= 0.1;
        for (int r = 0; r < std::min(n_cone, W); ++r)
            params_[wp.offset + static_cast<size_t>(r) * wp.cols + r] = 1.0;
        TensorRef& wout = ref("wout");
        for (int i = 0; i < wout.size(); ++i) params_[wout.offset + i] *= 0.02;
        for (int r = 0; r < std::min(n_cone, W); ++r)
            params_[wout.offset + static_cast<size_t>(r) * cfg.b * wout.cols + r] = 1.0;
    }

    // Calibrate the head so the fresh field starts near unit speed: the raw
    // Fourier frequencies make ||grad T|| orders of magnitude too steep, and
    // the Eikonal targets want it O(1). T is linear in the head, so one
    // rescale lands on the probe average exactly.
    EncodeWorkspace ws;
    const Vec2 half = normalized_half_extents();
    double acc = 0.0;
    int n = 0;
    for (int probe = 0; probe < 16; ++probe) {
        const Vec2 a = denormalize(*this, {rng.uniform(-0.8 * half.x, 0.8 * half.x),
                                           rng.uniform(-0.8 * half.y, 0.8 * half.y)});
        const Vec2 b = denormalize(*this, {rng.uniform(-0.8 * half.x, 0.8 * half.x),
                                           rng.uniform(-0.8 * half.y, 0.8 * half.y)});
        SpeedQuery sq;
        if (try_speed_query(*this, a, b, sq, ws)) {
            acc += 0.5 * (1.0 / sq.speed_s + 1.0 / sq.speed_g);
            ++n;
        }
    }
    if (n > 0 && acc > 1e-9) {
        const double gain = n / acc;
        for (const TensorRef& t : layout_) {
            if (t.name == "wout" || t.name == "bout")
                for (int i = 0; i < t.size(); ++i) params_[t.offset + i] *= gain;
        }
    }
}

void Subnetwork::set_bbox(const BBox& box) {
    if (box.width() <= 0.0 || box.height() <= 0.0)
        throw DomainError("subnetwork: degenerate bounding box");
    bbox_ = box;
    scale_ = box.max_side();
}

void Subnetwork::restore(std::vector<double> B, std::vector<double> params, uint64_t steps) {
    if (B.size() != B_.size() || params.size() != params_.size())
        throw DomainError("subnetwork: restored arrays do not match the config");
    B_ = std::move(B);
    params_ = std::move(params);
    train_steps_ = steps;
}

Vec2 normalize(const Subnetwork& net, Vec2 q) {
    if (!net.bbox().contains(q, 1e-9))
        throw DomainError("normalize: point outside the subnetwork bounding box");
    const Vec2 c = net.bbox().center();
    return {(q.x - c.x) / net.scale(), (q.y - c.y) / net.scale()};
}

Vec2 denormalize(const Subnetwork& net, Vec2 q_star) {
    const Vec2 c = net.bbox().center();
    return {q_star.x * net.scale() + c.x, q_star.y * net.scale() + c.y};
}

double metric_exact(std::span<const double> x, std::span<const double> y, int a, int b) {
    if (x.size() != y.size() || static_cast<int>(x.size()) != a * b)
        throw DomainError("metric: shape mismatch");
    double total = 0.0;
    for (int i = 0; i < a; ++i) {
        double best = 0.0;
        for (int j = 0; j < b; ++j) {
            const double d = std::fabs(x[static_cast<size_t>(i) * b + j] - y[static_cast<size_t>(i) * b + j]);
            if (d > best) best = d;
        }
        total += best;
    }
    return total;
}

// ---------------------------------------------------------------------------
// plain batched evaluation

namespace {

struct Cols {
    int n_pts, per_pt;  // 1 or 3 columns per point
    int total() const { return n_pts * per_pt; }
};

const double* tensor_ptr(const Subnetwork& net, int idx) {
    return net.parameters().data() + net.layout()[idx].offset;
}

// y = tanh(W x + bias), bias applied to primal columns, tangent columns get
// the chain-rule factor 1 - y^2.
void dense_tanh(const Subnetwork& net, int wi, int bi, const std::vector<double>& in, int in_rows,
                Cols cols, std::vector<double>& out) {
    const auto& wt = net.layout()[wi];
    out.resize(static_cast<size_t>(wt.rows) * cols.total());
    kernels::matmul_nn(tensor_ptr(net, wi), in.data(), out.data(), wt.rows, in_rows, cols.total());
    const double* bias = tensor_ptr(net, bi);
    const int m = cols.total();
    for (int r = 0; r < wt.rows; ++r) {
        double* row = out.data() + static_cast<size_t>(r) * m;
        for (int p = 0; p < cols.n_pts; ++p) {
            double* cell = row + static_cast<size_t>(p) * cols.per_pt;
            const double y = std::tanh(cell[0] + bias[r]);
            cell[0] = y;
            const double d = 1.0 - y * y;
            for (int t = 1; t < cols.per_pt; ++t) cell[t] *= d;
        }
    }
}

}  // namespace

void encode_columns(const Subnetwork& net, std::span<const Vec2> points, bool with_jets,
                    std::vector<double>& latents, EncodeWorkspace& ws) {
    const NetConfig& cfg = net.config();
    const Cols cols{static_cast<int>(points.size()), with_jets ? 3 : 1};
    const int m = cols.total();
    const int F = cfg.n_fourier, W = cfg.hidden_width;

    // input matrix (2 x m): per point, [q*, e_x, e_y] columns
    std::vector<double>& X = ws.bufs[0];
    X.assign(static_cast<size_t>(2) * m, 0.0);
    for (int p = 0; p < cols.n_pts; ++p) {
        const int c = p * cols.per_pt;
        X[c] = points[p].x;
        X[static_cast<size_t>(m) + c] = points[p].y;
        if (with_jets) {
            X[c + 1] = 1.0;
            X[static_cast<size_t>(m) + c + 2] = 1.0;
        }
    }

    // Fourier features: gamma = [sin(2 pi B q*); cos(2 pi B q*)]  (2F x m)
    std::vector<double>& Z = ws.bufs[1];
    Z.resize(static_cast<size_t>(F) * m);
    kernels::matmul_nn(net.fourier_matrix().data(), X.data(), Z.data(), F, 2, m);
    std::vector<double>& gamma = ws.bufs[2];
    gamma.resize(static_cast<size_t>(2 * F) * m);
    for (int r = 0; r < F; ++r) {
        const double* zr = Z.data() + static_cast<size_t>(r) * m;
        double* srow = gamma.data() + static_cast<size_t>(r) * m;
        double* crow = gamma.data() + static_cast<size_t>(F + r) * m;
        for (int p = 0; p < cols.n_pts; ++p) {
            const int c = p * cols.per_pt;
            const double ang = 2.0 * M_PI * zr[c];
            const double sv = std::sin(ang), cv = std::cos(ang);
            srow[c] = sv;
            crow[c] = cv;
            for (int t = 1; t < cols.per_pt; ++t) {
                const double zt = 2.0 * M_PI * zr[c + t];
                srow[c + t] = zt * cv;
                crow[c + t] = -(zt * sv);
            }
        }
    }

    std::vector<double> U, V, h;
    dense_tanh(net, 0, 1, gamma, 2 * F, cols, U);
    dense_tanh(net, 2, 3, gamma, 2 * F, cols, V);

    // input projection (linear)
    h.resize(static_cast<size_t>(W) * m);
    kernels::matmul_nn(tensor_ptr(net, 4), gamma.data(), h.data(), W, 2 * F, m);
    {
        const double* bias = tensor_ptr(net, 5);
        for (int r = 0; r < W; ++r) {
            double* row = h.data() + static_cast<size_t>(r) * m;
            for (int p = 0; p < cols.n_pts; ++p) row[static_cast<size_t>(p) * cols.per_pt] += bias[r];
        }
    }

    std::vector<double>& t1 = ws.bufs[3];
    std::vector<double> z1, t2, z2;
    auto lerp_rows = [&](const std::vector<double>& gate, std::vector<double>& out_buf) {
        out_buf.resize(static_cast<size_t>(W) * m);
        for (int r = 0; r < W; ++r) {
            const double* gr = gate.data() + static_cast<size_t>(r) * m;
            const double* ur = U.data() + static_cast<size_t>(r) * m;
            const double* vr = V.data() + static_cast<size_t>(r) * m;
            double* outr = out_buf.data() + static_cast<size_t>(r) * m;
            for (int p = 0; p < cols.n_pts; ++p) {
                const int c = p * cols.per_pt;
                const double tv = gr[c], uv = ur[c], vv = vr[c];
                outr[c] = tv * uv + (1.0 - tv) * vv;
                for (int t = 1; t < cols.per_pt; ++t)
                    outr[c + t] = gr[c + t] * (uv - vv) + (tv * ur[c + t] + (1.0 - tv) * vr[c + t]);
            }
        }
    };

    for (int l = 0; l < cfg.n_blocks; ++l) {
        const int base = 6 + l * 5;
        dense_tanh(net, base, base + 1, h, W, cols, t1);
        lerp_rows(t1, z1);
        dense_tanh(net, base + 2, base + 3, z1, W, cols, t2);
        lerp_rows(t2, z2);
        const double alpha = net.parameters()[net.layout()[base + 4].offset];
        const double keep = 1.0 - alpha;
        for (size_t j = 0; j < h.size(); ++j) h[j] = alpha * z2[j] + keep * h[j];
    }

    const int out_idx = 6 + cfg.n_blocks * 5;
    const auto& wt = net.layout()[out_idx];
    latents.resize(static_cast<size_t>(wt.rows) * m);
    kernels::matmul_nn(tensor_ptr(net, out_idx), h.data(), latents.data(), wt.rows, W, m);
    const double* bias = tensor_ptr(net, out_idx + 1);
    for (int r = 0; r < wt.rows; ++r) {
        double* row = latents.data() + static_cast<size_t>(r) * m;
        for (int p = 0; p < cols.n_pts; ++p) row[static_cast<size_t>(p) * cols.per_pt] += bias[r];
    }
}

std::vector<double> encode(const Subnetwork& net, Vec2 q_star) {
    EncodeWorkspace ws;
    std::vector<double> lat;
    const Vec2 pts[1] = {q_star};
    encode_columns(net, pts, false, lat, ws);
    return lat;
}

double travel_time(const Subnetwork& net, Vec2 q_s, Vec2 q_g) {
    const Vec2 a = normalize(net, q_s), b = normalize(net, q_g);
    EncodeWorkspace ws;
    std::vector<double> lat;
    const Vec2 pts[2] = {a, b};
    encode_columns(net, pts, false, lat, ws);
    // columns 0 and 1 hold the two latents
    const int ab = net.config().latent_size();
    std::vector<double> xs(ab), ys(ab);
    for (int r = 0; r < ab; ++r) {
        xs[r] = lat[static_cast<size_t>(r) * 2];
        ys[r] = lat[static_cast<size_t>(r) * 2 + 1];
    }
    return net.time_scale() * metric_exact(xs, ys, net.config().a, net.config().b);
}

double travel_time_train_normalized(const Subnetwork& net, Vec2 q_s, Vec2 q_g) {
    const Vec2 a = normalize(net, q_s), b = normalize(net, q_g);
    EncodeWorkspace ws;
    std::vector<double> lat;
    const Vec2 pts[2] = {a, b};
    encode_columns(net, pts, false, lat, ws);
    const NetConfig& cfg = net.config();
    double total = 0.0;
    for (int i = 0; i < cfg.a; ++i) {
        double s = 0.0;
        for (int j = 0; j < cfg.b; ++j) {
            const int r = i * cfg.b + j;
            const double d = lat[static_cast<size_t>(r) * 2] - lat[static_cast<size_t>(r) * 2 + 1];
            const double d2 = d * d;
            const double d4 = d2 * d2;
            const double d8 = d4 * d4;
            s += d8 * d8;
        }
        total += std::sqrt(std::sqrt(std::sqrt(std::sqrt(s + kPnormEps))));
    }
    return total;
}

bool try_speed_query(const Subnetwork& net, Vec2 q_s, Vec2 q_g, SpeedQuery& out,
                     EncodeWorkspace& ws, bool smooth) {
    const Vec2 a = normalize(net, q_s), b = normalize(net, q_g);
    std::vector<double> lat;
    const Vec2 pts[2] = {a, b};
    encode_columns(net, pts, true, lat, ws);

    const NetConfig& cfg = net.config();
    double T = 0.0;
    Vec2 gs{0, 0}, gg{0, 0};
    for (int i = 0; i < cfg.a; ++i) {
        if (smooth) {
            double s = 0.0;
            for (int j = 0; j < cfg.b; ++j) {
                const int r = i * cfg.b + j;
                const double d = lat[static_cast<size_t>(r) * 6] - lat[static_cast<size_t>(r) * 6 + 3];
                const double d2 = d * d, d4 = d2 * d2, d8 = d4 * d4;
                s += d8 * d8;
            }
            const double ri = std::sqrt(std::sqrt(std::sqrt(std::sqrt(s + kPnormEps))));
            T += ri;
            const double r15 = std::pow(ri, 15.0);
            for (int j = 0; j < cfg.b; ++j) {
                const int r = i * cfg.b + j;
                const double* ls = &lat[static_cast<size_t>(r) * 6];
                const double d = ls[0] - ls[3];
                const double d2 = d * d, d4 = d2 * d2, d8 = d4 * d4;
                const double w = (d8 * d4 * d2 * d) / r15;  // d^15 / r^15
                gs.x += w * ls[1];
                gs.y += w * ls[2];
                gg.x -= w * ls[4];
                gg.y -= w * ls[5];
            }
        } else {
            double best = 0.0;
            int bj = 0;
            for (int j = 0; j < cfg.b; ++j) {
                const int r = i * cfg.b + j;
                const double d =
                    std::fabs(lat[static_cast<size_t>(r) * 6] - lat[static_cast<size_t>(r) * 6 + 3]);
                if (d > best) {
                    best = d;
                    bj = j;
                }
            }
            const int r = i * cfg.b + bj;
            const double* ls = &lat[static_cast<size_t>(r) * 6];
            const double diff = ls[0] - ls[3];
            const double sg = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
            T += best;
            gs.x += sg * ls[1];
            gs.y += sg * ls[2];
            gg.x -= sg * ls[4];
            gg.y -= sg * ls[5];
        }
    }
    const double ns = gs.norm(), ng = gg.norm();
    if (ns < kDegenerateGrad || ng < kDegenerateGrad) return false;
    out = {net.time_scale() * T, 1.0 / ns, 1.0 / ng, gs, gg};
    return true;
}

SpeedQuery predicted_speed(const Subnetwork& net, Vec2 q_s, Vec2 q_g) {
    EncodeWorkspace ws;
    SpeedQuery out;
    if (!try_speed_query(net, q_s, q_g, out, ws))
        throw NumericError("predicted_speed: degenerate travel-time gradient");
    return out;
}

// ---------------------------------------------------------------------------
// tape pipeline

TapeNet::TapeNet(ad::Tape& tape, const Subnetwork& net) : tape_(&tape), net_(&net) {
    const NetConfig& cfg = net.config();
    B_leaf_ = tape.leaf({cfg.n_fourier, 2}, net.fourier_matrix());
    param_leaves_.reserve(net.layout().size());
    for (const auto& t : net.layout()) {
        std::span<const double> vals(net.parameters().data() + t.offset,
                                     static_cast<size_t>(t.size()));
        param_leaves_.push_back(tape.leaf({t.rows, t.cols}, vals, ad::Role::Param));
    }
}

TapeNet::Encoded TapeNet::encode_multi(ad::Val q, std::span<const ad::Val> seeds) const {
    ad::Tape& t = *tape_;
    const NetConfig& cfg = net_->config();
    const int nt = static_cast<int>(seeds.size());

    struct Multi {
        ad::Val v;
        std::vector<ad::Val> ts;
    };
    auto dense_tanh = [&](int wi, int bi, const Multi& x) {
        Multi out;
        out.v = t.tanh(t.add_colvec(t.matmul(param_leaves_[wi], x.v), param_leaves_[bi]));
        if (!x.ts.empty()) {
            ad::Val d = t.offset(t.neg(t.square(out.v)), 1.0);
            for (ad::Val xt : x.ts) out.ts.push_back(t.mul(t.matmul(param_leaves_[wi], xt), d));
        }
        return out;
    };
    auto lerp_multi = [&](const Multi& gate, const Multi& u, const Multi& v) {
        Multi out;
        out.v = t.lerp(gate.v, u.v, v.v);
        if (!gate.ts.empty()) {
            ad::Val duv = t.sub(u.v, v.v);
            for (int k = 0; k < static_cast<int>(gate.ts.size()); ++k)
                out.ts.push_back(t.add(t.mul(gate.ts[k], duv), t.lerp(gate.v, u.ts[k], v.ts[k])));
        }
        return out;
    };

    // Fourier features
    ad::Val Z = t.scale(t.matmul(B_leaf_, q), 2.0 * M_PI);
    ad::Val sinZ = t.sin(Z), cosZ = t.cos(Z);
    Multi gamma{t.concat_rows(sinZ, cosZ), {}};
    for (int k = 0; k < nt; ++k) {
        ad::Val Zt = t.scale(t.matmul(B_leaf_, seeds[k]), 2.0 * M_PI);
        gamma.ts.push_back(t.concat_rows(t.mul(Zt, cosZ), t.neg(t.mul(Zt, sinZ))));
    }

    Multi U = dense_tanh(0, 1, gamma);
    Multi V = dense_tanh(2, 3, gamma);

    Multi h{t.add_colvec(t.matmul(param_leaves_[4], gamma.v), param_leaves_[5]), {}};
    for (int k = 0; k < nt; ++k) h.ts.push_back(t.matmul(param_leaves_[4], gamma.ts[k]));

    for (int l = 0; l < cfg.n_blocks; ++l) {
        const int base = 6 + l * 5;
        Multi t1 = dense_tanh(base, base + 1, h);
        Multi z1 = lerp_multi(t1, U, V);
        Multi t2 = dense_tanh(base + 2, base + 3, z1);
        Multi z2 = lerp_multi(t2, U, V);
        ad::Val alpha = param_leaves_[base + 4];
        ad::Val keep = t.offset(t.neg(alpha), 1.0);
        Multi next{t.add(t.scale_by(z2.v, alpha), t.scale_by(h.v, keep)), {}};
        for (int k = 0; k < nt; ++k)
            next.ts.push_back(t.add(t.scale_by(z2.ts[k], alpha), t.scale_by(h.ts[k], keep)));
        h = next;
    }

    const int out_idx = 6 + cfg.n_blocks * 5;
    Encoded out;
    out.value = t.add_colvec(t.matmul(param_leaves_[out_idx], h.v), param_leaves_[out_idx + 1]);
    for (int k = 0; k < nt; ++k) out.tangents.push_back(t.matmul(param_leaves_[out_idx], h.ts[k]));
    out.gamma = gamma.v;
    return out;
}

TapeNet::Metric TapeNet::metric_train_multi(ad::Val es, std::span<const ad::Val> es_tangents,
                                            ad::Val eg, std::span<const ad::Val> eg_tangents,
                                            bool exact) const {
    ad::Tape& t = *tape_;
    const NetConfig& cfg = net_->config();
    ad::Val d = t.sub(es, eg);

    if (exact) {
        ad::Val ad_ = t.abs(d);
        ad::Val mx = t.group_max(ad_, cfg.b);
        Metric out;
        out.value = t.group_sum(mx, cfg.a);
        ad::Val sg{};
        auto exact_chain = [&](ad::Val dt) {
            if (!sg.valid()) sg = t.sign(d);
            return t.group_sum(t.group_take(t.mul(dt, sg), mx), cfg.a);
        };
        for (ad::Val et : es_tangents) out.x_tangents.push_back(exact_chain(et));
        for (ad::Val et : eg_tangents) out.y_tangents.push_back(exact_chain(t.neg(et)));
        return out;
    }

    ad::Val p2 = t.square(d);
    ad::Val p4 = t.square(p2);
    ad::Val p8 = t.square(p4);
    ad::Val p16 = t.square(p8);
    ad::Val s = t.offset(t.group_sum(p16, cfg.b), kPnormEps);
    ad::Val r1 = t.sqrt(s), r2 = t.sqrt(r1), r3 = t.sqrt(r2), r4 = t.sqrt(r3);

    Metric out;
    out.value = t.group_sum(r4, cfg.a);
    auto tangent_chain = [&](ad::Val dt) {
        ad::Val p2t = t.scale(t.mul(d, dt), 2.0);
        ad::Val p4t = t.scale(t.mul(p2, p2t), 2.0);
        ad::Val p8t = t.scale(t.mul(p4, p4t), 2.0);
        ad::Val p16t = t.scale(t.mul(p8, p8t), 2.0);
        ad::Val st = t.group_sum(p16t, cfg.b);
        ad::Val r1t = t.div(st, t.scale(r1, 2.0));
        ad::Val r2t = t.div(r1t, t.scale(r2, 2.0));
        ad::Val r3t = t.div(r2t, t.scale(r3, 2.0));
        ad::Val r4t = t.div(r3t, t.scale(r4, 2.0));
        return t.group_sum(r4t, cfg.a);
    };
    for (ad::Val et : es_tangents) out.x_tangents.push_back(tangent_chain(et));
    for (ad::Val et : eg_tangents) out.y_tangents.push_back(tangent_chain(t.neg(et)));
    return out;
}

}  // namespace mnav
