#include "mnav/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "mnav/error.hpp"

namespace mnav {

namespace {
constexpr double kDegenerateGrad = 1e-12;
constexpr double kGradFloor = 1e-30;  // keeps masked samples finite
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
}  // namespace

void TrainConfig::validate() const {
    if (dt <= 0.0) throw DomainError("train config: dt must be positive");
    if (lambda_eik < 0 || lambda_td < 0 || lambda_normal < 0 || lambda_causality < 0)
        throw DomainError("train config: loss weights must be nonnegative");
    if (batch_size < 1 || steps_per_frame < 0) throw DomainError("train config: bad sizes");
}

double LossGraph::mean_row(ad::Val row) const {
    const auto vals = tape.values(row);
    double acc = 0.0;
    for (size_t i = 0; i < vals.size(); ++i)
        if (included[i]) acc += vals[i];
    return n_included > 0 ? acc / n_included : 0.0;
}

std::unique_ptr<LossGraph> build_loss_graph(const Subnetwork& net, int batch_size,
                                            const TrainConfig& cfg) {
    cfg.validate();
    const int m = batch_size;
    if (m < 1) throw DomainError("build_loss_graph: empty batch");

    auto gp = std::make_unique<LossGraph>();
    LossGraph& g = *gp;
    g.key = {net.parameters().size(), m, cfg.lambda_eik, cfg.lambda_td, cfg.lambda_normal,
             cfg.exact_metric};
    ad::Tape& t = g.tape;
    TapeNet tnet(t, net);
    g.param_leaves = tnet.param_leaves();

    // phase-1 data leaves (placeholder values; run_loss fills them)
    const std::vector<double> zeros2(2 * static_cast<size_t>(m), 0.0);
    const std::vector<double> ones1(static_cast<size_t>(m), 1.0);
    g.in_qs = t.leaf({2, m}, zeros2, ad::Role::Input);
    g.in_qg = t.leaf({2, m}, zeros2, ad::Role::Input);
    g.in_ss = t.leaf({1, m}, ones1);
    g.in_sg = t.leaf({1, m}, ones1);
    g.in_oms = t.leaf({1, m}, ones1);
    g.in_omg = t.leaf({1, m}, ones1);
    g.in_nsx = t.leaf({1, m}, ones1);
    g.in_nsy = t.leaf({1, m}, ones1);
    g.in_ngx = t.leaf({1, m}, ones1);
    g.in_ngy = t.leaf({1, m}, ones1);
    g.in_dts = t.leaf({1, m}, ones1);
    g.in_dtg = t.leaf({1, m}, ones1);

    // tangent seeds e_x, e_y shared by both endpoints
    std::vector<double> ex(2 * static_cast<size_t>(m), 0.0), ey(2 * static_cast<size_t>(m), 0.0);
    for (int i = 0; i < m; ++i) {
        ex[i] = 1.0;
        ey[static_cast<size_t>(m) + i] = 1.0;
    }
    ad::Val Ex = t.constant({2, m}, ex);
    ad::Val Ey = t.constant({2, m}, ey);
    const ad::Val seeds[2] = {Ex, Ey};

    TapeNet::Encoded es = tnet.encode_multi(g.in_qs, seeds);
    TapeNet::Encoded eg = tnet.encode_multi(g.in_qg, seeds);
    TapeNet::Metric met =
        tnet.metric_train_multi(es.value, es.tangents, eg.value, eg.tangents, cfg.exact_metric);
    g.T = met.value;
    g.dT_s[0] = met.x_tangents[0];
    g.dT_s[1] = met.x_tangents[1];
    g.dT_g[0] = met.y_tangents[0];
    g.dT_g[1] = met.y_tangents[1];

    auto grad_norm_row = [&](const ad::Val* d) {
        return t.offset(t.sqrt(t.add(t.square(d[0]), t.square(d[1]))), kGradFloor);
    };
    g.grad_norm_s = grad_norm_row(g.dT_s);
    g.grad_norm_g = grad_norm_row(g.dT_g);

    // Eikonal: (sqrt(S* ||grad T||) - 1)^2 per endpoint
    auto eik_term = [&](ad::Val sstar, ad::Val gn) {
        return t.square(t.offset(t.sqrt(t.mul(sstar, gn)), -1.0));
    };
    g.eik_row = t.add(eik_term(g.in_ss, g.grad_norm_s), eik_term(g.in_sg, g.grad_norm_g));

    // Normal alignment: (1-S*) || S* grad T - N* ||^2 per endpoint. The
    // travel-time gradient of the Eikonal solution points toward the nearest
    // obstacle with magnitude 1/S, so S* grad T matches +N* at the solution
    // (numerically confirmed against the fast-marching oracle).
    auto normal_term = [&](ad::Val sstar, const ad::Val* d, ad::Val nx, ad::Val ny, ad::Val om) {
        ad::Val ax = t.sub(t.mul(sstar, d[0]), nx);
        ad::Val ay = t.sub(t.mul(sstar, d[1]), ny);
        return t.mul(om, t.add(t.square(ax), t.square(ay)));
    };
    g.normal_row = t.add(normal_term(g.in_ss, g.dT_s, g.in_nsx, g.in_nsy, g.in_oms),
                         normal_term(g.in_sg, g.dT_g, g.in_ngx, g.in_ngy, g.in_omg));

    // phase 2: TD terms on stepped points (data computed between the passes)
    g.split = static_cast<int>(t.node_count());
    g.in_qs_step = t.leaf({2, m}, zeros2);
    g.in_qg_step = t.leaf({2, m}, zeros2);
    TapeNet::Encoded es2 = tnet.encode_multi(g.in_qs_step, {});
    TapeNet::Encoded eg2 = tnet.encode_multi(g.in_qg_step, {});
    ad::Val T_gstep = tnet.metric_train_multi(es.value, {}, eg2.value, {}, cfg.exact_metric).value;
    ad::Val T_sstep = tnet.metric_train_multi(es2.value, {}, eg.value, {}, cfg.exact_metric).value;
    g.td_row = t.add(t.square(t.sub(t.sub(g.T, g.in_dtg), T_gstep)),
                     t.square(t.sub(t.sub(g.T, g.in_dts), T_sstep)));

    g.in_weights = t.leaf({1, m}, ones1);
    g.in_inv_n = t.scalar(1.0);
    ad::Val composite =
        t.add(t.add(t.scale(g.eik_row, cfg.lambda_eik), t.scale(g.td_row, cfg.lambda_td)),
              t.scale(g.normal_row, cfg.lambda_normal));
    g.total = t.scale_by(t.sum_cols(t.mul(composite, g.in_weights)), g.in_inv_n);
    return gp;
}

void run_loss(LossGraph& g, const Subnetwork& net, const SampleBatch& batch,
              const TrainConfig& cfg) {
    const int m = static_cast<int>(batch.size());
    if (m != g.key.batch) throw DomainError("run_loss: batch size mismatch");
    ad::Tape& t = g.tape;

    // parameters may have moved since the graph was built
    for (size_t ti = 0; ti < g.param_leaves.size(); ++ti) {
        const auto& ref = net.layout()[ti];
        t.set_leaf(g.param_leaves[ti],
                   std::span<const double>(net.parameters().data() + ref.offset,
                                           static_cast<size_t>(ref.size())));
    }

    std::vector<double> qs(2 * static_cast<size_t>(m)), qg(2 * static_cast<size_t>(m));
    g.included.assign(m, 1);
    for (int i = 0; i < m; ++i) {
        const Vec2 a = normalize(net, batch.q_s[i]);
        const Vec2 b = normalize(net, batch.q_g[i]);
        qs[i] = a.x;
        qs[static_cast<size_t>(m) + i] = a.y;
        qg[i] = b.x;
        qg[static_cast<size_t>(m) + i] = b.y;
        if (a == b) g.included[i] = 0;  // coincident pair: no defined direction
    }
    t.set_leaf(g.in_qs, qs);
    t.set_leaf(g.in_qg, qg);

    std::vector<double> buf(m);
    auto fill = [&](ad::Val leaf, auto&& fn) {
        for (int i = 0; i < m; ++i) buf[i] = fn(i);
        t.set_leaf(leaf, buf);
    };
    fill(g.in_ss, [&](int i) { return batch.speed_s[i]; });
    fill(g.in_sg, [&](int i) { return batch.speed_g[i]; });
    fill(g.in_oms, [&](int i) { return 1.0 - batch.speed_s[i]; });
    fill(g.in_omg, [&](int i) { return 1.0 - batch.speed_g[i]; });
    fill(g.in_nsx, [&](int i) { return batch.normal_s[i].x; });
    fill(g.in_nsy, [&](int i) { return batch.normal_s[i].y; });
    fill(g.in_ngx, [&](int i) { return batch.normal_g[i].x; });
    fill(g.in_ngy, [&](int i) { return batch.normal_g[i].y; });
    fill(g.in_dts, [&](int i) { return cfg.dt / batch.speed_s[i]; });
    fill(g.in_dtg, [&](int i) { return cfg.dt / batch.speed_g[i]; });

    t.forward_range(0, g.split);

    // stepped points along the (frozen) policy directions, clamped to the box
    const Vec2 half = net.normalized_half_extents();
    const auto gns_v = t.values(g.grad_norm_s);
    const auto gng_v = t.values(g.grad_norm_g);
    const auto dsx = t.values(g.dT_s[0]), dsy = t.values(g.dT_s[1]);
    const auto dgx = t.values(g.dT_g[0]), dgy = t.values(g.dT_g[1]);
    for (int i = 0; i < m; ++i)
        if (gns_v[i] < kDegenerateGrad || gng_v[i] < kDegenerateGrad) g.included[i] = 0;
    g.n_included = static_cast<int>(std::count(g.included.begin(), g.included.end(), uint8_t(1)));

    g.qs_step.assign(2 * static_cast<size_t>(m), 0.0);
    g.qg_step.assign(2 * static_cast<size_t>(m), 0.0);
    for (int i = 0; i < m; ++i) {
        auto stepped = [&](double x, double y, double dx, double dy, double gn, double* out) {
            double px = 0.0, py = 0.0;
            if (gn >= kDegenerateGrad) {
                px = -dx / gn;
                py = -dy / gn;
            }
            out[0] = std::clamp(x + cfg.dt * px, -half.x, half.x);
            out[static_cast<size_t>(m)] = std::clamp(y + cfg.dt * py, -half.y, half.y);
        };
        stepped(qs[i], qs[static_cast<size_t>(m) + i], dsx[i], dsy[i], gns_v[i], g.qs_step.data() + i);
        stepped(qg[i], qg[static_cast<size_t>(m) + i], dgx[i], dgy[i], gng_v[i], g.qg_step.data() + i);
    }
    t.set_leaf(g.in_qs_step, g.qs_step);
    t.set_leaf(g.in_qg_step, g.qg_step);

    // causality weights over the (frozen) normalized travel times
    const auto T_v = t.values(g.T);
    {
        double wsum = 0.0;
        int n = 0;
        for (int i = 0; i < m; ++i) {
            if (!g.included[i]) continue;
            wsum += std::exp(-cfg.lambda_causality * T_v[i]);
            ++n;
        }
        g.raw_weight_mean = n > 0 ? wsum / n : 0.0;
    }
    g.weights = causality_from_times(T_v, cfg.lambda_causality, g.included);
    t.set_leaf(g.in_weights, g.weights);
    const double inv_n = g.n_included > 0 ? 1.0 / g.n_included : 0.0;
    t.set_leaf(g.in_inv_n, std::span<const double>(&inv_n, 1));

    t.forward_range(g.split, static_cast<int>(t.node_count()));
}

std::unique_ptr<LossGraph> build_loss(const Subnetwork& net, const SampleBatch& batch,
                                      const TrainConfig& cfg) {
    auto g = build_loss_graph(net, static_cast<int>(batch.size()), cfg);
    run_loss(*g, net, batch, cfg);
    return g;
}

namespace {
LossValue row_loss(const Subnetwork& net, const SampleBatch& batch, const TrainConfig& cfg,
                   ad::Val LossGraph::*row) {
    auto g = build_loss(net, batch, cfg);
    LossValue out;
    const auto vals = g->tape.values((*g).*row);
    out.per_sample.assign(vals.begin(), vals.end());
    out.value = g->mean_row((*g).*row);
    out.excluded = static_cast<int>(batch.size()) - g->n_included;
    return out;
}
}  // namespace

LossValue eikonal_loss(const Subnetwork& net, const SampleBatch& batch, const TrainConfig& cfg) {
    return row_loss(net, batch, cfg, &LossGraph::eik_row);
}
LossValue td_loss(const Subnetwork& net, const SampleBatch& batch, const TrainConfig& cfg) {
    return row_loss(net, batch, cfg, &LossGraph::td_row);
}
LossValue normal_loss(const Subnetwork& net, const SampleBatch& batch, const TrainConfig& cfg) {
    return row_loss(net, batch, cfg, &LossGraph::normal_row);
}

std::vector<double> causality_weight(const Subnetwork& net, const SampleBatch& batch, double lambda_c) {
    TrainConfig cfg;
    cfg.lambda_causality = lambda_c;
    auto g = build_loss(net, batch, cfg);
    return g->weights;
}

std::vector<double> causality_from_times(std::span<const double> times, double lambda_c,
                                         std::span<const uint8_t> included) {
    const size_t m = times.size();
    std::vector<double> w(m, 0.0);
    double sum = 0.0;
    int n = 0;
    for (size_t i = 0; i < m; ++i) {
        if (!included.empty() && !included[i]) continue;
        w[i] = std::exp(-lambda_c * times[i]);
        sum += w[i];
        ++n;
    }
    if (n > 0 && sum > 0.0) {
        const double k = n / sum;
        for (double& v : w) v *= k;
    }
    return w;
}

namespace {
LossReport report_from(const LossGraph& g, const SampleBatch& batch) {
    LossReport r;
    r.eikonal = g.mean_row(g.eik_row);
    r.td = g.mean_row(g.td_row);
    r.normal = g.mean_row(g.normal_row);
    r.total = g.tape.value_scalar(g.total);
    r.causality_weight_mean = g.raw_weight_mean;
    r.excluded = static_cast<int>(batch.size()) - g.n_included;
    return r;
}
}  // namespace

LossReport total_loss(const Subnetwork& net, const SampleBatch& batch, const TrainConfig& cfg) {
    auto g = build_loss(net, batch, cfg);
    LossReport r = report_from(*g, batch);
    if (!std::isfinite(r.total)) r.aborted = true;
    return r;
}

LossReport train_step(Subnetwork& net, const SampleBatch& batch, const TrainConfig& cfg,
                      AdamState& state) {
    const LossGraph::Key key{net.parameters().size(), static_cast<int>(batch.size()),
                             cfg.lambda_eik, cfg.lambda_td, cfg.lambda_normal, cfg.exact_metric};
    if (!state.graph || !(state.graph->key == key))
        state.graph = build_loss_graph(net, static_cast<int>(batch.size()), cfg);
    LossGraph& g = *state.graph;
    run_loss(g, net, batch, cfg);

    LossReport r = report_from(g, batch);
    if (!std::isfinite(r.total)) {
        r.aborted = true;
        return r;
    }

    g.tape.reverse(g.total);
    if (!g.tape.adjoints_finite()) {
        r.aborted = true;
        return r;
    }

    std::vector<double>& params = net.parameters();
    state.ensure(params.size());
    std::vector<double> grad(params.size());
    for (size_t ti = 0; ti < g.param_leaves.size(); ++ti) {
        const auto& ref = net.layout()[ti];
        const auto adj = g.tape.adjoints(g.param_leaves[ti]);
        std::copy(adj.begin(), adj.end(), grad.begin() + ref.offset);
    }
    double gn2 = 0.0;
    for (double v : grad) gn2 += v * v;
    r.grad_norm = std::sqrt(gn2);

    state.t += 1;
    const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.t));
    for (size_t i = 0; i < params.size(); ++i) {
        state.m[i] = kAdamBeta1 * state.m[i] + (1.0 - kAdamBeta1) * grad[i];
        state.v[i] = kAdamBeta2 * state.v[i] + (1.0 - kAdamBeta2) * grad[i] * grad[i];
        const double mh = state.m[i] / bc1;
        const double vh = state.v[i] / bc2;
        params[i] -= cfg.learning_rate * mh / (std::sqrt(vh) + kAdamEps);
    }
    net.add_train_steps(1);
    return r;
}

}  // namespace mnav
