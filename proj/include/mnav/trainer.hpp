#pragma once

#include <memory>
#include <vector>

#include "mnav/field_net.hpp"
#include "mnav/sampler.hpp"

namespace mnav {

struct TrainConfig {
    double lambda_eik = 1.0;
    double lambda_td = 625.0;       // ~1/(2 dt)^2: the raw Eq.-4 residual is O(dt^2)
    double lambda_normal = 1.5;
    double lambda_causality = 0.5;  // causality sharpness over normalized T
    double dt = 0.02;               // TD step, normalized units
    double learning_rate = 2e-3;
    int steps_per_frame = 20;
    int batch_size = 64;
    int post_confirm_steps = 1500;  // training budget after all rooms confirm
    bool exact_metric = false;      // train on the exact head instead of the surrogate
    uint64_t seed = 0;

    void validate() const;
};

struct LossReport {
    double eikonal = 0.0, td = 0.0, normal = 0.0, total = 0.0;
    double causality_weight_mean = 0.0;  // mean raw weight over included samples
    double grad_norm = 0.0;
    int excluded = 0;    // samples dropped for coincident pairs / degenerate gradients
    bool aborted = false;  // NaN guard fired; parameters untouched
};

/// Loss graph over one batch: per-sample rows plus the weighted total. The
/// structure is built once per (net, batch size, loss weights) and replayed
/// with fresh leaf data every step; the policy directions, causality weights
/// and sample mask enter as constants (stop-gradient).
struct LossGraph {
    ad::Tape tape;
    ad::Val eik_row, td_row, normal_row;  // (1 x m) per-sample terms
    ad::Val total;                        // (1 x 1) weighted mean
    ad::Val T;                            // (1 x m) normalized train-mode travel time
    ad::Val grad_norm_s, grad_norm_g;     // (1 x m) gradient norms per endpoint
    ad::Val dT_s[2], dT_g[2];             // (1 x m) travel-time input gradients
    std::vector<ad::Val> param_leaves;

    std::vector<double> qs_step, qg_step;  // clamped TD points, normalized (2 x m)
    std::vector<double> weights;           // causality weights, mean 1 over included
    std::vector<uint8_t> included;
    int n_included = 0;
    double raw_weight_mean = 0.0;

    double mean_row(ad::Val row) const;

    // replayable-structure internals
    struct Key {
        size_t n_params = 0;
        int batch = 0;
        double le = 0, lt = 0, ln = 0;
        bool exact = false;
        bool operator==(const Key&) const = default;
    };
    Key key;
    int split = 0;  // nodes before this id depend only on phase-1 leaves
    ad::Val in_qs, in_qg, in_ss, in_sg, in_oms, in_omg;
    ad::Val in_nsx, in_nsy, in_ngx, in_ngy, in_dts, in_dtg;
    ad::Val in_qs_step, in_qg_step, in_weights, in_inv_n;
};

/// Builds the Eq. 3-6 composite structure for a given batch size.
std::unique_ptr<LossGraph> build_loss_graph(const Subnetwork& net, int batch_size,
                                            const TrainConfig& cfg);

/// Loads one batch into the graph and replays it (two partial forwards: the
/// stepped points and weights are data computed between them).
void run_loss(LossGraph& g, const Subnetwork& net, const SampleBatch& batch,
              const TrainConfig& cfg);

/// One-shot convenience: build + run.
std::unique_ptr<LossGraph> build_loss(const Subnetwork& net, const SampleBatch& batch,
                                      const TrainConfig& cfg);

struct LossValue {
    double value = 0.0;
    std::vector<double> per_sample;
    int excluded = 0;
};

LossValue eikonal_loss(const Subnetwork& net, const SampleBatch& batch, const TrainConfig& cfg);
LossValue td_loss(const Subnetwork& net, const SampleBatch& batch, const TrainConfig& cfg);
LossValue normal_loss(const Subnetwork& net, const SampleBatch& batch, const TrainConfig& cfg);
/// Raw exp(-lambda_C * T) weights renormalized to mean 1 over included samples.
std::vector<double> causality_weight(const Subnetwork& net, const SampleBatch& batch, double lambda_c);
/// The pure weighting rule over precomputed travel times (mask optional).
std::vector<double> causality_from_times(std::span<const double> times, double lambda_c,
                                         std::span<const uint8_t> included = {});
LossReport total_loss(const Subnetwork& net, const SampleBatch& batch, const TrainConfig& cfg);

struct AdamState {
    std::vector<double> m, v;
    uint64_t t = 0;
    std::unique_ptr<LossGraph> graph;  // reused step graph

    void ensure(size_t n) {
        if (m.size() != n) {
            m.assign(n, 0.0);
            v.assign(n, 0.0);
            t = 0;
        }
    }
};

/// One Adam update (beta1 0.9, beta2 0.999, eps 1e-8) from the gradient of
/// the total loss. A non-finite loss or gradient aborts the step.
LossReport train_step(Subnetwork& net, const SampleBatch& batch, const TrainConfig& cfg,
                      AdamState& state);

}  // namespace mnav
