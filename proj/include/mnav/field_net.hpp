#pragma once

#include <span>
#include <string>
#include <vector>

#include "mnav/autodiff.hpp"
#include "mnav/geometry.hpp"

namespace mnav {

struct NetConfig {
    int n_fourier = 64;        // rows of the fixed Gaussian matrix B
    double fourier_scale = 1.5;  // per-row scales spread log-uniformly below this
    int hidden_width = 64;
    int n_blocks = 3;
    int a = 16, b = 8;         // latent matrix: a rows summed, b columns maxed
    uint64_t seed = 1;

    int latent_size() const { return a * b; }
    void validate() const;
};

/// One neural time field owning a bounded region. Fourier features, a
/// residual-gated trunk (two gate encoders U/V, learnable per-block alpha
/// initialized to 0 so fresh blocks pass their input through), and an
/// L1/Linf metric head over the latent encodings.
///
/// Coordinates are normalized isotropically: q* = (q - bbox_center)/scale
/// with scale the longer bbox side, so one constant relates normalized
/// gradients to physical speeds.
class Subnetwork {
public:
    struct TensorRef {
        std::string name;
        size_t offset;
        int rows, cols;
        int size() const { return rows * cols; }
    };

    Subnetwork(int id, const NetConfig& cfg, const BBox& box, double d_max);

    int id() const { return id_; }
    const NetConfig& config() const { return config_; }
    const BBox& bbox() const { return bbox_; }
    double scale() const { return scale_; }
    double d_max() const { return d_max_; }
    /// Seconds per unit of normalized travel time (robot top speed is d_max m/s).
    double time_scale() const { return scale_ / d_max_; }
    uint64_t train_steps() const { return train_steps_; }
    void add_train_steps(uint64_t n) { train_steps_ += n; }

    /// Expands the owned region; normalization rescales accordingly.
    void set_bbox(const BBox& box);

    const std::vector<double>& fourier_matrix() const { return B_; }  // (n_fourier x 2)
    const std::vector<double>& parameters() const { return params_; }
    std::vector<double>& parameters() { return params_; }
    const std::vector<TensorRef>& layout() const { return layout_; }

    /// Normalized half-extents of the bbox image (the TD clamp box).
    Vec2 normalized_half_extents() const {
        return {0.5 * bbox_.width() / scale_, 0.5 * bbox_.height() / scale_};
    }

    // serialization support
    void restore(std::vector<double> B, std::vector<double> params, uint64_t steps);

private:
    int id_;
    NetConfig config_;
    BBox bbox_;
    double scale_ = 1.0;
    double d_max_;
    uint64_t train_steps_ = 0;
    std::vector<double> B_;
    std::vector<double> params_;
    std::vector<TensorRef> layout_;
};

/// Eq-2-style bounding box normalization (isotropic variant).
Vec2 normalize(const Subnetwork& net, Vec2 q);
Vec2 denormalize(const Subnetwork& net, Vec2 q_star);

/// Exact metric head: D(x, y) = sum_i max_j |x_ij - y_ij|.
double metric_exact(std::span<const double> x, std::span<const double> y, int a, int b);

/// Batched plain evaluation of the encoder. Columns of `points` are
/// normalized coordinates; when with_jets is set every point produces three
/// columns (value, d/dx*, d/dy*) and latents follows the same layout.
struct EncodeWorkspace {
    std::vector<double> bufs[4];
};
void encode_columns(const Subnetwork& net, std::span<const Vec2> points, bool with_jets,
                    std::vector<double>& latents, EncodeWorkspace& ws);

/// Latent encoding of one normalized point (a*b values).
std::vector<double> encode(const Subnetwork& net, Vec2 q_star);

/// Predicted travel time in seconds (evaluation mode, exact metric).
double travel_time(const Subnetwork& net, Vec2 q_s, Vec2 q_g);

/// Train-mode travel time in normalized units (smooth metric surrogate);
/// the quantity the losses are written against.
double travel_time_train_normalized(const Subnetwork& net, Vec2 q_s, Vec2 q_g);

struct SpeedQuery {
    double travel_seconds;
    double speed_s, speed_g;     // 1/||grad T*|| at each endpoint
    Vec2 grad_s, grad_g;         // gradients of normalized T in normalized coords
};

/// Eikonal speeds implied by the field at both endpoints. Throws
/// NumericError when a gradient norm falls under 1e-12.
SpeedQuery predicted_speed(const Subnetwork& net, Vec2 q_s, Vec2 q_g);
/// Same but non-throwing; returns false on a degenerate gradient. With
/// `smooth` set the gradients come from the train-mode surrogate head,
/// which is differentiable across argmax switches (what descent needs);
/// the exact head's gradient is piecewise and kinks trap a follower.
bool try_speed_query(const Subnetwork& net, Vec2 q_s, Vec2 q_g, SpeedQuery& out,
                     EncodeWorkspace& ws, bool smooth = false);

/// Binds a Subnetwork's parameters to a tape as leaves and rebuilds the same
/// forward pipeline out of tape primitives. Tangent chains (one per seed
/// direction) share the primal nodes, so one reverse sweep differentiates
/// losses containing input gradients with respect to the parameters.
class TapeNet {
public:
    struct Encoded {
        ad::Val value;                  // (a*b x m)
        std::vector<ad::Val> tangents;  // one per seed
        ad::Val gamma;                  // Fourier features (2F x m)
    };
    struct Metric {
        ad::Val value;                     // (1 x m)
        std::vector<ad::Val> x_tangents;   // d/d(seed) through the x side
        std::vector<ad::Val> y_tangents;
    };

    TapeNet(ad::Tape& tape, const Subnetwork& net);

    /// q: (2 x m) normalized inputs; seeds: (2 x m) tangent directions.
    Encoded encode_multi(ad::Val q, std::span<const ad::Val> seeds) const;

    /// Train-mode metric with tangents from either side: the smooth even-p
    /// surrogate by default, or the exact max/abs head with its documented
    /// subgradient rules.
    Metric metric_train_multi(ad::Val es, std::span<const ad::Val> es_tangents, ad::Val eg,
                              std::span<const ad::Val> eg_tangents, bool exact = false) const;

    const std::vector<ad::Val>& param_leaves() const { return param_leaves_; }
    ad::Tape& tape() const { return *tape_; }
    const Subnetwork& net() const { return *net_; }

private:
    ad::Tape* tape_;
    const Subnetwork* net_;
    ad::Val B_leaf_;
    std::vector<ad::Val> param_leaves_;  // one per layout tensor
};

}  // namespace mnav
