#pragma once

#include <optional>
#include <vector>

#include "mnav/geometry.hpp"
#include "mnav/mapper.hpp"

namespace mnav {

struct SamplerConfig {
    double d_max = 1.2;   // near-obstacle retention radius / speed saturation (m)
    double sigma = 4.0;   // goal distance std deviation (m)
    double s_min = 0.1;   // speed floor, dimensionless
    int batch_size = 64;
    uint64_t seed = 0;

    void validate() const;
};

/// Paired start/goal configurations with ground-truth speeds and normals.
struct SampleBatch {
    std::vector<Vec2> q_s, q_g;
    std::vector<Vec2> qbar_s, qbar_g;      // nearest obstacle points
    std::vector<double> speed_s, speed_g;  // S* in [s_min, 1]
    std::vector<Vec2> normal_s, normal_g;  // unit normals toward the obstacle
    std::vector<Vec2> candidate_g;         // pre-snap goal candidates (diagnostics)
    int network_id = -1;

    size_t size() const { return q_s.size(); }
};

/// clamp(distance / d_max, s_min, 1)
double ground_truth_speed(double distance, const SamplerConfig& cfg);

/// (qbar - q) / ||qbar - q||; throws DomainError when q == qbar.
Vec2 surface_normal(Vec2 q, Vec2 qbar);

/// Draw batch_size samples for one subnetwork: starts uniform over observed
/// FREE cell centers within d_max of an obstacle, goals at a Gaussian radius
/// snapped to the nearest pool member. Returns nullopt when the pool is
/// empty or no start qualifies (the trainer skips the frame).
std::optional<SampleBatch> sample_batch(const OccupancyMap& map, const DistanceIndex& index,
                                        const BBox& net_bbox, const SamplerConfig& cfg,
                                        uint64_t seed, int network_id);

}  // namespace mnav
