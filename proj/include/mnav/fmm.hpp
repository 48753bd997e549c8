#pragma once

#include <limits>
#include <string>
#include <vector>

#include "mnav/mapper.hpp"
#include "mnav/sampler.hpp"

namespace mnav {

/// First-order fast-marching solution over a map region. Arrival times are
/// seconds at physical speed S* x d_max m/s, matching the trained fields.
struct ArrivalGrid {
    int row0 = 0, col0 = 0, rows = 0, cols = 0;
    double resolution = 1.0;
    Vec2 source;
    std::vector<double> arrival;  // infinity where unreached
    std::vector<double> speed;    // S* per cell, 0 for blocked cells

    static constexpr double kInf = std::numeric_limits<double>::infinity();

    bool contains(Cell c) const {
        return c.row >= row0 && c.row < row0 + rows && c.col >= col0 && c.col < col0 + cols;
    }
    size_t index(Cell c) const {
        return static_cast<size_t>(c.row - row0) * cols + (c.col - col0);
    }
    double at(Cell c) const { return contains(c) ? arrival[index(c)] : kInf; }
    bool reached(Cell c) const { return at(c) < kInf; }

    /// Bilinear interpolation between the four surrounding cell centers;
    /// falls back to the containing cell when a corner is unreached.
    double interpolate(Vec2 p) const;

    /// CSV matrix of arrival values ("inf" where unreached).
    std::string to_csv() const;
};

/// Upwind fast marching from a FREE source point over FREE cells of the
/// region. Speeds come from ground_truth_speed of the obstacle distance.
ArrivalGrid fmm_solve(const OccupancyMap& map, const DistanceIndex& index, const BBox& region,
                      Vec2 source, const SamplerConfig& cfg);

/// Steepest-descent extraction from start to the grid's source.
std::vector<Vec2> fmm_extract_path(const ArrivalGrid& grid, Vec2 start, double step,
                                   int max_iters = 200000);

/// Solve from b, read the interpolated arrival at a; infinity if unreachable.
double oracle_travel_time(const OccupancyMap& map, const DistanceIndex& index, Vec2 a, Vec2 b,
                          const SamplerConfig& cfg);

double polyline_length(const std::vector<Vec2>& pts);

}  // namespace mnav
