#pragma once

#include <string>
#include <vector>

#include "mnav/geometry.hpp"

namespace mnav {

/// Ground-truth world: a boolean occupancy grid with a closed boundary.
struct GroundTruthMap {
    Lattice lattice;
    std::vector<uint8_t> occupied;  // 1 = occupied

    bool is_occupied(Cell c) const { return !lattice.in_bounds(c) || occupied[lattice.index(c)] != 0; }
};

struct Pose {
    Vec2 position;
    double heading = 0.0;  // radians in [-pi, pi)
};

/// One planar 360-degree range scan.
struct DepthScan {
    Pose origin;
    std::vector<double> angles;  // world-frame beam directions
    std::vector<double> ranges;  // hit distance, max_range when nothing was hit
    double max_range = 0.0;
};

/// Load an ASCII ('#'/'.') or binary PGM (P5, pixel < 128 occupied) map.
/// A one-cell occupied rim is added when the source lacks a closed border.
GroundTruthMap load_map(const std::string& path, double resolution);

/// Parse the ASCII format from a string (used by fixtures and tests).
GroundTruthMap parse_ascii_map(const std::string& text, double resolution);

/// Cast n_beams evenly spaced rays from the pose. Hits are reported at the
/// entry distance of the first occupied cell along each ray.
DepthScan cast_scan(const GroundTruthMap& map, const Pose& pose, int n_beams, double max_range);

/// True iff the point lies in an in-bounds unoccupied cell.
bool is_free(const GroundTruthMap& map, Vec2 point);

/// True iff both endpoints and every sample at spacing <= step along ab are free.
bool segment_collision_free(const GroundTruthMap& map, Vec2 a, Vec2 b, double step);

}  // namespace mnav
