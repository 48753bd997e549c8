#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mnav/geometry.hpp"
#include "mnav/gridworld.hpp"

namespace mnav {

enum class CellState : uint8_t { Unexplored = 0, Free = 1, Occupied = 2 };

/// Tri-state occupancy map built online from scans. Cell states are latched:
/// the world is noise-free, so the first observation of a cell is final.
struct OccupancyMap {
    Lattice lattice;
    std::vector<uint8_t> cells;
    uint64_t version = 0;

    static OccupancyMap unexplored(const Lattice& lat) {
        OccupancyMap m;
        m.lattice = lat;
        m.cells.assign(static_cast<size_t>(lat.width) * lat.height,
                       static_cast<uint8_t>(CellState::Unexplored));
        return m;
    }
    CellState at(Cell c) const { return static_cast<CellState>(cells[lattice.index(c)]); }
    bool is_state(Cell c, CellState s) const { return lattice.in_bounds(c) && at(c) == s; }
    bool is_free(Cell c) const { return is_state(c, CellState::Free); }
    bool is_free(Vec2 p) const { return is_free(lattice.cell_at(p)); }
    size_t count(CellState s) const;
};

/// Mark cells along each beam: traversed cells FREE, the hit cell OCCUPIED.
/// Increments the version exactly once.
void integrate_scan(OccupancyMap& map, const DepthScan& scan);

struct ObstacleQuery {
    double distance = 0.0;  // meters
    Vec2 point;             // obstacle cell center
    Cell cell;
};

enum class ObstacleMask {
    NonFree,       // OCCUPIED and UNEXPLORED both count (conservative)
    OccupiedOnly,  // walls only (room segmentation)
};

/// Exact Euclidean distance transform over one map snapshot, all integer
/// arithmetic, with per-point refinement queries. Ties between equidistant
/// obstacle cells are broken by row-major scan order, matching a brute-force
/// scan that keeps the first strict improvement.
class DistanceIndex {
public:
    DistanceIndex(const OccupancyMap& map, ObstacleMask mask = ObstacleMask::NonFree);

    uint64_t map_version() const { return version_; }

    /// Nearest obstacle to an arbitrary point in a FREE cell.
    ObstacleQuery nearest(Vec2 q) const;

    /// Nearest obstacle to a cell center (exact, row-major tie-break).
    ObstacleQuery at_cell(Cell c) const;

    /// Squared distance between cell centers, in cells^2.
    int64_t squared_cells(Cell c) const { return dist2_[lat_.index(c)]; }
    double distance_at(Cell c) const {
        return std::sqrt(static_cast<double>(dist2_[lat_.index(c)])) * lat_.resolution;
    }

    const Lattice& lattice() const { return lat_; }
    bool is_obstacle(Cell c) const { return obstacle_[lat_.index(c)] != 0; }

private:
    Lattice lat_;
    uint64_t version_;
    std::vector<uint8_t> obstacle_;
    std::vector<int64_t> dist2_;
};

ObstacleQuery nearest_obstacle(const OccupancyMap& map, const DistanceIndex& index, Vec2 q);

struct DistanceField {
    int row0 = 0, col0 = 0, rows = 0, cols = 0;
    std::vector<ObstacleQuery> entries;  // row-major over the window
    std::vector<uint8_t> valid;          // 1 where the cell is FREE

    const ObstacleQuery* at(int r, int c) const {
        const size_t i = static_cast<size_t>(r - row0) * cols + (c - col0);
        return valid[i] ? &entries[i] : nullptr;
    }
};

/// Batch form of nearest_obstacle over every FREE cell center in the region.
DistanceField distance_field(const OccupancyMap& map, const DistanceIndex& index, const BBox& region);

/// Snapshot export: '#' occupied, '.' free, 'U' unexplored.
std::string to_ascii(const OccupancyMap& map);
OccupancyMap occupancy_from_ascii(const std::string& text, double resolution);

}  // namespace mnav
