#pragma once

#include <string>
#include <vector>

#include "mnav/mapper.hpp"

namespace mnav {

struct SegmenterConfig {
    int erosion_radius = 2;      // cells; disk structuring element
    double min_room_area = 1.0;  // m^2
};

struct Room {
    int id = -1;
    std::vector<int> cells;  // sorted row-major indices into the map lattice
    BBox bbox;
    bool confirmed = false;
};

/// Segmented free space. label_grid holds the room id per room cell (-1
/// elsewhere); watershed extends every room's label across the free cells
/// the dilation sealed, which defines each room's pre-erosion region and the
/// doorway boundaries.
struct RoomSet {
    Lattice lattice;
    uint64_t map_version = 0;
    int next_room_id = 0;
    std::vector<Room> rooms;
    std::vector<int32_t> label_grid;
    std::vector<int32_t> watershed;

    const Room* find(int id) const {
        for (const Room& r : rooms)
            if (r.id == id) return &r;
        return nullptr;
    }
    int label_at(Cell c) const { return label_grid[lattice.index(c)]; }
};

struct EntryPoint {
    int id = -1;
    Vec2 position;        // doorway cluster centroid snapped to a FREE cell center
    int room_a = -1, room_b = -1;  // room_a < room_b
};

struct EntryPointSet {
    int next_ep_id = 0;
    std::vector<EntryPoint> points;
    std::vector<int32_t> doorway_grid;  // cell -> index into points, -1 elsewhere

    const EntryPoint* find(int id) const {
        for (const auto& p : points)
            if (p.id == id) return &p;
        return nullptr;
    }
};

/// Dilate walls by the disk radius, take 4-connected components of the
/// remaining FREE cells, and carry room identities over from the prior set:
/// confirmed rooms persist verbatim, unconfirmed rooms keep their id when
/// at least 90% of their previous cells are contained in the new component.
RoomSet segment(const OccupancyMap& map, const RoomSet* prior, const SegmenterConfig& cfg);

/// Confirm rooms whose pre-erosion region nowhere touches UNEXPLORED cells
/// (8-adjacency). Confirmation is latched.
void classify(RoomSet& rooms, const OccupancyMap& map);

/// Doorway detection: free cells sealed by the dilation are assigned to the
/// geodesically nearest room (the watershed); 4-connected clusters of
/// boundary cells between two room labels become one entry point per room
/// pair, with ids stable across frames for unchanged pairs.
EntryPointSet detect_entry_points(const RoomSet& rooms, const OccupancyMap& map,
                                  const EntryPointSet* prior);

/// Debug exports.
std::string label_grid_ascii(const RoomSet& rooms, const OccupancyMap& map);
std::string entry_points_csv(const EntryPointSet& eps);

}  // namespace mnav
