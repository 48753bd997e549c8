#pragma once

#include <vector>

#include "mnav/navgraph.hpp"

namespace mnav {

/// The live bundle a planning query runs against. Owned by the exploration
/// loop / session; planners only read it.
struct PlanContext {
    const OccupancyMap* map = nullptr;
    const RoomSet* rooms = nullptr;
    const EntryPointSet* eps = nullptr;
    const NavGraph* graph = nullptr;
    const SubnetworkRegistry* registry = nullptr;
};

struct PlannerConfig {
    double step = 0.05;      // gradient-following step, meters
    double tolerance = 0.15; // endpoint meeting distance, meters
    int max_iters = 2000;
    double snap_radius_cells = 3.0;  // locate_room wall-margin snap
};

struct Path {
    std::vector<Vec2> vertices;
    std::vector<int> segment_boundaries;  // vertex indices where segments join
    double total_time_estimate = 0.0;     // seconds
    double planning_time = 0.0;           // wall clock seconds
};

/// Room containing the point: direct label, doorway cluster (attributed to
/// room_a of its entry point), or the nearest room cell within the snap
/// radius. Throws DomainError when unlocatable.
int locate_room(Vec2 point, const PlanContext& ctx, const PlannerConfig& cfg = {});

/// Bidirectional speed-modulated descent on one network's travel-time field;
/// returns the forward chain joined with the reversed goal chain.
std::vector<Vec2> follow_gradient(const Subnetwork& net, Vec2 q_s, Vec2 q_g,
                                  const PlannerConfig& cfg);

/// Hierarchical query: attach the endpoints to their rooms' entry points,
/// Dijkstra over the graph, then one gradient-following segment per room.
Path plan(const PlanContext& ctx, Vec2 start, Vec2 goal, const PlannerConfig& cfg = {});

/// Dijkstra cost only; goals in unconfirmed space attach through the nearest
/// graph node plus a pessimistic straight-line remainder. Infinity when
/// disconnected.
double estimate(const PlanContext& ctx, Vec2 start, Vec2 goal, const PlannerConfig& cfg = {});

/// Collision validation against the planning snapshot (FREE cells only).
bool snapshot_segment_free(const OccupancyMap& map, Vec2 a, Vec2 b, double step);
bool path_collision_free(const OccupancyMap& map, const Path& path, double step);

}  // namespace mnav
