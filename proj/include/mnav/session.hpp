#pragma once

#include <optional>
#include <string>

#include "mnav/planner.hpp"

namespace mnav {

struct ExplorerConfig {
    int n_beams = 360;
    double max_range = 5.0;        // meters
    double dbscan_eps = 0.4;       // meters
    int dbscan_min_pts = 4;
    int step_budget = 50;          // waypoints per frame
    double waypoint_spacing = 0.2; // meters
    double reach_tolerance = 0.3;  // meters
    int frame_cap = 2000;
    int final_training_sweeps = 200;
};

/// Everything a navigation query needs, produced by exploration and
/// persisted as one archive.
struct Session {
    static constexpr uint32_t kFormatVersion = 1;

    SamplerConfig sampler;
    TrainConfig train;
    NetConfig net_config;
    SegmenterConfig segmenter;
    ExplorerConfig explorer;
    NavGraphConfig nav;
    PlannerConfig planner;

    OccupancyMap occupancy;
    RoomSet rooms;
    EntryPointSet eps;
    NavGraph graph;
    SubnetworkRegistry registry;

    bool complete = false;
    uint64_t frames = 0;

    PlanContext context() const {
        return {&occupancy, &rooms, &eps, &graph, &registry};
    }
    /// Revalidates every cross reference (room ids, entry points, networks).
    void check_consistency() const;
};

/// Single-file archive: a text manifest with the configs and object index,
/// followed by binary blobs (occupancy bytes, little-endian float64 arrays
/// for network parameters). Byte-stable across save/load/save.
void save_session(const Session& session, const std::string& path);
Session load_session(const std::string& path);

}  // namespace mnav
