#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mnav/session.hpp"

namespace mnav {

enum class ExploreEvent : uint8_t {
    Select,     // picked a fresh next-best-view and moved toward it
    Progress,   // moved along the plan, target not reached yet
    Reached,    // arrived at the target (deferred target promoted, if any)
    Backtrack,  // plan failed or budget ran out: retarget the observation pose
    Abandon,    // a promoted target failed again: its cluster is dropped
    Stalled,    // frontiers remain but every cluster is unreachable/dropped
    Done,       // no frontier cells, or every frontier point is noise
};

const char* event_name(ExploreEvent e);

struct HistoryEntry {
    uint64_t frame;
    Pose pose;
    ExploreEvent event;
};

struct ExplorationState {
    Pose robot;
    uint64_t frame = 0;
    std::optional<Vec2> nbv;
    Pose nbv_origin;                 // pose the target's frontier was first observed from
    std::optional<Vec2> pending_nbv; // deferred target to resume after backtracking
    bool nbv_was_deferred = false;   // one more failure abandons the target
    bool pursuing_backtrack = false; // traveling to the observation pose: no re-backtrack
    std::vector<HistoryEntry> history;  // scan pose per frame plus the branch that fired
    std::set<int> blacklist;         // abandoned frontier cells
    std::vector<Vec2> first_observer;  // per-cell pose that first revealed it
};

/// FREE cells 4-adjacent to at least one UNEXPLORED cell.
std::vector<Cell> frontier_cells(const OccupancyMap& map);

struct FrontierClusters {
    std::vector<std::vector<Cell>> clusters;  // each sorted row-major
    std::vector<Vec2> centroids;              // snapped to a member cell center
    std::vector<Cell> noise;
};

/// Density-based clustering of frontier cell centers, deterministic in
/// row-major seeding order.
FrontierClusters cluster_frontiers(const std::vector<Cell>& cells, const Lattice& lat, double eps,
                                   int min_pts);

/// Centroid of the cluster with the least hierarchical travel-time estimate
/// from the robot; ties break toward the smallest cluster index. Returns
/// nullopt when every viable estimate is infinite.
std::optional<int> select_nbv(const FrontierClusters& clusters, const ExplorationState& state,
                              const Session& session, const std::set<int>& blacklist);

struct FrameLog {
    uint64_t frame;
    ExploreEvent event;
    Pose robot;
    std::optional<Vec2> nbv;
    size_t n_frontier = 0;
    size_t n_clusters = 0;
};

struct NetFrameReport {
    uint64_t frame;
    int net_id;
    LossReport loss;
    double seconds;  // FT for this network's share of the frame
};

struct ExploreLogs {
    std::vector<FrameLog> events;
    std::vector<NetFrameReport> training;
    std::vector<double> frame_seconds;  // FT per observation frame
    double mapping_seconds = 0.0;       // MT
    std::string warning;

    std::string events_csv() const;
    std::string training_csv() const;
};

/// One exploration iteration: scan, integrate, re-segment, update the graph
/// and registry, train, then advance toward the next best view under the
/// step budget with single-level backtracking.
ExploreEvent explore_step(ExplorationState& state, const GroundTruthMap& world, Session& session,
                          ExploreLogs& logs);

/// Train every network that owns an unconfirmed room, was assigned new
/// rooms this frame, or still has post-confirmation budget left.
std::vector<NetFrameReport> train_frame(Session& session, const DistanceIndex& index,
                                        uint64_t frame);

/// Full loop from the start pose until no frontiers remain (or the frame
/// cap); finishes the training budget of every network afterwards. Returns
/// true when exploration terminated on its own.
bool run_exploration(const GroundTruthMap& world, Pose start, Session& session, ExploreLogs& logs);

}  // namespace mnav
