#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mnav/field_net.hpp"
#include "mnav/segmenter.hpp"
#include "mnav/trainer.hpp"

namespace mnav {

enum class EdgeKind : uint8_t { IntraRoom, Doorway };

struct GraphNode {
    int id = -1;
    int entry_point = -1;
    int room = -1;
    Vec2 position;
};

struct GraphEdge {
    int u = -1, v = -1;
    double weight = 0.0;  // seconds; exactly 0 for doorway edges
    EdgeKind kind = EdgeKind::IntraRoom;
};

/// Sparse navigation graph: one node per (entry point, adjoining room) pair,
/// zero-cost doorway edges between the two sides, and travel-time-weighted
/// complete subgraphs inside each confirmed room.
struct NavGraph {
    std::vector<GraphNode> nodes;
    std::vector<GraphEdge> edges;
    uint64_t version = 0;
    std::map<std::pair<int, int>, int> node_ids;  // (entry point, room) -> node id
    int next_node_id = 0;

    const GraphNode* find(int id) const {
        for (const auto& n : nodes)
            if (n.id == id) return &n;
        return nullptr;
    }
};

struct NavGraphConfig {
    double overlap_frac = 0.3;   // condition (1)
    double max_side = 12.0;      // L_max, condition (3)
    double bbox_margin = 0.5;    // inflation for fresh networks
    bool monolithic = false;     // ablation: one network, no size limit
};

/// One subnetwork with its assigned rooms and training state.
struct NetworkEntry {
    std::unique_ptr<Subnetwork> net;
    std::vector<int> room_ids;
    AdamState adam;
    uint64_t steps_at_all_confirmed = 0;  // 0 while any room is unconfirmed
    uint64_t last_assign_frame = 0;
    std::vector<double> weight_cache_steps;  // see update_graph
};

struct SubnetworkRegistry {
    std::vector<NetworkEntry> entries;
    int next_net_id = 0;
    NetConfig net_config;
    double d_max = 0.6;

    NetworkEntry* entry_of_net(int net_id);
    const NetworkEntry* entry_of_net(int net_id) const;
    /// Network owning the given room, or nullptr.
    const NetworkEntry* entry_of_room(int room_id) const;
    int net_of_room(int room_id) const;
};

/// Assign a confirmed room to an existing network when (1) its bbox overlap
/// fraction reaches overlap_frac, (2) it shares an entry point with an
/// already-assigned room, and (3) the union bbox stays within max_side;
/// otherwise instantiate a fresh network around the inflated room bbox.
/// Returns the network id. Assignment is permanent.
int assign_subnetwork(SubnetworkRegistry& reg, const Room& room, const EntryPointSet& eps,
                      const NavGraphConfig& cfg);

/// Rebuild nodes and edges from the current rooms and entry points; node ids
/// persist through the (entry point, room) registry and intra-room weights
/// refresh when the owning network has trained since they were computed.
void update_graph(NavGraph& graph, const RoomSet& rooms, const EntryPointSet& eps,
                  const SubnetworkRegistry& reg);

/// Travel time between two points of one network (seconds).
double edge_weight(const Subnetwork& net, Vec2 a, Vec2 b);

struct RouteResult {
    std::vector<int> nodes;  // empty when start and goal attach at the same spot
    double cost = 0.0;
};

/// Dijkstra over the graph from a set of (node, attach cost) starts to a set
/// of goals; equal-cost routes resolve to the lexicographically smallest
/// node sequence. Throws UnreachableError naming the components when no
/// route exists.
RouteResult shortest_node_sequence(const NavGraph& graph,
                                   const std::vector<std::pair<int, double>>& start_nodes,
                                   const std::vector<std::pair<int, double>>& goal_nodes);

/// CSV exports (node table and edge table).
std::string graph_nodes_csv(const NavGraph& graph);
std::string graph_edges_csv(const NavGraph& graph);

}  // namespace mnav
