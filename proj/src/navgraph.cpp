#include "mnav/navgraph.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

#include "mnav/error.hpp"

namespace mnav {

NetworkEntry* SubnetworkRegistry::entry_of_net(int net_id) {
    for (auto& e : entries)
        if (e.net->id() == net_id) return &e;
    return nullptr;
}
const NetworkEntry* SubnetworkRegistry::entry_of_net(int net_id) const {
    for (const auto& e : entries)
        if (e.net->id() == net_id) return &e;
    return nullptr;
}
const NetworkEntry* SubnetworkRegistry::entry_of_room(int room_id) const {
    for (const auto& e : entries)
        if (std::find(e.room_ids.begin(), e.room_ids.end(), room_id) != e.room_ids.end()) return &e;
    return nullptr;
}
int SubnetworkRegistry::net_of_room(int room_id) const {
    const NetworkEntry* e = entry_of_room(room_id);
    return e ? e->net->id() : -1;
}

int assign_subnetwork(SubnetworkRegistry& reg, const Room& room, const EntryPointSet& eps,
                      const NavGraphConfig& cfg) {
    if (!room.confirmed) throw DomainError("assign_subnetwork: room is not confirmed");
    if (reg.entry_of_room(room.id)) throw DomainError("assign_subnetwork: room already assigned");

    // rooms adjacent to this one through an entry point
    std::vector<int> adjacent;
    for (const EntryPoint& ep : eps.points) {
        if (ep.room_a == room.id) adjacent.push_back(ep.room_b);
        if (ep.room_b == room.id) adjacent.push_back(ep.room_a);
    }

    for (NetworkEntry& e : reg.entries) {
        const BBox& nb = e.net->bbox();
        const double overlap = nb.intersection_area(room.bbox) / room.bbox.area();
        const bool connected =
            std::any_of(adjacent.begin(), adjacent.end(), [&](int rid) {
                return std::find(e.room_ids.begin(), e.room_ids.end(), rid) != e.room_ids.end();
            });
        const BBox grown = nb.united(room.bbox.inflated(cfg.bbox_margin));
        const bool fits = cfg.monolithic ||
                          (grown.width() <= cfg.max_side && grown.height() <= cfg.max_side);
        if ((cfg.monolithic || (overlap >= cfg.overlap_frac && connected)) && fits) {
            e.net->set_bbox(grown);
            e.room_ids.push_back(room.id);
            e.steps_at_all_confirmed = 0;  // recomputed by the training loop
            return e.net->id();
        }
    }

    NetworkEntry fresh;
    fresh.net = std::make_unique<Subnetwork>(reg.next_net_id++, reg.net_config,
                                             room.bbox.inflated(cfg.bbox_margin), reg.d_max);
    fresh.room_ids.push_back(room.id);
    const int id = fresh.net->id();
    reg.entries.push_back(std::move(fresh));
    return id;
}

double edge_weight(const Subnetwork& net, Vec2 a, Vec2 b) { return travel_time(net, a, b); }

void update_graph(NavGraph& graph, const RoomSet& rooms, const EntryPointSet& eps,
                  const SubnetworkRegistry& reg) {
    graph.nodes.clear();
    graph.edges.clear();

    auto node_for = [&](const EntryPoint& ep, int room) -> int {
        const auto key = std::make_pair(ep.id, room);
        auto it = graph.node_ids.find(key);
        if (it == graph.node_ids.end())
            it = graph.node_ids.emplace(key, graph.next_node_id++).first;
        for (const auto& n : graph.nodes)
            if (n.id == it->second) return n.id;
        graph.nodes.push_back({it->second, ep.id, room, ep.position});
        return it->second;
    };

    for (const EntryPoint& ep : eps.points) {
        const int na = node_for(ep, ep.room_a);
        const int nb = node_for(ep, ep.room_b);
        graph.edges.push_back({na, nb, 0.0, EdgeKind::Doorway});
    }

    for (const Room& room : rooms.rooms) {
        if (!room.confirmed) continue;
        const NetworkEntry* entry = reg.entry_of_room(room.id);
        if (!entry) continue;
        std::vector<const GraphNode*> members;
        for (const auto& n : graph.nodes)
            if (n.room == room.id) members.push_back(&n);
        std::sort(members.begin(), members.end(),
                  [](const GraphNode* a, const GraphNode* b) { return a->id < b->id; });
        for (size_t i = 0; i < members.size(); ++i)
            for (size_t j = i + 1; j < members.size(); ++j)
                graph.edges.push_back({members[i]->id, members[j]->id,
                                       edge_weight(*entry->net, members[i]->position, members[j]->position),
                                       EdgeKind::IntraRoom});
    }
    ++graph.version;
}

RouteResult shortest_node_sequence(const NavGraph& graph,
                                   const std::vector<std::pair<int, double>>& start_nodes,
                                   const std::vector<std::pair<int, double>>& goal_nodes) {
    if (start_nodes.empty() || goal_nodes.empty())
        throw DomainError("shortest_node_sequence: empty endpoint set");
    for (const auto& [n, c] : start_nodes)
        if (c < 0.0) throw DomainError("shortest_node_sequence: negative attachment cost");
    for (const auto& [n, c] : goal_nodes)
        if (c < 0.0) throw DomainError("shortest_node_sequence: negative attachment cost");

    std::map<int, std::vector<std::pair<int, double>>> adjacency;
    for (const auto& e : graph.edges) {
        adjacency[e.u].emplace_back(e.v, e.weight);
        adjacency[e.v].emplace_back(e.u, e.weight);
    }
    std::map<int, double> goal_cost;
    for (const auto& [n, c] : goal_nodes) {
        auto it = goal_cost.find(n);
        if (it == goal_cost.end() || c < it->second) goal_cost[n] = c;
    }

    // Dijkstra over (cost, path) with full lexicographic ordering: the first
    // finalized goal route is the cheapest, smallest-sequence one.
    struct State {
        double cost;
        std::vector<int> path;  // empty for the virtual start
        bool operator>(const State& o) const {
            if (cost != o.cost) return cost > o.cost;
            return path > o.path;
        }
    };
    std::priority_queue<State, std::vector<State>, std::greater<>> heap;
    for (const auto& [n, c] : start_nodes) heap.push({c, {n}});
    std::map<int, bool> done;
    State best_goal{std::numeric_limits<double>::infinity(), {}};
    bool found = false;

    while (!heap.empty()) {
        State cur = heap.top();
        heap.pop();
        const int node = cur.path.back();
        if (done.count(node)) continue;
        done[node] = true;
        if (auto gi = goal_cost.find(node); gi != goal_cost.end()) {
            const State candidate{cur.cost + gi->second, cur.path};
            if (!found || best_goal > candidate) {
                best_goal = candidate;
                found = true;
            }
            // cheaper combined routes may still close through other goal nodes
        }
        if (found && cur.cost > best_goal.cost) break;
        for (const auto& [nb, w] : adjacency[node]) {
            if (done.count(nb)) continue;
            State next{cur.cost + w, cur.path};
            next.path.push_back(nb);
            heap.push(std::move(next));
        }
    }
    if (!found) {
        // name the disconnected components of the endpoints
        std::ostringstream msg;
        msg << "no route between start nodes {";
        for (const auto& [n, c] : start_nodes) msg << ' ' << n;
        msg << " } and goal nodes {";
        for (const auto& [n, c] : goal_nodes) msg << ' ' << n;
        msg << " }";
        throw UnreachableError(msg.str());
    }
    return {best_goal.path, best_goal.cost};
}

std::string graph_nodes_csv(const NavGraph& graph) {
    std::ostringstream out;
    out << "node,entry_point,room,x,y\n";
    for (const auto& n : graph.nodes)
        out << n.id << ',' << n.entry_point << ',' << n.room << ',' << n.position.x << ','
            << n.position.y << '\n';
    return out.str();
}

std::string graph_edges_csv(const NavGraph& graph) {
    std::ostringstream out;
    out << "u,v,weight,kind\n";
    for (const auto& e : graph.edges)
        out << e.u << ',' << e.v << ',' << e.weight << ','
            << (e.kind == EdgeKind::Doorway ? "doorway" : "intraroom") << '\n';
    return out.str();
}

}  // namespace mnav
