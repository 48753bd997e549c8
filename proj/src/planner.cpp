#include "mnav/planner.hpp"

#include <algorithm>
#include <chrono>

#include "mnav/error.hpp"

namespace mnav {

namespace {
constexpr double kPessimisticFloor = 1e-9;

double pessimistic_speed(const SubnetworkRegistry& reg) {
    // straight-line remainder speed for unconfirmed targets: s_min * d_max
    return std::max(kPessimisticFloor, 0.1 * reg.d_max);
}
}  // namespace

int locate_room(Vec2 point, const PlanContext& ctx, const PlannerConfig& cfg) {
    const Lattice& lat = ctx.map->lattice;
    const Cell cell = lat.cell_at(point);
    if (!lat.in_bounds(cell) || !ctx.map->is_free(cell))
        throw DomainError("locate_room: point is not FREE");
    const int idx = lat.index(cell);
    if (ctx.rooms->label_grid[idx] >= 0) return ctx.rooms->label_grid[idx];
    if (ctx.eps && ctx.eps->doorway_grid[idx] >= 0)
        return ctx.eps->points[ctx.eps->doorway_grid[idx]].room_a;

    // wall margin: nearest room cell within the snap radius
    const int radius = static_cast<int>(std::ceil(cfg.snap_radius_cells));
    double best_d2 = std::numeric_limits<double>::infinity();
    int best = -1;
    for (int dr = -radius; dr <= radius; ++dr) {
        for (int dc = -radius; dc <= radius; ++dc) {
            const Cell nb{cell.row + dr, cell.col + dc};
            if (!lat.in_bounds(nb)) continue;
            const int nidx = lat.index(nb);
            if (ctx.rooms->label_grid[nidx] < 0) continue;
            const double d2 = squared_dist(point, lat.center(nb));
            if (d2 < best_d2 && d2 <= cfg.snap_radius_cells * cfg.snap_radius_cells *
                                          lat.resolution * lat.resolution) {
                best_d2 = d2;
                best = ctx.rooms->label_grid[nidx];
            }
        }
    }
    if (best < 0) throw DomainError("locate_room: no room within the snap radius");
    return best;
}

std::vector<Vec2> follow_gradient(const Subnetwork& net, Vec2 q_s, Vec2 q_g,
                                  const PlannerConfig& cfg) {
    std::vector<Vec2> fwd{q_s}, bwd{q_g};
    EncodeWorkspace ws;
    const Vec2 half = net.normalized_half_extents();
    Vec2 a = normalize(net, q_s), b = normalize(net, q_g);
    const double tol = cfg.tolerance / net.scale();
    const double step = cfg.step / net.scale();
    int consecutive_clamps = 0;
    for (int it = 0; it < cfg.max_iters; ++it) {
        if ((a - b).norm() < tol) {
            std::vector<Vec2> path = fwd;
            for (auto rit = bwd.rbegin(); rit != bwd.rend(); ++rit) path.push_back(*rit);
            return path;
        }
        SpeedQuery sq;
        if (!try_speed_query(net, denormalize(net, a), denormalize(net, b), sq, ws,
                             /*smooth=*/true))
            throw NumericError("follow_gradient: degenerate travel-time gradient");
        auto advance = [&](Vec2 p, Vec2 grad, double speed) {
            // modulation only ever slows the step down near obstacles; the
            // predicted speed is noisy above 1 and would overshoot otherwise
            const double pace = std::clamp(speed, 0.1, 1.0);
            const Vec2 dir = grad.normalized();
            Vec2 next{p.x - step * pace * dir.x, p.y - step * pace * dir.y};
            const Vec2 clamped{std::clamp(next.x, -half.x, half.x),
                               std::clamp(next.y, -half.y, half.y)};
            const bool hit = !(clamped == next);
            return std::make_pair(clamped, hit);
        };
        // alternate endpoints: the start on even iterations, the goal on odd
        bool hit;
        if (it % 2 == 0) {
            std::tie(a, hit) = advance(a, sq.grad_s, sq.speed_s);
            fwd.push_back(denormalize(net, a));
        } else {
            std::tie(b, hit) = advance(b, sq.grad_g, sq.speed_g);
            bwd.push_back(denormalize(net, b));
        }
        consecutive_clamps = hit ? consecutive_clamps + 1 : 0;
        if (consecutive_clamps >= 3)
            throw NumericError("follow_gradient: stuck on the bounding box");
    }
    throw NumericError("follow_gradient: did not converge within max_iters");
}

namespace {

// entry-point attachments for a confirmed room: (node id, travel seconds)
std::vector<std::pair<int, double>> attachments(const PlanContext& ctx, Vec2 p, int room_id) {
    const NetworkEntry* entry = ctx.registry->entry_of_room(room_id);
    std::vector<std::pair<int, double>> out;
    if (!entry) return out;
    for (const auto& n : ctx.graph->nodes) {
        if (n.room != room_id) continue;
        if (!entry->net->bbox().contains(n.position, 1e-9)) continue;
        out.emplace_back(n.id, edge_weight(*entry->net, p, n.position));
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

Path plan(const PlanContext& ctx, Vec2 start, Vec2 goal, const PlannerConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    Path path;

    const int start_room = locate_room(start, ctx, cfg);
    const int goal_room = locate_room(goal, ctx, cfg);
    const Room* sroom = ctx.rooms->find(start_room);
    const Room* groom = ctx.rooms->find(goal_room);
    if (!sroom || !sroom->confirmed || !groom || !groom->confirmed)
        throw DomainError("plan: endpoints must lie in confirmed rooms");

    if (start == goal) {
        path.vertices = {start};
        path.planning_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return path;
    }

    if (start_room == goal_room) {
        const NetworkEntry* entry = ctx.registry->entry_of_room(start_room);
        if (!entry) throw DomainError("plan: room has no trained network");
        path.vertices = follow_gradient(*entry->net, start, goal, cfg);
        path.total_time_estimate = edge_weight(*entry->net, start, goal);
    } else {
        const auto starts = attachments(ctx, start, start_room);
        const auto goals = attachments(ctx, goal, goal_room);
        if (starts.empty() || goals.empty())
            throw UnreachableError("plan: an endpoint room exposes no graph nodes");
        const RouteResult route = shortest_node_sequence(*ctx.graph, starts, goals);
        path.total_time_estimate = route.cost;

        // gradient-following segments between consecutive stops inside one room
        std::vector<std::pair<Vec2, int>> stops;  // (position, room the segment runs in)
        stops.emplace_back(start, start_room);
        for (int node_id : route.nodes) {
            const GraphNode* n = ctx.graph->find(node_id);
            stops.emplace_back(n->position, n->room);
        }
        stops.emplace_back(goal, goal_room);

        for (size_t i = 0; i + 1 < stops.size(); ++i) {
            const Vec2 a = stops[i].first, b = stops[i + 1].first;
            if (a == b || (a - b).norm() < 1e-9) continue;  // doorway edge: both sides coincide
            // consecutive distinct stops always share a room: start/goal
            // attach to their own room's nodes, and intra-room edges stay
            // inside one room by construction
            const int room = stops[i + 1].second;
            const NetworkEntry* entry = ctx.registry->entry_of_room(room);
            if (!entry) throw DomainError("plan: segment room has no network");
            std::vector<Vec2> seg = follow_gradient(*entry->net, a, b, cfg);
            if (!path.vertices.empty()) {
                path.segment_boundaries.push_back(static_cast<int>(path.vertices.size()) - 1);
                seg.erase(seg.begin());
            }
            path.vertices.insert(path.vertices.end(), seg.begin(), seg.end());
        }
        if (path.vertices.empty()) path.vertices = {start, goal};
    }
    path.planning_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return path;
}

double estimate(const PlanContext& ctx, Vec2 start, Vec2 goal, const PlannerConfig& cfg) {
    const double slow = pessimistic_speed(*ctx.registry);
    int start_room = -1, goal_room = -1;
    try {
        start_room = locate_room(start, ctx, cfg);
    } catch (const DomainError&) {}
    try {
        goal_room = locate_room(goal, ctx, cfg);
    } catch (const DomainError&) {}

    auto confirmed_with_net = [&](int room) {
        const Room* r = room >= 0 ? ctx.rooms->find(room) : nullptr;
        return r && r->confirmed && ctx.registry->entry_of_room(room) != nullptr;
    };

    // both endpoints in one confirmed room: direct field query
    if (start_room >= 0 && start_room == goal_room && confirmed_with_net(start_room)) {
        const NetworkEntry* entry = ctx.registry->entry_of_room(start_room);
        if (entry->net->bbox().contains(start, 1e-9) && entry->net->bbox().contains(goal, 1e-9))
            return edge_weight(*entry->net, start, goal);
    }

    // attach each endpoint: through its room's entry points when possible,
    // otherwise a pessimistic straight line to the nearest graph node
    auto attach = [&](Vec2 p, int room) -> std::vector<std::pair<int, double>> {
        if (confirmed_with_net(room)) {
            auto at = attachments(ctx, p, room);
            if (!at.empty()) return at;
        }
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (const auto& n : ctx.graph->nodes) {
            const double d = (n.position - p).norm();
            if (d < best_d) {
                best_d = d;
                best = n.id;
            }
        }
        if (best < 0) return {};
        return {{best, best_d / slow}};
    };

    const auto starts = attach(start, start_room);
    const auto goals = attach(goal, goal_room);
    if (starts.empty() || goals.empty())
        return (goal - start).norm() / slow;  // no graph yet: pure straight line
    try {
        return shortest_node_sequence(*ctx.graph, starts, goals).cost;
    } catch (const UnreachableError&) {
        return std::numeric_limits<double>::infinity();
    }
}

bool snapshot_segment_free(const OccupancyMap& map, Vec2 a, Vec2 b, double step) {
    if (step <= 0.0) throw DomainError("snapshot_segment_free: step must be positive");
    const double len = (b - a).norm();
    const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
    for (int i = 0; i <= n; ++i) {
        const double t = static_cast<double>(i) / n;
        if (!map.is_free(Vec2{a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t})) return false;
    }
    return true;
}

bool path_collision_free(const OccupancyMap& map, const Path& path, double step) {
    for (size_t i = 1; i < path.vertices.size(); ++i)
        if (!snapshot_segment_free(map, path.vertices[i - 1], path.vertices[i], step)) return false;
    return !path.vertices.empty();
}

}  // namespace mnav
