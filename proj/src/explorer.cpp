#include "mnav/explorer.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <sstream>

#include "mnav/error.hpp"
#include "mnav/rng.hpp"

namespace mnav {

using Clock = std::chrono::steady_clock;

const char* event_name(ExploreEvent e) {
    switch (e) {
        case ExploreEvent::Select: return "SELECT";
        case ExploreEvent::Progress: return "PROGRESS";
        case ExploreEvent::Reached: return "REACHED";
        case ExploreEvent::Backtrack: return "BACKTRACK";
        case ExploreEvent::Abandon: return "ABANDON";
        case ExploreEvent::Stalled: return "STALLED";
        case ExploreEvent::Done: return "DONE";
    }
    return "?";
}

std::vector<Cell> frontier_cells(const OccupancyMap& map) {
    const Lattice& lat = map.lattice;
    std::vector<Cell> out;
    for (int r = 0; r < lat.height; ++r) {
        for (int c = 0; c < lat.width; ++c) {
            if (!map.is_free(Cell{r, c})) continue;
            const bool frontier = map.is_state({r - 1, c}, CellState::Unexplored) ||
                                  map.is_state({r + 1, c}, CellState::Unexplored) ||
                                  map.is_state({r, c - 1}, CellState::Unexplored) ||
                                  map.is_state({r, c + 1}, CellState::Unexplored);
            if (frontier) out.push_back({r, c});
        }
    }
    return out;
}

FrontierClusters cluster_frontiers(const std::vector<Cell>& cells, const Lattice& lat, double eps,
                                   int min_pts) {
    if (eps <= 0.0 || min_pts < 1) throw DomainError("cluster_frontiers: bad parameters");
    FrontierClusters out;
    const int n = static_cast<int>(cells.size());
    if (n == 0) return out;

    // grid buckets for the eps-neighborhood queries
    const int bucket = std::max(1, static_cast<int>(std::ceil(eps / lat.resolution)));
    std::map<std::pair<int, int>, std::vector<int>> buckets;
    for (int i = 0; i < n; ++i)
        buckets[{cells[i].row / bucket, cells[i].col / bucket}].push_back(i);
    const double eps2 = eps * eps;
    auto neighbors = [&](int i) {
        std::vector<int> nb;
        const Vec2 p = lat.center(cells[i]);
        const int br = cells[i].row / bucket, bc = cells[i].col / bucket;
        for (int dr = -1; dr <= 1; ++dr)
            for (int dc = -1; dc <= 1; ++dc) {
                auto it = buckets.find({br + dr, bc + dc});
                if (it == buckets.end()) continue;
                for (int j : it->second)
                    if (squared_dist(p, lat.center(cells[j])) <= eps2) nb.push_back(j);
            }
        std::sort(nb.begin(), nb.end());
        return nb;
    };

    // classic DBSCAN, seeds in row-major order (cells arrive sorted)
    std::vector<int> label(n, -2);  // -2 unvisited, -1 noise, >=0 cluster
    for (int i = 0; i < n; ++i) {
        if (label[i] != -2) continue;
        auto nb = neighbors(i);
        if (static_cast<int>(nb.size()) < min_pts) {
            label[i] = -1;
            continue;
        }
        const int cid = static_cast<int>(out.clusters.size());
        out.clusters.emplace_back();
        label[i] = cid;
        std::deque<int> queue(nb.begin(), nb.end());
        while (!queue.empty()) {
            const int j = queue.front();
            queue.pop_front();
            if (label[j] == -1) label[j] = cid;  // border point joins
            if (label[j] != -2) continue;
            label[j] = cid;
            auto nb2 = neighbors(j);
            if (static_cast<int>(nb2.size()) >= min_pts)
                queue.insert(queue.end(), nb2.begin(), nb2.end());
        }
        (void)0;
    }
    for (int i = 0; i < n; ++i) {
        if (label[i] >= 0)
            out.clusters[label[i]].push_back(cells[i]);
        else
            out.noise.push_back(cells[i]);
    }
    out.clusters.erase(std::remove_if(out.clusters.begin(), out.clusters.end(),
                                      [](const auto& c) { return c.empty(); }),
                       out.clusters.end());
    for (auto& cl : out.clusters) {
        std::sort(cl.begin(), cl.end());
        Vec2 acc{0, 0};
        for (const Cell& c : cl) acc = acc + lat.center(c);
        const Vec2 centroid = acc * (1.0 / cl.size());
        // snap to the nearest member cell center, row-major ties
        double best = std::numeric_limits<double>::infinity();
        Vec2 best_p = lat.center(cl.front());
        for (const Cell& c : cl) {
            const double d2 = squared_dist(centroid, lat.center(c));
            if (d2 < best) {
                best = d2;
                best_p = lat.center(c);
            }
        }
        out.centroids.push_back(best_p);
    }
    return out;
}

std::optional<int> select_nbv(const FrontierClusters& clusters, const ExplorationState& state,
                              const Session& session, const std::set<int>& blacklist) {
    const PlanContext ctx = session.context();
    double best = std::numeric_limits<double>::infinity();
    int best_i = -1;
    for (size_t i = 0; i < clusters.centroids.size(); ++i) {
        const Vec2 c = clusters.centroids[i];
        if (blacklist.count(session.occupancy.lattice.index(session.occupancy.lattice.cell_at(c))))
            continue;
        const double t = estimate(ctx, state.robot.position, c, session.planner);
        if (t < best) {
            best = t;
            best_i = static_cast<int>(i);
        }
    }
    if (best_i < 0 || !std::isfinite(best)) return std::nullopt;
    return best_i;
}

namespace {

std::vector<Vec2> resample_polyline(const std::vector<Vec2>& pts, double spacing) {
    std::vector<Vec2> out;
    if (pts.empty()) return out;
    out.push_back(pts.front());
    double carried = 0.0;
    for (size_t i = 1; i < pts.size(); ++i) {
        Vec2 a = pts[i - 1];
        const Vec2 b = pts[i];
        double seg = (b - a).norm();
        while (carried + seg >= spacing) {
            const double t = (spacing - carried) / seg;
            a = {a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t};
            out.push_back(a);
            seg = (b - a).norm();
            carried = 0.0;
        }
        carried += seg;
    }
    if (!(out.back() == pts.back())) out.push_back(pts.back());
    return out;
}

// 4-connected BFS over FREE cells of the observed map
std::optional<std::vector<Vec2>> bfs_waypoints(const OccupancyMap& map, Vec2 from, Vec2 to,
                                               double spacing) {
    const Lattice& lat = map.lattice;
    const Cell s = lat.cell_at(from), g = lat.cell_at(to);
    if (!map.is_free(s) || !map.is_free(g)) return std::nullopt;
    std::vector<int32_t> parent(map.cells.size(), -2);
    std::deque<int> queue{lat.index(s)};
    parent[lat.index(s)] = -1;
    const int goal_idx = lat.index(g);
    while (!queue.empty() && parent[goal_idx] == -2) {
        const int idx = queue.front();
        queue.pop_front();
        const int r = idx / lat.width, c = idx % lat.width;
        for (const auto& d : {std::pair{-1, 0}, {0, -1}, {0, 1}, {1, 0}}) {
            const Cell nb{r + d.first, c + d.second};
            if (!lat.in_bounds(nb) || !map.is_free(nb)) continue;
            const int nidx = lat.index(nb);
            if (parent[nidx] != -2) continue;
            parent[nidx] = idx;
            queue.push_back(nidx);
        }
    }
    if (parent[goal_idx] == -2) return std::nullopt;
    std::vector<Vec2> pts;
    for (int idx = goal_idx; idx != -1; idx = parent[idx])
        pts.push_back(lat.center({idx / lat.width, idx % lat.width}));
    std::reverse(pts.begin(), pts.end());
    pts.front() = from;
    pts.back() = to;
    return resample_polyline(pts, spacing);
}

}  // namespace

std::vector<NetFrameReport> train_frame(Session& session, const DistanceIndex& index,
                                        uint64_t frame) {
    std::vector<NetFrameReport> reports;
    for (NetworkEntry& entry : session.registry.entries) {
        bool any_unconfirmed = false;
        for (int rid : entry.room_ids) {
            const Room* room = session.rooms.find(rid);
            if (!room || !room->confirmed) any_unconfirmed = true;
        }
        if (!any_unconfirmed && entry.steps_at_all_confirmed == 0)
            entry.steps_at_all_confirmed = std::max<uint64_t>(entry.net->train_steps(), 1);
        const bool fresh_assignment = entry.last_assign_frame == frame;
        const bool budget_left =
            any_unconfirmed ||
            entry.net->train_steps() <
                entry.steps_at_all_confirmed + static_cast<uint64_t>(session.train.post_confirm_steps);
        if (!(any_unconfirmed || fresh_assignment || budget_left)) continue;

        const auto t0 = Clock::now();
        NetFrameReport rep{frame, entry.net->id(), {}, 0.0};
        for (int s = 0; s < session.train.steps_per_frame; ++s) {
            const uint64_t seed =
                mix_seed(session.train.seed, frame * 1024 + s, static_cast<uint64_t>(entry.net->id()));
            auto batch = sample_batch(session.occupancy, index, entry.net->bbox(), session.sampler,
                                      seed, entry.net->id());
            if (!batch) break;  // nothing observable in the box this frame
            rep.loss = train_step(*entry.net, *batch, session.train, entry.adam);
        }
        rep.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
        reports.push_back(rep);
    }
    return reports;
}

ExploreEvent explore_step(ExplorationState& state, const GroundTruthMap& world, Session& session,
                          ExploreLogs& logs) {
    const auto frame_start = Clock::now();
    OccupancyMap& map = session.occupancy;
    const Lattice& lat = map.lattice;
    if (state.first_observer.empty()) state.first_observer.resize(map.cells.size());

    // observe
    const DepthScan scan =
        cast_scan(world, state.robot, session.explorer.n_beams, session.explorer.max_range);
    const std::vector<uint8_t> before = map.cells;
    integrate_scan(map, scan);
    for (size_t i = 0; i < map.cells.size(); ++i)
        if (before[i] != map.cells[i]) state.first_observer[i] = state.robot.position;

    const DistanceIndex index(map, ObstacleMask::NonFree);

    // re-segment and refresh the graph
    session.rooms = segment(map, state.frame == 0 ? nullptr : &session.rooms, session.segmenter);
    classify(session.rooms, map);
    session.eps = detect_entry_points(session.rooms, map, state.frame == 0 ? nullptr : &session.eps);
    for (const Room& room : session.rooms.rooms) {
        if (!room.confirmed || session.registry.entry_of_room(room.id)) continue;
        const int nid = assign_subnetwork(session.registry, room, session.eps, session.nav);
        if (NetworkEntry* e = session.registry.entry_of_net(nid)) e->last_assign_frame = state.frame;
    }
    update_graph(session.graph, session.rooms, session.eps, session.registry);

    // online training
    auto reports = train_frame(session, index, state.frame);
    logs.training.insert(logs.training.end(), reports.begin(), reports.end());

    // frontiers
    const auto frontiers = frontier_cells(map);
    const auto clusters = cluster_frontiers(frontiers, lat, session.explorer.dbscan_eps,
                                            session.explorer.dbscan_min_pts);
    const Pose scan_pose = state.robot;
    auto finish = [&](ExploreEvent ev) {
        state.history.push_back({state.frame, scan_pose, ev});
        logs.events.push_back({state.frame, ev, state.robot, state.nbv, frontiers.size(),
                               clusters.clusters.size()});
        logs.frame_seconds.push_back(std::chrono::duration<double>(Clock::now() - frame_start).count());
        ++state.frame;
        return ev;
    };

    if (frontiers.empty() || clusters.clusters.empty()) return finish(ExploreEvent::Done);

    ExploreEvent event = ExploreEvent::Progress;
    if (!state.nbv) {
        const auto pick = select_nbv(clusters, state, session, state.blacklist);
        if (!pick) return finish(ExploreEvent::Stalled);
        state.nbv = clusters.centroids[*pick];
        state.nbv_was_deferred = false;
        state.pursuing_backtrack = false;
        const Cell nbv_cell = lat.cell_at(*state.nbv);
        state.nbv_origin = Pose{state.first_observer[lat.index(nbv_cell)], 0.0};
        event = ExploreEvent::Select;
    }

    // plan toward the target: hierarchical when both ends live in confirmed
    // rooms with networks, observed-grid search otherwise
    const Vec2 target = *state.nbv;
    std::optional<std::vector<Vec2>> waypoints;
    try {
        const PlanContext ctx = session.context();
        const int sr = locate_room(state.robot.position, ctx, session.planner);
        const int gr = locate_room(target, ctx, session.planner);
        const Room* a = session.rooms.find(sr);
        const Room* b = session.rooms.find(gr);
        if (a && b && a->confirmed && b->confirmed && session.registry.entry_of_room(sr) &&
            session.registry.entry_of_room(gr)) {
            Path p = plan(ctx, state.robot.position, target, session.planner);
            if (path_collision_free(map, p, lat.resolution / 2.0))
                waypoints = resample_polyline(p.vertices, session.explorer.waypoint_spacing);
        }
    } catch (const Error&) {
        waypoints.reset();
    }
    if (!waypoints)
        waypoints = bfs_waypoints(map, state.robot.position, target, session.explorer.waypoint_spacing);

    auto fail_branch = [&]() {
        if (state.nbv_was_deferred) {
            state.blacklist.insert(lat.index(lat.cell_at(target)));
            state.nbv.reset();
            state.pending_nbv.reset();
            state.nbv_was_deferred = false;
            state.pursuing_backtrack = false;
            return finish(ExploreEvent::Abandon);
        }
        state.pending_nbv = state.nbv;
        state.nbv = state.nbv_origin.position;
        state.nbv_was_deferred = false;
        state.pursuing_backtrack = true;
        return finish(ExploreEvent::Backtrack);
    };

    const size_t plan_steps = waypoints ? waypoints->size() - 1 : 0;
    if (waypoints) {
        int advanced = 0;
        for (size_t i = 1; i < waypoints->size() && advanced < session.explorer.step_budget; ++i) {
            const Vec2 next = (*waypoints)[i];
            if (!is_free(world, next))
                throw NumericError("explore_step: waypoint leaves ground-truth free space");
            const Vec2 prev = state.robot.position;
            state.robot.position = next;
            if (!(next == prev)) state.robot.heading = std::atan2(next.y - prev.y, next.x - prev.x);
            ++advanced;
        }
    }

    if ((state.robot.position - target).norm() <= session.explorer.reach_tolerance) {
        state.nbv.reset();
        state.nbv_was_deferred = false;
        state.pursuing_backtrack = false;
        if (state.pending_nbv) {
            state.nbv = state.pending_nbv;
            state.pending_nbv.reset();
            state.nbv_was_deferred = true;
            const Cell cell = lat.cell_at(*state.nbv);
            state.nbv_origin = Pose{state.first_observer[lat.index(cell)], 0.0};
        }
        return finish(ExploreEvent::Reached);
    }

    // not reached: the observation pose itself stays a multi-frame trip,
    // anything else out of budget (or without a plan) is deemed unreachable
    if (state.pursuing_backtrack && plan_steps > static_cast<size_t>(session.explorer.step_budget))
        return finish(event == ExploreEvent::Select ? ExploreEvent::Select : ExploreEvent::Progress);
    return fail_branch();
}

bool run_exploration(const GroundTruthMap& world, Pose start, Session& session, ExploreLogs& logs) {
    if (!is_free(world, start.position)) throw DomainError("run_exploration: start pose not free");
    const auto t0 = Clock::now();
    session.occupancy = OccupancyMap::unexplored(world.lattice);
    ExplorationState state;
    state.robot = start;

    bool done = false;
    while (state.frame < static_cast<uint64_t>(session.explorer.frame_cap)) {
        const ExploreEvent ev = explore_step(state, world, session, logs);
        if (ev == ExploreEvent::Done) {
            done = true;
            break;
        }
        if (ev == ExploreEvent::Stalled) {
            logs.warning = "exploration stalled: unreachable frontier clusters remain";
            done = true;
            break;
        }
    }
    session.frames = state.frame;
    session.complete = done;

    // finish the per-network training budgets without moving the robot
    const DistanceIndex index(session.occupancy, ObstacleMask::NonFree);
    for (int sweep = 0; sweep < session.explorer.final_training_sweeps; ++sweep) {
        auto reports = train_frame(session, index, state.frame + sweep);
        if (reports.empty()) break;
        logs.training.insert(logs.training.end(), reports.begin(), reports.end());
    }
    logs.mapping_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return done;
}

std::string ExploreLogs::events_csv() const {
    std::ostringstream out;
    out << "frame,event,robot_x,robot_y,nbv_x,nbv_y,n_frontier,n_clusters\n";
    for (const FrameLog& f : events) {
        out << f.frame << ',' << event_name(f.event) << ',' << f.robot.position.x << ','
            << f.robot.position.y << ',';
        if (f.nbv)
            out << f.nbv->x << ',' << f.nbv->y;
        else
            out << ",";
        out << ',' << f.n_frontier << ',' << f.n_clusters << '\n';
    }
    return out.str();
}

std::string ExploreLogs::training_csv() const {
    std::ostringstream out;
    out << "frame,network,L_E,L_TD,L_N,L_total,FT_seconds\n";
    for (const NetFrameReport& r : training)
        out << r.frame << ',' << r.net_id << ',' << r.loss.eikonal << ',' << r.loss.td << ','
            << r.loss.normal << ',' << r.loss.total << ',' << r.seconds << '\n';
    return out.str();
}

}  // namespace mnav
