#include <doctest.h>

#include <functional>

#include "fixtures.hpp"
#include "mnav/error.hpp"
#include "mnav/navgraph.hpp"
#include "mnav/rng.hpp"

using namespace mnav;

namespace {

NetConfig small_net_config() {
    NetConfig cfg;
    cfg.n_fourier = 8;
    cfg.hidden_width = 8;
    cfg.n_blocks = 1;
    cfg.a = 4;
    cfg.b = 4;
    cfg.fourier_scale = 1.0;
    cfg.seed = 5;
    return cfg;
}

Room make_room(int id, BBox box, bool confirmed = true) {
    Room r;
    r.id = id;
    r.bbox = box;
    r.confirmed = confirmed;
    return r;
}

}  // namespace

TEST_CASE("subnetwork assignment follows the three conditions") {
    SubnetworkRegistry reg;
    reg.net_config = small_net_config();
    NavGraphConfig cfg;
    cfg.overlap_frac = 0.3;
    cfg.max_side = 12.0;
    cfg.bbox_margin = 0.5;

    EntryPointSet eps;
    eps.points.push_back({0, {5.0, 2.5}, 0, 1});
    eps.points.push_back({1, {10.0, 2.5}, 1, 2});
    eps.next_ep_id = 2;

    const Room r0 = make_room(0, {{0, 0}, {5, 5}});

    SUBCASE("the first confirmed room opens a fresh network") {
        const int id = assign_subnetwork(reg, r0, eps, cfg);
        CHECK(id == 0);
        REQUIRE(reg.entries.size() == 1);
        CHECK(reg.entries[0].net->bbox().lo.x == doctest::Approx(-0.5));
        CHECK(reg.entries[0].net->bbox().hi.x == doctest::Approx(5.5));
    }
    SUBCASE("an adjacent overlapping room joins") {
        assign_subnetwork(reg, r0, eps, cfg);
        // 40% of its box overlaps the inflated net box; shares entry point 0
        const Room r1 = make_room(1, {{3.5, 0}, {8.5, 5}});
        const int id = assign_subnetwork(reg, r1, eps, cfg);
        CHECK(id == 0);
        CHECK(reg.entries.size() == 1);
        CHECK(reg.entries[0].room_ids.size() == 2);
        // the union box absorbed the newcomer
        CHECK(reg.entries[0].net->bbox().hi.x >= 9.0 - 1e-9);
    }
    SUBCASE("an oversize union forces a new network despite (1) and (2)") {
        assign_subnetwork(reg, r0, eps, cfg);
        cfg.max_side = 8.0;
        const Room r1 = make_room(1, {{3.5, 0}, {8.5, 5}});
        const int id = assign_subnetwork(reg, r1, eps, cfg);
        CHECK(id == 1);
        CHECK(reg.entries.size() == 2);
    }
    SUBCASE("a connected but non-overlapping room opens a new network") {
        assign_subnetwork(reg, r0, eps, cfg);
        const Room r1 = make_room(1, {{7.0, 0}, {12.0, 5}});  // overlap 0 with inflated box? tiny
        const int id = assign_subnetwork(reg, r1, eps, cfg);
        CHECK(id == 1);
    }
    SUBCASE("unconfirmed or duplicate rooms are rejected") {
        CHECK_THROWS_AS(assign_subnetwork(reg, make_room(3, {{0, 0}, {1, 1}}, false), eps, cfg),
                        DomainError);
        assign_subnetwork(reg, r0, eps, cfg);
        CHECK_THROWS_AS(assign_subnetwork(reg, r0, eps, cfg), DomainError);
    }
}

TEST_CASE("graph construction: nodes per side, doorway and intraroom edges") {
    // two rooms, one doorway
    SubnetworkRegistry reg;
    reg.net_config = small_net_config();
    NavGraphConfig ncfg;

    RoomSet rooms;
    rooms.next_room_id = 2;
    Room a = make_room(0, {{0, 0}, {5, 5}});
    Room b = make_room(1, {{5.2, 0}, {10.2, 5}});
    rooms.rooms = {a, b};

    EntryPointSet eps;
    eps.points.push_back({0, {5.1, 2.5}, 0, 1});
    eps.next_ep_id = 1;

    assign_subnetwork(reg, a, eps, ncfg);
    assign_subnetwork(reg, b, eps, ncfg);

    NavGraph g;
    update_graph(g, rooms, eps, reg);
    CHECK(g.nodes.size() == 2);
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges[0].kind == EdgeKind::Doorway);
    CHECK(g.edges[0].weight == 0.0);

    SUBCASE("three entry points in one room form a triangle") {
        eps.points.push_back({1, {2.5, 5.0}, 0, 2});
        eps.points.push_back({2, {0.0, 2.5}, 0, 3});
        eps.next_ep_id = 3;
        rooms.rooms.push_back(make_room(2, {{0, 5.2}, {5, 10}}, false));
        rooms.rooms.push_back(make_room(3, {{-5.2, 0}, {-0.2, 5}}, false));
        rooms.next_room_id = 4;
        NavGraph g2;
        update_graph(g2, rooms, eps, reg);
        // room 0 has 3 nodes -> C(3,2)=3 intraroom edges
        int intraroom = 0, doorway = 0;
        for (const auto& e : g2.edges) (e.kind == EdgeKind::IntraRoom ? intraroom : doorway)++;
        CHECK(intraroom == 3);
        CHECK(doorway == 3);
        // weights are symmetric positive travel times
        for (const auto& e : g2.edges)
            if (e.kind == EdgeKind::IntraRoom) CHECK(e.weight > 0.0);
    }
    SUBCASE("node ids persist across updates") {
        const int first_id = g.nodes[0].id;
        NavGraph g2 = g;
        update_graph(g2, rooms, eps, reg);
        CHECK(g2.nodes[0].id == first_id);
        CHECK(g2.version == g.version + 1);
    }
}

TEST_CASE("edge weights are a symmetric pseudometric") {
    SubnetworkRegistry reg;
    reg.net_config = small_net_config();
    Subnetwork net(0, reg.net_config, {{0, 0}, {6, 6}}, 0.6);
    const Vec2 a{1.0, 2.0}, b{4.0, 3.5};
    CHECK(edge_weight(net, a, a) == 0.0);
    CHECK(edge_weight(net, a, b) == edge_weight(net, b, a));
    CHECK_THROWS_AS(edge_weight(net, a, {7.0, 1.0}), DomainError);
}

TEST_CASE("dijkstra: chain, identity, and brute-force agreement") {
    NavGraph g;
    auto add_node = [&](int id) {
        g.nodes.push_back({id, id, 0, {0, 0}});
    };
    for (int i = 0; i < 3; ++i) add_node(i);
    g.edges.push_back({0, 1, 1.0, EdgeKind::IntraRoom});
    g.edges.push_back({1, 2, 2.0, EdgeKind::IntraRoom});

    SUBCASE("simple chain") {
        const RouteResult r = shortest_node_sequence(g, {{0, 0.0}}, {{2, 0.0}});
        CHECK(r.cost == 3.0);
        CHECK(r.nodes == std::vector<int>{0, 1, 2});
    }
    SUBCASE("start equals goal") {
        const RouteResult r = shortest_node_sequence(g, {{1, 0.0}}, {{1, 0.0}});
        CHECK(r.cost == 0.0);
        CHECK(r.nodes == std::vector<int>{1});
    }
    SUBCASE("unreachable components are reported") {
        add_node(7);  // isolated
        CHECK_THROWS_AS(shortest_node_sequence(g, {{0, 0.0}}, {{7, 0.0}}), UnreachableError);
    }
    SUBCASE("random graphs match exhaustive path enumeration") {
        Rng rng(31);
        for (int trial = 0; trial < 25; ++trial) {
            NavGraph rg;
            const int n = 6 + static_cast<int>(rng.below(6));
            for (int i = 0; i < n; ++i) rg.nodes.push_back({i, i, 0, {0, 0}});
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j)
                    if (rng.uniform() < 0.4)
                        rg.edges.push_back({i, j, rng.uniform(0.2, 3.0), EdgeKind::IntraRoom});
            const int s = static_cast<int>(rng.below(n));
            const int t = static_cast<int>(rng.below(n));

            // exhaustive DFS over simple paths
            std::vector<std::vector<std::pair<int, double>>> adj(n);
            for (const auto& e : rg.edges) {
                adj[e.u].emplace_back(e.v, e.weight);
                adj[e.v].emplace_back(e.u, e.weight);
            }
            double best = std::numeric_limits<double>::infinity();
            std::vector<uint8_t> used(n, 0);
            std::function<void(int, double)> dfs = [&](int u, double cost) {
                if (u == t) {
                    best = std::min(best, cost);
                    return;
                }
                for (const auto& [v, w] : adj[u]) {
                    if (used[v]) continue;
                    used[v] = 1;
                    dfs(v, cost + w);
                    used[v] = 0;
                }
            };
            used[s] = 1;
            dfs(s, 0.0);

            if (std::isfinite(best)) {
                const RouteResult r = shortest_node_sequence(rg, {{s, 0.0}}, {{t, 0.0}});
                CHECK(r.cost == doctest::Approx(best).epsilon(1e-12));
            } else {
                CHECK_THROWS_AS(shortest_node_sequence(rg, {{s, 0.0}}, {{t, 0.0}}),
                                UnreachableError);
            }
        }
    }
    SUBCASE("cost is invariant under edge insertion order") {
        NavGraph shuffled = g;
        std::swap(shuffled.edges[0], shuffled.edges[1]);
        const RouteResult r1 = shortest_node_sequence(g, {{0, 0.0}}, {{2, 0.0}});
        const RouteResult r2 = shortest_node_sequence(shuffled, {{0, 0.0}}, {{2, 0.0}});
        CHECK(r1.cost == r2.cost);
        CHECK(r1.nodes == r2.nodes);
    }
    SUBCASE("equal-cost routes pick the smallest node sequence") {
        NavGraph tie;
        for (int i = 0; i < 4; ++i) tie.nodes.push_back({i, i, 0, {0, 0}});
        tie.edges.push_back({0, 1, 1.0, EdgeKind::IntraRoom});
        tie.edges.push_back({1, 3, 1.0, EdgeKind::IntraRoom});
        tie.edges.push_back({0, 2, 1.0, EdgeKind::IntraRoom});
        tie.edges.push_back({2, 3, 1.0, EdgeKind::IntraRoom});
        const RouteResult r = shortest_node_sequence(tie, {{0, 0.0}}, {{3, 0.0}});
        CHECK(r.nodes == std::vector<int>{0, 1, 3});
    }
}
