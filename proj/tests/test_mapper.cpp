#include <doctest.h>

#include "fixtures.hpp"
#include "mnav/error.hpp"
#include "mnav/mapper.hpp"
#include "mnav/rng.hpp"

using namespace mnav;

namespace {

// row-major brute force keeping the first strict improvement
ObstacleQuery brute_nearest(const OccupancyMap& map, Vec2 q, ObstacleMask mask) {
    ObstacleQuery best;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (int r = 0; r < map.lattice.height; ++r) {
        for (int c = 0; c < map.lattice.width; ++c) {
            const CellState s = map.at({r, c});
            const bool obstacle =
                mask == ObstacleMask::NonFree ? s != CellState::Free : s == CellState::Occupied;
            if (!obstacle) continue;
            const Vec2 p = map.lattice.center({r, c});
            const double d2 = squared_dist(q, p);
            if (d2 < best_d2) {
                best_d2 = d2;
                best = {std::sqrt(d2), p, {r, c}};
            }
        }
    }
    return best;
}

OccupancyMap observed_two_room() {
    const GroundTruthMap gt = parse_ascii_map(testutil::two_room_ascii(9, 3, 1), 0.1);
    return testutil::full_knowledge(gt);
}

}  // namespace

TEST_CASE("zero-beam scan only bumps the version") {
    OccupancyMap m = OccupancyMap::unexplored({10, 10, 0.1});
    DepthScan scan;
    scan.origin = Pose{{0.5, 0.5}, 0.0};
    scan.max_range = 2.0;
    const auto before = m.cells;
    integrate_scan(m, scan);
    CHECK(m.version == 1);
    CHECK(m.cells == before);
}

TEST_CASE("single beam marks free cells then one occupied cell") {
    const GroundTruthMap gt = parse_ascii_map(testutil::empty_room_ascii(40, 5), 0.1);
    OccupancyMap m = OccupancyMap::unexplored(gt.lattice);
    const Pose pose{{0.15, 0.25}, 0.0};
    DepthScan scan = cast_scan(gt, pose, 1, 10.0);  // +x beam, wall at x = 4.1
    REQUIRE(scan.ranges[0] == doctest::Approx(4.1 - 0.15));
    integrate_scan(m, scan);
    CHECK(m.count(CellState::Occupied) == 1);
    CHECK(m.is_state({2, 41}, CellState::Occupied));
    // the beam origin cell plus every cell strictly before the wall
    CHECK(m.count(CellState::Free) == 40);
}

TEST_CASE("integration is idempotent and monotone") {
    const GroundTruthMap gt = parse_ascii_map(testutil::two_room_ascii(9, 3, 1), 0.1);
    OccupancyMap m = OccupancyMap::unexplored(gt.lattice);
    Rng rng(3);
    size_t unexplored_before = m.count(CellState::Unexplored);
    for (int i = 0; i < 5; ++i) {
        Vec2 p;
        do {
            p = {rng.uniform(0.0, 2.2), rng.uniform(0.0, 1.1)};
        } while (!is_free(gt, p));
        const DepthScan scan = cast_scan(gt, Pose{p, 0.3}, 180, 3.0);
        integrate_scan(m, scan);
        const size_t after = m.count(CellState::Unexplored);
        CHECK(after <= unexplored_before);
        unexplored_before = after;

        OccupancyMap twice = m;
        integrate_scan(twice, scan);
        CHECK(twice.cells == m.cells);
        CHECK(twice.version == m.version + 1);
    }
    // soundness against ground truth
    for (int r = 0; r < m.lattice.height; ++r) {
        for (int c = 0; c < m.lattice.width; ++c) {
            if (m.is_state({r, c}, CellState::Free)) CHECK_FALSE(gt.occupied[gt.lattice.index({r, c})]);
            if (m.is_state({r, c}, CellState::Occupied)) CHECK(gt.occupied[gt.lattice.index({r, c})]);
        }
    }
}

TEST_CASE("nearest obstacle: adjacent wall and exact ties") {
    OccupancyMap m = occupancy_from_ascii(
        "#####\n"
        "#...#\n"
        "#...#\n"
        "#...#\n"
        "#####\n",
        0.1);
    m.version = 1;
    const DistanceIndex idx(m, ObstacleMask::NonFree);

    // one cell from the top wall
    const auto q1 = nearest_obstacle(m, idx, m.lattice.center({1, 2}));
    CHECK(q1.distance == doctest::Approx(0.1));
    CHECK(q1.cell == Cell{0, 2});

    // exact center: four walls equidistant, row-major winner is the top wall
    const auto q2 = nearest_obstacle(m, idx, m.lattice.center({2, 2}));
    CHECK(q2.distance == doctest::Approx(0.2));
    CHECK(q2.cell == Cell{0, 2});

    CHECK_THROWS_AS(nearest_obstacle(m, idx, m.lattice.center({0, 0})), DomainError);
}

TEST_CASE("nearest obstacle matches exhaustive scan on random points") {
    OccupancyMap m = observed_two_room();
    // carve some unexplored patches; they count as obstacles
    for (int r = 2; r < 5; ++r)
        for (int c = 12; c < 15; ++c)
            m.cells[m.lattice.index({r, c})] = static_cast<uint8_t>(CellState::Unexplored);
    const DistanceIndex idx(m, ObstacleMask::NonFree);
    Rng rng(11);
    int done = 0;
    while (done < 500) {
        const Vec2 q{rng.uniform(0.0, 2.2), rng.uniform(0.0, 1.1)};
        if (!m.is_free(q)) continue;
        ++done;
        const auto got = nearest_obstacle(m, idx, q);
        const auto want = brute_nearest(m, q, ObstacleMask::NonFree);
        CHECK(got.distance == want.distance);
        CHECK(got.cell == want.cell);
    }
}

TEST_CASE("distance field equals per-cell queries, including tie-breaks") {
    OccupancyMap m = observed_two_room();
    m.cells[m.lattice.index({3, 3})] = static_cast<uint8_t>(CellState::Occupied);
    const DistanceIndex idx(m, ObstacleMask::NonFree);
    const DistanceField field = distance_field(m, idx, m.lattice.bounds());
    for (int r = 0; r < m.lattice.height; ++r) {
        for (int c = 0; c < m.lattice.width; ++c) {
            const auto* e = field.at(r, c);
            if (!m.is_free(Cell{r, c})) {
                CHECK(e == nullptr);
                continue;
            }
            REQUIRE(e != nullptr);
            const auto want = brute_nearest(m, m.lattice.center({r, c}), ObstacleMask::NonFree);
            CHECK(e->distance == doctest::Approx(want.distance).epsilon(1e-12));
            CHECK(e->cell == want.cell);
        }
    }
}

TEST_CASE("distance field windows") {
    OccupancyMap m = observed_two_room();
    const DistanceIndex idx(m);
    // 1x1 window next to a wall
    const Vec2 center = m.lattice.center({1, 1});
    const DistanceField one = distance_field(m, idx, {{center.x - 0.01, center.y - 0.01},
                                                      {center.x + 0.01, center.y + 0.01}});
    CHECK(one.rows * one.cols == 1);
    CHECK(one.at(1, 1) != nullptr);
    CHECK(one.at(1, 1)->distance == doctest::Approx(0.1));

    // all-occupied window: entries exist but none valid
    const DistanceField none = distance_field(m, idx, {{0.0, 0.0}, {0.05, 0.05}});
    CHECK(none.at(0, 0) == nullptr);
}

TEST_CASE("nearest obstacle distance is 1-Lipschitz") {
    OccupancyMap m = observed_two_room();
    const DistanceIndex idx(m);
    Rng rng(17);
    int done = 0;
    while (done < 300) {
        const Vec2 a{rng.uniform(0.0, 2.2), rng.uniform(0.0, 1.1)};
        const Vec2 b{a.x + rng.uniform(-0.3, 0.3), a.y + rng.uniform(-0.3, 0.3)};
        if (!m.is_free(a) || !m.is_free(b)) continue;
        ++done;
        const double da = idx.nearest(a).distance;
        const double db = idx.nearest(b).distance;
        CHECK(std::abs(da - db) <= (a - b).norm() + 1e-12);
    }
}

TEST_CASE("ascii snapshot round-trips") {
    OccupancyMap m = OccupancyMap::unexplored({5, 4, 0.1});
    m.cells[m.lattice.index({1, 2})] = static_cast<uint8_t>(CellState::Free);
    m.cells[m.lattice.index({2, 3})] = static_cast<uint8_t>(CellState::Occupied);
    const std::string text = to_ascii(m);
    const OccupancyMap back = occupancy_from_ascii(text, 0.1);
    CHECK(back.cells == m.cells);
    CHECK(text.find('U') != std::string::npos);
}
