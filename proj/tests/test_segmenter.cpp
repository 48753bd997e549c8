#include <doctest.h>

#include <deque>
#include <set>

#include "fixtures.hpp"
#include "mnav/error.hpp"
#include "mnav/segmenter.hpp"

using namespace mnav;

namespace {

// two 5x5-cell rooms joined by a 1-cell corridor, per the canonical example
OccupancyMap tiny_two_room() {
    const GroundTruthMap gt = parse_ascii_map(testutil::two_room_ascii(5, 3, 1), 0.1);
    return testutil::full_knowledge(gt);
}

SegmenterConfig tiny_cfg() {
    SegmenterConfig cfg;
    cfg.erosion_radius = 1;
    cfg.min_room_area = 0.05;  // 5 cells at 0.1 m
    return cfg;
}

}  // namespace

TEST_CASE("a sealed corridor yields exactly two rooms") {
    const OccupancyMap m = tiny_two_room();
    const RoomSet rooms = segment(m, nullptr, tiny_cfg());
    REQUIRE(rooms.rooms.size() == 2);

    // independent oracle: dilate by checking the disk offsets directly
    size_t surviving = 0;
    for (int r = 0; r < m.lattice.height; ++r) {
        for (int c = 0; c < m.lattice.width; ++c) {
            if (!m.is_free(Cell{r, c})) continue;
            bool near_wall = false;
            for (int dr = -1; dr <= 1 && !near_wall; ++dr)
                for (int dc = -1; dc <= 1 && !near_wall; ++dc)
                    if (dr * dr + dc * dc <= 1 &&
                        m.is_state({r + dr, c + dc}, CellState::Occupied))
                        near_wall = true;
            if (!near_wall) ++surviving;
        }
    }
    CHECK(rooms.rooms[0].cells.size() + rooms.rooms[1].cells.size() == surviving);
    // the corridor is sealed: no room cell lies in the corridor columns
    for (const Room& room : rooms.rooms)
        for (int idx : room.cells) {
            const int col = idx % m.lattice.width;
            CHECK((col < 6 || col > 8));
        }
}

TEST_CASE("a single convex room keeps everything but the wall margin") {
    const GroundTruthMap gt = parse_ascii_map(testutil::empty_room_ascii(20, 14), 0.1);
    const OccupancyMap m = testutil::full_knowledge(gt);
    const RoomSet rooms = segment(m, nullptr, tiny_cfg());
    REQUIRE(rooms.rooms.size() == 1);
    CHECK(rooms.rooms[0].cells.size() == 18u * 12u);
}

TEST_CASE("re-running segmentation on an unchanged map is identical") {
    const OccupancyMap m = tiny_two_room();
    const RoomSet first = segment(m, nullptr, tiny_cfg());
    const RoomSet second = segment(m, &first, tiny_cfg());
    REQUIRE(first.rooms.size() == second.rooms.size());
    for (size_t i = 0; i < first.rooms.size(); ++i) {
        CHECK(first.rooms[i].id == second.rooms[i].id);
        CHECK(first.rooms[i].cells == second.rooms[i].cells);
    }
}

TEST_CASE("classification latches confirmations") {
    OccupancyMap m = tiny_two_room();
    // hide a corner of the right room: that room must stay unconfirmed
    const Cell hidden{1, 10};
    m.cells[m.lattice.index(hidden)] = static_cast<uint8_t>(CellState::Unexplored);
    RoomSet rooms = segment(m, nullptr, tiny_cfg());
    classify(rooms, m);
    int confirmed = 0, unconfirmed = 0;
    for (const Room& r : rooms.rooms) (r.confirmed ? confirmed : unconfirmed)++;
    CHECK(confirmed == 1);
    CHECK(unconfirmed == 1);

    // observe the corner: now everything confirms and stays confirmed
    m.cells[m.lattice.index(hidden)] = static_cast<uint8_t>(CellState::Free);
    ++m.version;
    RoomSet rooms2 = segment(m, &rooms, tiny_cfg());
    classify(rooms2, m);
    for (const Room& r : rooms2.rooms) CHECK(r.confirmed);

    // a confirmed room's cells never change afterwards
    const Room* left_before = rooms2.find(0);
    OccupancyMap m3 = m;
    ++m3.version;
    RoomSet rooms3 = segment(m3, &rooms2, tiny_cfg());
    const Room* left_after = rooms3.find(0);
    REQUIRE(left_before != nullptr);
    REQUIRE(left_after != nullptr);
    CHECK(left_before->cells == left_after->cells);
}

TEST_CASE("classify rejects a stale map") {
    OccupancyMap m = tiny_two_room();
    RoomSet rooms = segment(m, nullptr, tiny_cfg());
    ++m.version;
    CHECK_THROWS_AS(classify(rooms, m), DomainError);
}

TEST_CASE("a doorway produces one entry point between the right rooms") {
    const OccupancyMap m = tiny_two_room();
    RoomSet rooms = segment(m, nullptr, tiny_cfg());
    classify(rooms, m);
    const EntryPointSet eps = detect_entry_points(rooms, m, nullptr);
    REQUIRE(eps.points.size() == 1);
    const EntryPoint& ep = eps.points[0];
    CHECK(ep.room_a == 0);
    CHECK(ep.room_b == 1);
    // the doorway midpoint: corridor runs at row 3, columns 6..8
    CHECK(ep.position.y == doctest::Approx(0.35));
    CHECK(ep.position.x == doctest::Approx(0.75).epsilon(0.15));
    CHECK(m.is_free(ep.position));

    // ids persist when nothing changed
    const EntryPointSet again = detect_entry_points(rooms, m, &eps);
    REQUIRE(again.points.size() == 1);
    CHECK(again.points[0].id == eps.points[0].id);
}

TEST_CASE("a T junction emits one entry point per adjacent room pair") {
    // three rooms around a junction: left, right, and bottom
    std::vector<std::string> rows(17, std::string(17, '#'));
    auto carve = [&](int x0, int y0, int x1, int y1) {
        for (int y = y0; y < y1; ++y)
            for (int x = x0; x < x1; ++x) rows[y][x] = '.';
    };
    carve(1, 1, 7, 8);    // left room
    carve(10, 1, 16, 8);  // right room
    carve(5, 11, 12, 16); // bottom room
    carve(7, 4, 10, 6);   // left-right doorway corridor (2 cells wide)
    carve(8, 6, 10, 11);  // junction stem down (2 cells wide)
    std::string text;
    for (auto& r : rows) text += r + '\n';
    const GroundTruthMap gt = parse_ascii_map(text, 0.1);
    const OccupancyMap m = testutil::full_knowledge(gt);
    SegmenterConfig cfg;
    cfg.erosion_radius = 1;
    cfg.min_room_area = 0.15;
    RoomSet rooms = segment(m, nullptr, cfg);
    classify(rooms, m);
    REQUIRE(rooms.rooms.size() == 3);
    const EntryPointSet eps = detect_entry_points(rooms, m, nullptr);
    // pairs present among entry points
    std::set<std::pair<int, int>> pairs;
    for (const auto& p : eps.points) pairs.insert({p.room_a, p.room_b});
    CHECK(pairs.size() >= 2);
    for (const auto& p : eps.points) {
        CHECK(p.room_a != p.room_b);
        CHECK(m.is_free(p.position));
    }
}

TEST_CASE("coverage: every free cell is roomed, doored, or hugging a wall") {
    const OccupancyMap m = tiny_two_room();
    RoomSet rooms = segment(m, nullptr, tiny_cfg());
    classify(rooms, m);
    const EntryPointSet eps = detect_entry_points(rooms, m, nullptr);
    const DistanceIndex walls(m, ObstacleMask::OccupiedOnly);
    for (int r = 0; r < m.lattice.height; ++r) {
        for (int c = 0; c < m.lattice.width; ++c) {
            if (!m.is_free(Cell{r, c})) continue;
            const int idx = m.lattice.index({r, c});
            const bool roomed = rooms.label_grid[idx] >= 0;
            const bool doored = eps.doorway_grid[idx] >= 0;
            const bool margin = walls.squared_cells({r, c}) <= 1;
            CHECK((roomed || doored || margin));
        }
    }
}

TEST_CASE("entry points stay 4-connected to both linked rooms") {
    const OccupancyMap m = tiny_two_room();
    RoomSet rooms = segment(m, nullptr, tiny_cfg());
    const EntryPointSet eps = detect_entry_points(rooms, m, nullptr);
    REQUIRE(eps.points.size() == 1);
    // flood from the entry point over FREE cells and check both rooms appear
    const Lattice& lat = m.lattice;
    std::vector<uint8_t> seen(m.cells.size(), 0);
    std::deque<Cell> queue{lat.cell_at(eps.points[0].position)};
    seen[lat.index(queue.front())] = 1;
    bool hit_a = false, hit_b = false;
    while (!queue.empty()) {
        const Cell cur = queue.front();
        queue.pop_front();
        const int label = rooms.label_grid[lat.index(cur)];
        if (label == eps.points[0].room_a) hit_a = true;
        if (label == eps.points[0].room_b) hit_b = true;
        for (const auto& d : {std::pair{-1, 0}, {0, -1}, {0, 1}, {1, 0}}) {
            const Cell nb{cur.row + d.first, cur.col + d.second};
            if (!lat.in_bounds(nb) || !m.is_free(nb) || seen[lat.index(nb)]) continue;
            seen[lat.index(nb)] = 1;
            queue.push_back(nb);
        }
    }
    CHECK(hit_a);
    CHECK(hit_b);
}
