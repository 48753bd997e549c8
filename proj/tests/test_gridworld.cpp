#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "fixtures.hpp"
#include "mnav/error.hpp"
#include "mnav/gridworld.hpp"
#include "mnav/rng.hpp"

using namespace mnav;

TEST_CASE("ascii map with existing border stays as-is") {
    const GroundTruthMap m = parse_ascii_map("###\n#.#\n###\n", 0.1);
    CHECK(m.lattice.width == 3);
    CHECK(m.lattice.height == 3);
    int occ = 0;
    for (auto v : m.occupied) occ += v;
    CHECK(occ == 8);
    CHECK_FALSE(m.is_occupied({1, 1}));
}

TEST_CASE("ascii map without border gets a closed rim") {
    const GroundTruthMap m = parse_ascii_map("...\n...\n...\n", 0.1);
    CHECK(m.lattice.width == 5);
    CHECK(m.lattice.height == 5);
    for (int c = 0; c < 5; ++c) {
        CHECK(m.is_occupied({0, c}));
        CHECK(m.is_occupied({4, c}));
    }
    int occ = 0;
    for (auto v : m.occupied) occ += v;
    CHECK(occ == 16);
}

TEST_CASE("ragged rows raise a shape error") {
    CHECK_THROWS_AS(parse_ascii_map("#.#\n#.#\n#.#####\n", 0.1), ParseError);
}

TEST_CASE("pgm pixels below 128 become occupied") {
    const int w = 64, h = 64;
    std::vector<unsigned char> px(static_cast<size_t>(w) * h);
    Rng rng(77);
    int dark = 0;
    for (auto& p : px) {
        p = static_cast<unsigned char>(rng.below(256));
        if (p < 128) ++dark;
    }
    const std::string path = "test_map.pgm";
    {
        std::ofstream out(path, std::ios::binary);
        out << "P5\n# comment\n" << w << " " << h << "\n255\n";
        out.write(reinterpret_cast<const char*>(px.data()), px.size());
    }
    const GroundTruthMap m = load_map(path, 0.05);
    std::remove(path.c_str());

    // closure adds a rim iff the random border was not fully dark; count the
    // interior pixels independently
    const int off = m.lattice.width == w ? 0 : 1;
    int occ_in_map = 0;
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            if (m.is_occupied({r + off, c + off})) ++occ_in_map;
    CHECK(occ_in_map == dark);
}

TEST_CASE("truncated pgm reports the byte offset") {
    const std::string path = "trunc.pgm";
    {
        std::ofstream out(path, std::ios::binary);
        out << "P5\n8 8\n255\n";
        out << "abc";  // 3 of 64 payload bytes
    }
    CHECK_THROWS_WITH_AS(load_map(path, 0.1), doctest::Contains("byte offset"), ParseError);
    std::remove(path.c_str());
}

TEST_CASE("scan in an empty room hits the walls where expected") {
    // 10 m x 10 m interior at 0.1 m/cell; interior spans [0.1, 10.1)
    const GroundTruthMap m = parse_ascii_map(testutil::empty_room_ascii(100, 100), 0.1);
    const Pose pose{{5.1, 5.1}, 0.0};
    const DepthScan scan = cast_scan(m, pose, 4, 20.0);
    for (double r : scan.ranges) CHECK(r == doctest::Approx(5.0).epsilon(0.03));

    const DepthScan capped = cast_scan(m, pose, 8, 1.0);
    for (double r : capped.ranges) CHECK(r == 1.0);
}

TEST_CASE("scan from an occupied pose is rejected") {
    const GroundTruthMap m = parse_ascii_map("###\n#.#\n###\n", 0.1);
    CHECK_THROWS_AS(cast_scan(m, Pose{{0.05, 0.05}, 0.0}, 4, 5.0), DomainError);
}

TEST_CASE("scan soundness: hit cells occupied, traversed cells free") {
    const GroundTruthMap m = parse_ascii_map(testutil::two_room_ascii(15, 4, 3), 0.1);
    Rng rng(123);
    int checked = 0;
    while (checked < 20) {
        const Vec2 p{rng.uniform(0.0, m.lattice.width * 0.1),
                     rng.uniform(0.0, m.lattice.height * 0.1)};
        if (!is_free(m, p)) continue;
        ++checked;
        const DepthScan scan = cast_scan(m, Pose{p, rng.uniform(-M_PI, M_PI)}, 90, 4.0);
        for (size_t i = 0; i < scan.ranges.size(); ++i) {
            const double range = scan.ranges[i];
            const Vec2 dir{std::cos(scan.angles[i]), std::sin(scan.angles[i])};
            // independent re-walk by dense sampling
            for (double t = 0.0; t < range - 1e-6; t += 0.002) {
                CHECK(is_free(m, {p.x + dir.x * t, p.y + dir.y * t}));
            }
            if (range < scan.max_range) {
                const Vec2 past{p.x + dir.x * (range + 1e-9), p.y + dir.y * (range + 1e-9)};
                const Cell hit = m.lattice.cell_at(past);
                CHECK(m.is_occupied(hit));
            }
        }
    }
}

TEST_CASE("scan isotropy under quarter-turn rotation") {
    const int n = 31;  // square asymmetric map
    std::vector<std::string> rows(n, std::string(n, '.'));
    Rng rng(9);
    for (int i = 0; i < 60; ++i)
        rows[1 + rng.below(n - 2)][1 + rng.below(n - 2)] = '#';
    rows[19][14] = '.';  // the probe pose below lands here
    std::string text, rot_text;
    for (auto& r : rows) text += r + '\n';
    // rotate 90 degrees clockwise in row/col space: new[r][c] = old[n-1-c][r]
    std::vector<std::string> rot(n, std::string(n, '.'));
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) rot[r][c] = rows[n - 1 - c][r];
    for (auto& r : rot) rot_text += r + '\n';

    const double res = 0.1;
    const GroundTruthMap m1 = parse_ascii_map(text, res);
    const GroundTruthMap m2 = parse_ascii_map(rot_text, res);
    const int N = m1.lattice.width;  // after rim closure

    // generic position (off cell centers) so no beam crosses a cell corner
    const Vec2 p1{1.563, 2.041};
    // the rotation maps (x, y) -> (N*res - y, x)
    const Vec2 p2{N * res - p1.y, p1.x};
    if (is_free(m1, p1) && is_free(m2, p2)) {
        const DepthScan s1 = cast_scan(m1, Pose{p1, 0.0}, 360, 3.0);
        const DepthScan s2 = cast_scan(m2, Pose{p2, M_PI / 2.0}, 360, 3.0);
        for (int i = 0; i < 360; ++i)
            CHECK(s1.ranges[i] == doctest::Approx(s2.ranges[i]).epsilon(1e-12));
    } else {
        FAIL("fixture poses must be free");
    }
}

TEST_CASE("is_free agrees with direct cell lookup") {
    const GroundTruthMap m = parse_ascii_map(testutil::two_room_ascii(), 0.25);
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        const Vec2 p{rng.uniform(-0.5, m.lattice.width * 0.25 + 0.5),
                     rng.uniform(-0.5, m.lattice.height * 0.25 + 0.5)};
        const Cell c{static_cast<int>(std::floor(p.y / 0.25)), static_cast<int>(std::floor(p.x / 0.25))};
        const bool expect = c.row >= 0 && c.row < m.lattice.height && c.col >= 0 &&
                            c.col < m.lattice.width && !m.occupied[m.lattice.index(c)];
        CHECK(is_free(m, p) == expect);
    }
    CHECK_FALSE(is_free(m, {-1.0, -1.0}));
}

TEST_CASE("segment collision checks") {
    const GroundTruthMap m = parse_ascii_map(testutil::two_room_ascii(9, 3, 1), 0.1);
    const Vec2 a{0.45, 0.45};
    CHECK(segment_collision_free(m, a, a, 0.05));
    // crossing the outer wall
    CHECK_FALSE(segment_collision_free(m, a, {a.x, -0.5}, 0.05));

    // agreement with a 10x finer oracle on random segments
    Rng rng(42);
    for (int i = 0; i < 200; ++i) {
        const Vec2 p{rng.uniform(0.0, 2.2), rng.uniform(0.0, 1.1)};
        const Vec2 q{rng.uniform(0.0, 2.2), rng.uniform(0.0, 1.1)};
        if (!is_free(m, p) || !is_free(m, q)) continue;
        const bool coarse = segment_collision_free(m, p, q, 0.04);
        const bool fine = segment_collision_free(m, p, q, 0.004);
        if (coarse != fine) {
            // the only allowed disagreement: coarse step hopping a thin corner
            CHECK(coarse);
            CHECK_FALSE(fine);
        } else {
            CHECK(coarse == fine);
        }
    }
}
