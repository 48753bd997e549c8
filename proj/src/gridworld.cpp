#include "mnav/gridworld.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "mnav/error.hpp"

namespace mnav {

namespace {

bool has_closed_border(const std::vector<std::string>& rows) {
    const size_t h = rows.size(), w = rows[0].size();
    for (size_t c = 0; c < w; ++c)
        if (rows[0][c] != '#' || rows[h - 1][c] != '#') return false;
    for (size_t r = 0; r < h; ++r)
        if (rows[r][0] != '#' || rows[r][w - 1] != '#') return false;
    return true;
}

GroundTruthMap from_rows(std::vector<std::string> rows, double resolution) {
    if (rows.empty()) throw ParseError("map: no rows");
    for (size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows[0].size())
            throw ParseError("map: row " + std::to_string(r + 1) + " has length " +
                             std::to_string(rows[r].size()) + ", expected " +
                             std::to_string(rows[0].size()));
        for (size_t c = 0; c < rows[r].size(); ++c)
            if (rows[r][c] != '#' && rows[r][c] != '.')
                throw ParseError("map: bad symbol at row " + std::to_string(r + 1) + " col " +
                                 std::to_string(c + 1));
    }
    if (!has_closed_border(rows)) {
        const std::string rim(rows[0].size() + 2, '#');
        for (auto& row : rows) row = "#" + row + "#";
        rows.insert(rows.begin(), rim);
        rows.push_back(rim);
    }
    GroundTruthMap map;
    map.lattice = {static_cast<int>(rows[0].size()), static_cast<int>(rows.size()), resolution};
    map.occupied.resize(static_cast<size_t>(map.lattice.width) * map.lattice.height);
    for (int r = 0; r < map.lattice.height; ++r)
        for (int c = 0; c < map.lattice.width; ++c)
            map.occupied[map.lattice.index({r, c})] = rows[r][c] == '#' ? 1 : 0;
    return map;
}

GroundTruthMap load_pgm(std::istream& in, double resolution) {
    auto next_token = [&in]() -> std::string {
        std::string tok;
        while (in) {
            int ch = in.peek();
            if (ch == '#') {
                std::string line;
                std::getline(in, line);
                continue;
            }
            if (std::isspace(ch)) {
                in.get();
                continue;
            }
            break;
        }
        in >> tok;
        return tok;
    };
    if (next_token() != "P5") throw ParseError("pgm: expected magic P5");
    int w = 0, h = 0, maxval = 0;
    try {
        w = std::stoi(next_token());
        h = std::stoi(next_token());
        maxval = std::stoi(next_token());
    } catch (const std::exception&) {
        throw ParseError("pgm: malformed header");
    }
    if (w < 1 || h < 1) throw ParseError("pgm: bad dimensions");
    if (maxval != 255) throw ParseError("pgm: maxval must be 255");
    in.get();  // single whitespace after maxval
    std::vector<char> pixels(static_cast<size_t>(w) * h);
    in.read(pixels.data(), static_cast<std::streamsize>(pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(pixels.size()))
        throw ParseError("pgm: truncated at byte offset " +
                         std::to_string(static_cast<long long>(in.gcount())));

    std::vector<std::string> rows(h, std::string(static_cast<size_t>(w), '.'));
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            if (static_cast<unsigned char>(pixels[static_cast<size_t>(r) * w + c]) < 128)
                rows[r][c] = '#';
    return from_rows(std::move(rows), resolution);
}

}  // namespace

GroundTruthMap parse_ascii_map(const std::string& text, double resolution) {
    if (resolution <= 0.0) throw DomainError("map: resolution must be positive");
    std::vector<std::string> rows;
    std::string line;
    std::istringstream in(text);
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) rows.push_back(line);
    }
    return from_rows(std::move(rows), resolution);
}

GroundTruthMap load_map(const std::string& path, double resolution) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("map: cannot open " + path);
    if (in.peek() == 'P') {
        if (resolution <= 0.0) throw DomainError("map: resolution must be positive");
        return load_pgm(in, resolution);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_ascii_map(buf.str(), resolution);
}

DepthScan cast_scan(const GroundTruthMap& map, const Pose& pose, int n_beams, double max_range) {
    if (n_beams < 1) throw DomainError("cast_scan: n_beams must be >= 1");
    if (!is_free(map, pose.position))
        throw DomainError("cast_scan: pose is not in free space");

    DepthScan scan;
    scan.origin = pose;
    scan.max_range = max_range;
    scan.angles.reserve(n_beams);
    scan.ranges.reserve(n_beams);
    for (int i = 0; i < n_beams; ++i) {
        const double angle = wrap_angle(pose.heading + 2.0 * M_PI * i / n_beams);
        const Vec2 dir{std::cos(angle), std::sin(angle)};
        double range = max_range;
        walk_ray(map.lattice, pose.position, dir, max_range, [&](Cell c, double t) {
            if (map.occupied[map.lattice.index(c)]) {
                range = t;
                return false;
            }
            return true;
        });
        scan.angles.push_back(angle);
        scan.ranges.push_back(range);
    }
    return scan;
}

bool is_free(const GroundTruthMap& map, Vec2 point) {
    const Cell c = map.lattice.cell_at(point);
    return map.lattice.in_bounds(c) && map.occupied[map.lattice.index(c)] == 0;
}

bool segment_collision_free(const GroundTruthMap& map, Vec2 a, Vec2 b, double step) {
    if (step <= 0.0) throw DomainError("segment_collision_free: step must be positive");
    const double len = (b - a).norm();
    const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
    for (int i = 0; i <= n; ++i) {
        const double t = static_cast<double>(i) / n;
        if (!is_free(map, {a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t})) return false;
    }
    return true;
}

}  // namespace mnav
