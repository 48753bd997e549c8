#include "mnav/mapper.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "mnav/error.hpp"

namespace mnav {

size_t OccupancyMap::count(CellState s) const {
    return static_cast<size_t>(
        std::count(cells.begin(), cells.end(), static_cast<uint8_t>(s)));
}

void integrate_scan(OccupancyMap& map, const DepthScan& scan) {
    const Lattice& lat = map.lattice;
    if (!lat.in_bounds(lat.cell_at(scan.origin.position)))
        throw DomainError("integrate_scan: scan origin outside map bounds");

    auto latch = [&](Cell c, CellState s) {
        uint8_t& cell = map.cells[lat.index(c)];
        if (cell == static_cast<uint8_t>(CellState::Unexplored))
            cell = static_cast<uint8_t>(s);
    };
    for (size_t i = 0; i < scan.angles.size(); ++i) {
        const double range = scan.ranges[i];
        const Vec2 dir{std::cos(scan.angles[i]), std::sin(scan.angles[i])};
        const bool hit = range < scan.max_range;
        walk_ray(lat, scan.origin.position, dir, range, [&](Cell c, double t) {
            if (t < range) {
                latch(c, CellState::Free);
                return true;
            }
            if (hit) latch(c, CellState::Occupied);
            return false;
        });
    }
    ++map.version;
}

namespace {

constexpr int64_t kFar = std::numeric_limits<int64_t>::max() / 4;

// 1D squared distance transform (Felzenszwalb-Huttenlocher lower envelope)
// in exact integer arithmetic. f holds squared distances per position (kFar
// where the column had no obstacle); out receives min_j (i-j)^2 + f[j].
// Breakpoints are kept as exact rationals zn/zd with zd > 0.
void edt_1d(const std::vector<int64_t>& f, std::vector<int64_t>& out, std::vector<int>& v,
            std::vector<int64_t>& zn, std::vector<int64_t>& zd) {
    const int n = static_cast<int>(f.size());
    int k = 0;
    v[0] = 0;
    zn[0] = -kFar;
    zd[0] = 1;
    for (int q = 1; q < n; ++q) {
        while (true) {
            const int p = v[k];
            const int64_t num =
                (f[q] + static_cast<int64_t>(q) * q) - (f[p] + static_cast<int64_t>(p) * p);
            const int64_t den = 2 * (static_cast<int64_t>(q) - p);
            // s <= z[k] ?
            if (k > 0 && static_cast<__int128>(num) * zd[k] <= static_cast<__int128>(zn[k]) * den) {
                --k;
                continue;
            }
            ++k;
            v[k] = q;
            zn[k] = num;
            zd[k] = den;
            break;
        }
    }
    zn[k + 1] = kFar;
    zd[k + 1] = 1;
    int j = 0;
    for (int q = 0; q < n; ++q) {
        while (j < k && static_cast<__int128>(zn[j + 1]) < static_cast<__int128>(q) * zd[j + 1]) ++j;
        const int64_t d = q - v[j];
        out[q] = std::min(d * d + f[v[j]], kFar);
    }
}

int64_t isqrt_floor(int64_t x) {
    if (x <= 0) return 0;
    auto r = static_cast<int64_t>(std::sqrt(static_cast<double>(x)));
    while (r * r > x) --r;
    while ((r + 1) * (r + 1) <= x) ++r;
    return r;
}

}  // namespace

DistanceIndex::DistanceIndex(const OccupancyMap& map, ObstacleMask mask)
    : lat_(map.lattice), version_(map.version) {
    const int w = lat_.width, h = lat_.height;
    obstacle_.resize(static_cast<size_t>(w) * h);
    for (size_t i = 0; i < obstacle_.size(); ++i) {
        const auto s = static_cast<CellState>(map.cells[i]);
        obstacle_[i] = mask == ObstacleMask::NonFree ? (s != CellState::Free)
                                                     : (s == CellState::Occupied);
    }

    // column pass: distance in rows to the nearest obstacle within the column
    std::vector<int64_t> colsq(static_cast<size_t>(w) * h, kFar);
    for (int c = 0; c < w; ++c) {
        int last = -1;
        for (int r = 0; r < h; ++r) {
            if (obstacle_[static_cast<size_t>(r) * w + c]) last = r;
            if (last >= 0) {
                const int64_t d = r - last;
                colsq[static_cast<size_t>(r) * w + c] = d * d;
            }
        }
        last = -1;
        for (int r = h - 1; r >= 0; --r) {
            if (obstacle_[static_cast<size_t>(r) * w + c]) last = r;
            if (last >= 0) {
                const int64_t d = last - r;
                auto& cur = colsq[static_cast<size_t>(r) * w + c];
                cur = std::min(cur, d * d);
            }
        }
    }

    // row pass: exact lower envelope over columns
    dist2_.resize(static_cast<size_t>(w) * h);
    std::vector<int64_t> f(w), out(w);
    std::vector<int> v(static_cast<size_t>(w) + 1);
    std::vector<int64_t> zn(static_cast<size_t>(w) + 2), zd(static_cast<size_t>(w) + 2);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) f[c] = colsq[static_cast<size_t>(r) * w + c];
        edt_1d(f, out, v, zn, zd);
        for (int c = 0; c < w; ++c) dist2_[static_cast<size_t>(r) * w + c] = out[c];
    }
}

ObstacleQuery DistanceIndex::at_cell(Cell c) const {
    const int64_t d2 = dist2_[lat_.index(c)];
    if (d2 >= kFar) throw DomainError("nearest_obstacle: map has no obstacle cells");
    const int64_t rad = isqrt_floor(d2);
    const Vec2 q = lat_.center(c);
    // Enumerate lattice offsets at exactly d2 (rows ascending, then columns)
    // and pick by the same floating-point distance a row-major exhaustive
    // scan would compare with, so ties resolve identically.
    Cell best{-1, -1};
    double best_fd2 = std::numeric_limits<double>::infinity();
    for (int64_t dr = -rad; dr <= rad; ++dr) {
        const int64_t rem = d2 - dr * dr;
        const int64_t dc = isqrt_floor(rem);
        if (dc * dc != rem) continue;
        for (const int64_t col_off : {-dc, dc}) {
            if (dc == 0 && col_off > 0) continue;
            const Cell cand{c.row + static_cast<int>(dr), c.col + static_cast<int>(col_off)};
            if (!lat_.in_bounds(cand) || !obstacle_[lat_.index(cand)]) continue;
            const double fd2 = squared_dist(q, lat_.center(cand));
            if (fd2 < best_fd2) {
                best_fd2 = fd2;
                best = cand;
            }
        }
    }
    if (best.row < 0) throw NumericError("distance transform: no witness at recorded distance");
    return {std::sqrt(best_fd2), lat_.center(best), best};
}

ObstacleQuery DistanceIndex::nearest(Vec2 q) const {
    const Cell c0 = lat_.cell_at(q);
    if (!lat_.in_bounds(c0)) throw DomainError("nearest_obstacle: point outside map");
    if (dist2_[lat_.index(c0)] >= kFar)
        throw DomainError("nearest_obstacle: map has no obstacle cells");
    // bound: nearest-to-cell-center obstacle plus the offset of q in its cell
    const double center_d = std::sqrt(static_cast<double>(dist2_[lat_.index(c0)])) * lat_.resolution;
    const double bound = center_d + (q - lat_.center(c0)).norm() + 1e-12;

    const int r_lo = std::max(0, static_cast<int>(std::floor((q.y - bound) / lat_.resolution)));
    const int r_hi = std::min(lat_.height - 1, static_cast<int>(std::floor((q.y + bound) / lat_.resolution)));
    const int c_lo = std::max(0, static_cast<int>(std::floor((q.x - bound) / lat_.resolution)));
    const int c_hi = std::min(lat_.width - 1, static_cast<int>(std::floor((q.x + bound) / lat_.resolution)));

    ObstacleQuery best;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (int r = r_lo; r <= r_hi; ++r) {
        for (int c = c_lo; c <= c_hi; ++c) {
            if (!obstacle_[static_cast<size_t>(r) * lat_.width + c]) continue;
            const Vec2 p = lat_.center({r, c});
            const double d2 = squared_dist(q, p);
            if (d2 < best_d2) {
                best_d2 = d2;
                best = {std::sqrt(d2), p, {r, c}};
            }
        }
    }
    return best;
}

ObstacleQuery nearest_obstacle(const OccupancyMap& map, const DistanceIndex& index, Vec2 q) {
    if (index.map_version() != map.version)
        throw DomainError("nearest_obstacle: stale distance index");
    if (!map.is_free(q)) throw DomainError("nearest_obstacle: query point is not FREE");
    return index.nearest(q);
}

DistanceField distance_field(const OccupancyMap& map, const DistanceIndex& index, const BBox& region) {
    if (index.map_version() != map.version)
        throw DomainError("distance_field: stale distance index");
    const Lattice& lat = map.lattice;
    DistanceField out;
    out.row0 = std::max(0, static_cast<int>(std::floor(region.lo.y / lat.resolution)));
    out.col0 = std::max(0, static_cast<int>(std::floor(region.lo.x / lat.resolution)));
    const int row1 = std::min(lat.height - 1, static_cast<int>(std::floor(region.hi.y / lat.resolution)));
    const int col1 = std::min(lat.width - 1, static_cast<int>(std::floor(region.hi.x / lat.resolution)));
    out.rows = std::max(0, row1 - out.row0 + 1);
    out.cols = std::max(0, col1 - out.col0 + 1);
    out.entries.resize(static_cast<size_t>(out.rows) * out.cols);
    out.valid.assign(out.entries.size(), 0);
    for (int r = 0; r < out.rows; ++r) {
        for (int c = 0; c < out.cols; ++c) {
            const Cell cell{out.row0 + r, out.col0 + c};
            if (!map.is_free(cell)) continue;
            const size_t i = static_cast<size_t>(r) * out.cols + c;
            out.entries[i] = index.at_cell(cell);
            out.valid[i] = 1;
        }
    }
    return out;
}

std::string to_ascii(const OccupancyMap& map) {
    std::string s;
    s.reserve(static_cast<size_t>(map.lattice.height) * (map.lattice.width + 1));
    for (int r = 0; r < map.lattice.height; ++r) {
        for (int c = 0; c < map.lattice.width; ++c) {
            switch (map.at({r, c})) {
                case CellState::Free: s += '.'; break;
                case CellState::Occupied: s += '#'; break;
                case CellState::Unexplored: s += 'U'; break;
            }
        }
        s += '\n';
    }
    return s;
}

OccupancyMap occupancy_from_ascii(const std::string& text, double resolution) {
    std::vector<std::string> rows;
    std::string line;
    std::istringstream in(text);
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) rows.push_back(line);
    }
    if (rows.empty()) throw ParseError("occupancy: no rows");
    OccupancyMap map;
    map.lattice = {static_cast<int>(rows[0].size()), static_cast<int>(rows.size()), resolution};
    map.cells.resize(static_cast<size_t>(map.lattice.width) * map.lattice.height);
    for (int r = 0; r < map.lattice.height; ++r) {
        if (rows[r].size() != rows[0].size()) throw ParseError("occupancy: ragged rows");
        for (int c = 0; c < map.lattice.width; ++c) {
            CellState s;
            switch (rows[r][c]) {
                case '.': s = CellState::Free; break;
                case '#': s = CellState::Occupied; break;
                case 'U': s = CellState::Unexplored; break;
                default: throw ParseError("occupancy: bad symbol");
            }
            map.cells[map.lattice.index({r, c})] = static_cast<uint8_t>(s);
        }
    }
    return map;
}

}  // namespace mnav
