#include "mnav/fmm.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

#include "mnav/error.hpp"

namespace mnav {

double ArrivalGrid::interpolate(Vec2 p) const {
    const double res = resolution;
    const double fx = p.x / res - 0.5, fy = p.y / res - 0.5;
    const int c0 = static_cast<int>(std::floor(fx)), r0 = static_cast<int>(std::floor(fy));
    const double wx = fx - c0, wy = fy - r0;
    const double a00 = at({r0, c0}), a01 = at({r0, c0 + 1});
    const double a10 = at({r0 + 1, c0}), a11 = at({r0 + 1, c0 + 1});
    if (std::isfinite(a00) && std::isfinite(a01) && std::isfinite(a10) && std::isfinite(a11)) {
        return (1 - wy) * ((1 - wx) * a00 + wx * a01) + wy * ((1 - wx) * a10 + wx * a11);
    }
    return at({static_cast<int>(std::floor(p.y / res)), static_cast<int>(std::floor(p.x / res))});
}

std::string ArrivalGrid::to_csv() const {
    std::ostringstream out;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (c) out << ',';
            const double v = arrival[static_cast<size_t>(r) * cols + c];
            if (std::isfinite(v))
                out << v;
            else
                out << "inf";
        }
        out << '\n';
    }
    return out.str();
}

ArrivalGrid fmm_solve(const OccupancyMap& map, const DistanceIndex& index, const BBox& region,
                      Vec2 source, const SamplerConfig& cfg) {
    if (index.map_version() != map.version) throw DomainError("fmm: stale distance index");
    const Lattice& lat = map.lattice;
    if (!map.is_free(source)) throw DomainError("fmm: source is not in free space");

    ArrivalGrid g;
    g.resolution = lat.resolution;
    g.source = source;
    g.row0 = std::max(0, static_cast<int>(std::floor(region.lo.y / lat.resolution)));
    g.col0 = std::max(0, static_cast<int>(std::floor(region.lo.x / lat.resolution)));
    const int row1 = std::min(lat.height - 1, static_cast<int>(std::floor(region.hi.y / lat.resolution)));
    const int col1 = std::min(lat.width - 1, static_cast<int>(std::floor(region.hi.x / lat.resolution)));
    g.rows = std::max(0, row1 - g.row0 + 1);
    g.cols = std::max(0, col1 - g.col0 + 1);
    g.arrival.assign(static_cast<size_t>(g.rows) * g.cols, ArrivalGrid::kInf);
    g.speed.assign(g.arrival.size(), 0.0);

    for (int r = 0; r < g.rows; ++r) {
        for (int c = 0; c < g.cols; ++c) {
            const Cell cell{g.row0 + r, g.col0 + c};
            if (map.is_free(cell))
                g.speed[static_cast<size_t>(r) * g.cols + c] =
                    ground_truth_speed(index.distance_at(cell), cfg);
        }
    }

    const Cell src = lat.cell_at(source);
    if (!g.contains(src)) throw DomainError("fmm: source outside the requested region");

    // min-heap ordered by (tentative arrival, cell index) for determinism
    using Entry = std::pair<double, int64_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    std::vector<uint8_t> done(g.arrival.size(), 0);

    auto try_update = [&](Cell cell) {
        if (!g.contains(cell)) return;
        const size_t i = g.index(cell);
        if (done[i] || g.speed[i] <= 0.0) return;
        const double f = g.resolution / (g.speed[i] * cfg.d_max);  // crossing time
        const double ax = std::min(g.at({cell.row, cell.col - 1}), g.at({cell.row, cell.col + 1}));
        const double ay = std::min(g.at({cell.row - 1, cell.col}), g.at({cell.row + 1, cell.col}));
        double t;
        const double a = std::min(ax, ay), b = std::max(ax, ay);
        if (!std::isfinite(a)) return;
        if (b - a >= f || !std::isfinite(b)) {
            t = a + f;
        } else {
            t = 0.5 * (a + b + std::sqrt(2.0 * f * f - (a - b) * (a - b)));
        }
        if (t < g.arrival[i]) {
            g.arrival[i] = t;
            heap.emplace(t, static_cast<int64_t>(i));
        }
    };

    {
        const size_t i = g.index(src);
        if (g.speed[i] <= 0.0) throw DomainError("fmm: source cell blocked");
        g.arrival[i] = 0.0;
        heap.emplace(0.0, static_cast<int64_t>(i));
    }
    while (!heap.empty()) {
        const auto [t, idx] = heap.top();
        heap.pop();
        if (done[idx] || t > g.arrival[idx]) continue;
        done[idx] = 1;
        const Cell cell{g.row0 + static_cast<int>(idx / g.cols), g.col0 + static_cast<int>(idx % g.cols)};
        try_update({cell.row - 1, cell.col});
        try_update({cell.row + 1, cell.col});
        try_update({cell.row, cell.col - 1});
        try_update({cell.row, cell.col + 1});
    }
    return g;
}

namespace {

// gradient of the bilinear patch at p; false when a corner is unreached
bool bilinear_gradient(const ArrivalGrid& g, Vec2 p, Vec2& grad) {
    const double res = g.resolution;
    const double fx = p.x / res - 0.5, fy = p.y / res - 0.5;
    const int c0 = static_cast<int>(std::floor(fx)), r0 = static_cast<int>(std::floor(fy));
    const double wx = fx - c0, wy = fy - r0;
    const double a00 = g.at({r0, c0}), a01 = g.at({r0, c0 + 1});
    const double a10 = g.at({r0 + 1, c0}), a11 = g.at({r0 + 1, c0 + 1});
    if (!std::isfinite(a00) || !std::isfinite(a01) || !std::isfinite(a10) || !std::isfinite(a11))
        return false;
    grad.x = ((1 - wy) * (a01 - a00) + wy * (a11 - a10)) / res;
    grad.y = ((1 - wx) * (a10 - a00) + wx * (a11 - a01)) / res;
    return true;
}

}  // namespace

std::vector<Vec2> fmm_extract_path(const ArrivalGrid& g, Vec2 start, double step, int max_iters) {
    const double res = g.resolution;
    std::vector<Vec2> path{start};
    if (start == g.source) return path;
    Vec2 p = start;
    double cur = g.interpolate(p);
    if (!std::isfinite(cur)) throw DomainError("fmm path: start not reached by the solve");

    for (int it = 0; it < max_iters; ++it) {
        if ((p - g.source).norm() <= 2.0 * res) {
            path.push_back(g.source);
            return path;
        }
        Vec2 grad;
        Vec2 next;
        double next_val = ArrivalGrid::kInf;
        if (bilinear_gradient(g, p, grad) && grad.norm() > 0.0) {
            const Vec2 cand = p - grad.normalized() * step;
            const double v = g.interpolate(cand);
            if (std::isfinite(v) && v < cur) {
                next = cand;
                next_val = v;
            }
        }
        if (!std::isfinite(next_val)) {
            // discrete fallback: descend to the best neighboring cell center
            const Cell cell{static_cast<int>(std::floor(p.y / res)), static_cast<int>(std::floor(p.x / res))};
            double best = cur;
            Cell best_cell = cell;
            for (int dr = -1; dr <= 1; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    if (dr == 0 && dc == 0) continue;
                    const Cell nb{cell.row + dr, cell.col + dc};
                    const double v = g.at(nb);
                    if (v < best) {
                        best = v;
                        best_cell = nb;
                    }
                }
            }
            if (best_cell == cell)
                throw NumericError("fmm path: non-decreasing step (local minimum)");
            next = {(best_cell.col + 0.5) * res, (best_cell.row + 0.5) * res};
            next_val = best;
        }
        p = next;
        cur = next_val;
        path.push_back(p);
    }
    throw NumericError("fmm path: extraction did not converge");
}

double oracle_travel_time(const OccupancyMap& map, const DistanceIndex& index, Vec2 a, Vec2 b,
                          const SamplerConfig& cfg) {
    if (!map.is_free(a)) throw DomainError("oracle_travel_time: endpoint not free");
    if (a == b) {
        if (!map.is_free(b)) throw DomainError("oracle_travel_time: endpoint not free");
        return 0.0;
    }
    const ArrivalGrid g = fmm_solve(map, index, map.lattice.bounds(), b, cfg);
    return g.interpolate(a);
}

double polyline_length(const std::vector<Vec2>& pts) {
    double len = 0.0;
    for (size_t i = 1; i < pts.size(); ++i) len += (pts[i] - pts[i - 1]).norm();
    return len;
}

}  // namespace mnav
