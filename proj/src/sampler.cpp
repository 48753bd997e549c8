#include "mnav/sampler.hpp"

#include <algorithm>

#include "mnav/error.hpp"
#include "mnav/rng.hpp"

namespace mnav {

void SamplerConfig::validate() const {
    if (d_max <= 0.0) throw DomainError("sampler: d_max must be positive");
    if (sigma <= 0.0) throw DomainError("sampler: sigma must be positive");
    if (s_min <= 0.0 || s_min >= 1.0) throw DomainError("sampler: s_min must lie in (0,1)");
    if (batch_size < 1) throw DomainError("sampler: batch_size must be >= 1");
}

double ground_truth_speed(double distance, const SamplerConfig& cfg) {
    if (distance < 0.0) throw DomainError("ground_truth_speed: negative distance");
    return std::clamp(distance / cfg.d_max, cfg.s_min, 1.0);
}

Vec2 surface_normal(Vec2 q, Vec2 qbar) {
    const Vec2 d = qbar - q;
    const double n = d.norm();
    if (n == 0.0) throw DomainError("surface_normal: query coincides with its obstacle point");
    return {d.x / n, d.y / n};
}

namespace {

struct Pool {
    const Lattice* lat;
    int row0, col0, rows, cols;
    std::vector<uint8_t> member;  // FREE cells with center inside the bbox

    bool is_member(Cell c) const {
        const int r = c.row - row0, cc = c.col - col0;
        if (r < 0 || r >= rows || cc < 0 || cc >= cols) return false;
        return member[static_cast<size_t>(r) * cols + cc] != 0;
    }
};

// Exact nearest pool member to an arbitrary point: expand Chebyshev rings
// around the containing cell, keeping the best (d^2, row, col) triple so ties
// resolve in row-major order.
Cell snap_to_pool(const Pool& pool, Vec2 candidate) {
    const Lattice& lat = *pool.lat;
    const double res = lat.resolution;
    Cell c0 = lat.cell_at(candidate);
    c0.row = std::clamp(c0.row, pool.row0, pool.row0 + pool.rows - 1);
    c0.col = std::clamp(c0.col, pool.col0, pool.col0 + pool.cols - 1);

    double best_d2 = std::numeric_limits<double>::infinity();
    Cell best{-1, -1};
    auto consider = [&](Cell cand) {
        if (!pool.is_member(cand)) return;
        const double d2 = squared_dist(candidate, lat.center(cand));
        if (d2 < best_d2 || (d2 == best_d2 && cand < best)) {
            best_d2 = d2;
            best = cand;
        }
    };
    const int max_ring = std::max(pool.rows, pool.cols) + 1;
    for (int ring = 0; ring <= max_ring; ++ring) {
        const double inner = (ring - 1) * res;
        if (best.row >= 0 && inner * inner > best_d2) break;
        const int r_lo = c0.row - ring, r_hi = c0.row + ring;
        const int c_lo = c0.col - ring, c_hi = c0.col + ring;
        for (int r = r_lo; r <= r_hi; ++r) {
            if (r == r_lo || r == r_hi) {
                for (int c = c_lo; c <= c_hi; ++c) consider({r, c});
            } else {
                consider({r, c_lo});
                if (c_hi != c_lo) consider({r, c_hi});
            }
        }
    }
    return best;
}

}  // namespace

std::optional<SampleBatch> sample_batch(const OccupancyMap& map, const DistanceIndex& index,
                                        const BBox& net_bbox, const SamplerConfig& cfg,
                                        uint64_t seed, int network_id) {
    cfg.validate();
    if (index.map_version() != map.version) throw DomainError("sample_batch: stale distance index");

    const Lattice& lat = map.lattice;
    Pool pool;
    pool.lat = &lat;
    pool.row0 = std::max(0, static_cast<int>(std::ceil(net_bbox.lo.y / lat.resolution - 0.5)));
    pool.col0 = std::max(0, static_cast<int>(std::ceil(net_bbox.lo.x / lat.resolution - 0.5)));
    const int row1 = std::min(lat.height - 1, static_cast<int>(std::floor(net_bbox.hi.y / lat.resolution - 0.5)));
    const int col1 = std::min(lat.width - 1, static_cast<int>(std::floor(net_bbox.hi.x / lat.resolution - 0.5)));
    pool.rows = std::max(0, row1 - pool.row0 + 1);
    pool.cols = std::max(0, col1 - pool.col0 + 1);
    if (pool.rows == 0 || pool.cols == 0) return std::nullopt;

    pool.member.assign(static_cast<size_t>(pool.rows) * pool.cols, 0);
    // pool members within d_max of an obstacle; the cheap integer distance
    // prefilters, the stored exact distance decides
    std::vector<std::pair<Cell, ObstacleQuery>> qualifiers;
    for (int r = 0; r < pool.rows; ++r) {
        for (int c = 0; c < pool.cols; ++c) {
            const Cell cell{pool.row0 + r, pool.col0 + c};
            if (!map.is_free(cell)) continue;
            pool.member[static_cast<size_t>(r) * pool.cols + c] = 1;
            if (index.distance_at(cell) < cfg.d_max + lat.resolution) {
                ObstacleQuery oq = index.at_cell(cell);
                if (oq.distance < cfg.d_max) qualifiers.emplace_back(cell, oq);
            }
        }
    }
    if (qualifiers.empty()) return std::nullopt;

    Rng rng(seed);
    SampleBatch batch;
    batch.network_id = network_id;
    batch.q_s.reserve(cfg.batch_size);
    for (int i = 0; i < cfg.batch_size; ++i) {
        const auto& [s_cell, os] = qualifiers[rng.below(qualifiers.size())];
        const Vec2 qs = lat.center(s_cell);
        const double d = cfg.sigma * rng.normal();
        const double ang = rng.uniform(0.0, 2.0 * M_PI);
        const Vec2 candidate{qs.x + d * std::cos(ang), qs.y + d * std::sin(ang)};
        const Cell g_cell = snap_to_pool(pool, candidate);
        const Vec2 qg = lat.center(g_cell);

        const ObstacleQuery og = index.at_cell(g_cell);
        batch.q_s.push_back(qs);
        batch.q_g.push_back(qg);
        batch.candidate_g.push_back(candidate);
        batch.qbar_s.push_back(os.point);
        batch.qbar_g.push_back(og.point);
        batch.speed_s.push_back(ground_truth_speed(os.distance, cfg));
        batch.speed_g.push_back(ground_truth_speed(og.distance, cfg));
        batch.normal_s.push_back(surface_normal(qs, os.point));
        batch.normal_g.push_back(surface_normal(qg, og.point));
    }
    return batch;
}

}  // namespace mnav
