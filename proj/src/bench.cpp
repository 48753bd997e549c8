#include "mnav/bench.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "mnav/error.hpp"
#include "mnav/planner.hpp"
#include "mnav/rng.hpp"

namespace mnav {

using Clock = std::chrono::steady_clock;

namespace {

// uniform draw from confirmed-room FREE cell centers
std::vector<Vec2> confirmed_pool(const Session& s) {
    std::vector<Vec2> pool;
    const Lattice& lat = s.occupancy.lattice;
    for (const Room& room : s.rooms.rooms) {
        if (!room.confirmed) continue;
        for (int idx : room.cells)
            pool.push_back(lat.center({idx / lat.width, idx % lat.width}));
    }
    return pool;
}

void accumulate(double v, double& mean, double& m2, int& n) {
    ++n;
    const double d = v - mean;
    mean += d / n;
    m2 += d * (v - mean);
}

}  // namespace

BenchResult run_bench(const Session& session, int n_pairs, uint64_t seed) {
    BenchResult out;
    const auto pool = confirmed_pool(session);
    if (n_pairs <= 0 || pool.empty()) {
        out.success_rate = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    const PlanContext ctx = session.context();
    const DistanceIndex index(session.occupancy, ObstacleMask::NonFree);
    Rng rng(seed);

    double plan_mean = 0, plan_m2 = 0, len_mean = 0, len_m2 = 0, ratio_sum = 0;
    int n_plan = 0, n_len = 0, n_ratio = 0, successes = 0;

    for (int i = 0; i < n_pairs; ++i) {
        PairRecord rec;
        rec.pair = i;
        rec.start = pool[rng.below(pool.size())];
        rec.goal = pool[rng.below(pool.size())];

        Path path;
        bool planned = false;
        const auto t0 = Clock::now();
        try {
            path = plan(ctx, rec.start, rec.goal, session.planner);
            planned = true;
        } catch (const Error&) {
            planned = false;
        }
        rec.plan_seconds = std::chrono::duration<double>(Clock::now() - t0).count();

        if (planned) {
            rec.success = path_collision_free(session.occupancy, path,
                                              session.occupancy.lattice.resolution / 2.0);
            rec.length_m = polyline_length(path.vertices);
        }
        if (rec.success) {
            ++successes;
            accumulate(rec.plan_seconds, plan_mean, plan_m2, n_plan);
            accumulate(rec.length_m, len_mean, len_m2, n_len);
            if (!(rec.start == rec.goal)) {
                try {
                    const ArrivalGrid g = fmm_solve(session.occupancy, index,
                                                    session.occupancy.lattice.bounds(), rec.goal,
                                                    session.sampler);
                    const auto oracle =
                        fmm_extract_path(g, rec.start, session.occupancy.lattice.resolution / 2.0);
                    rec.oracle_length_m = polyline_length(oracle);
                    if (rec.oracle_length_m > 1e-9) {
                        ratio_sum += rec.length_m / rec.oracle_length_m;
                        ++n_ratio;
                    }
                } catch (const Error&) {
                    rec.oracle_length_m = 0.0;
                }
            }
        }
        out.records.push_back(rec);
    }

    out.success_rate = static_cast<double>(successes) / n_pairs;
    out.plan_mean = plan_mean;
    out.plan_std = n_plan > 1 ? std::sqrt(plan_m2 / (n_plan - 1)) : 0.0;
    out.length_mean = len_mean;
    out.length_std = n_len > 1 ? std::sqrt(len_m2 / (n_len - 1)) : 0.0;
    out.length_ratio_mean = n_ratio > 0 ? ratio_sum / n_ratio : 0.0;
    return out;
}

double fmm_baseline_mean_seconds(const Session& session, const std::vector<PairRecord>& pairs) {
    const DistanceIndex index(session.occupancy, ObstacleMask::NonFree);
    double total = 0.0;
    int n = 0;
    for (const PairRecord& rec : pairs) {
        if (rec.start == rec.goal) continue;
        const auto t0 = Clock::now();
        try {
            const ArrivalGrid g = fmm_solve(session.occupancy, index,
                                            session.occupancy.lattice.bounds(), rec.goal,
                                            session.sampler);
            (void)fmm_extract_path(g, rec.start, session.occupancy.lattice.resolution / 2.0);
        } catch (const Error&) {
        }
        total += std::chrono::duration<double>(Clock::now() - t0).count();
        ++n;
    }
    return n > 0 ? total / n : 0.0;
}

std::string BenchResult::csv() const {
    std::ostringstream out;
    out << "pair,sx,sy,gx,gy,success,plan_s,length_m,oracle_length_m\n";
    for (const PairRecord& r : records)
        out << r.pair << ',' << r.start.x << ',' << r.start.y << ',' << r.goal.x << ',' << r.goal.y
            << ',' << (r.success ? 1 : 0) << ',' << r.plan_seconds << ',' << r.length_m << ','
            << r.oracle_length_m << '\n';
    return out.str();
}

}  // namespace mnav
