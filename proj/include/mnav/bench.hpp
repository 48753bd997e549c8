#pragma once

#include <string>
#include <vector>

#include "mnav/fmm.hpp"
#include "mnav/session.hpp"

namespace mnav {

struct PairRecord {
    int pair = 0;
    Vec2 start, goal;
    bool success = false;
    double plan_seconds = 0.0;
    double length_m = 0.0;
    double oracle_length_m = 0.0;
};

struct BenchResult {
    std::vector<PairRecord> records;
    double success_rate = 0.0;  // NaN when no pairs ran
    double plan_mean = 0.0, plan_std = 0.0;
    double length_mean = 0.0, length_std = 0.0;
    double length_ratio_mean = 0.0;  // successful pairs vs oracle path length

    std::string csv() const;
};

/// Sample collision-free start/goal pairs from confirmed-room FREE cells,
/// plan each, validate against the occupancy snapshot, and compare lengths
/// with fast-marching oracle paths.
BenchResult run_bench(const Session& session, int n_pairs, uint64_t seed);

/// Mean full-map FMM solve-plus-extract time over the same pairs (the
/// planning-speed baseline).
double fmm_baseline_mean_seconds(const Session& session, const std::vector<PairRecord>& pairs);

}  // namespace mnav
