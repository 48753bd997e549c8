#pragma once

#include <string>

#include "mnav/session.hpp"

namespace mnav {

/// One JSON document configuring every module for a run. Unknown keys are
/// rejected so drifting configs fail loudly.
struct Scenario {
    double resolution = 0.1;  // meters per cell
    Vec2 start;
    bool has_start = false;

    SamplerConfig sampler;
    TrainConfig train;
    NetConfig net;
    SegmenterConfig segmenter;
    ExplorerConfig explorer;
    NavGraphConfig nav;
    PlannerConfig planner;

    /// Copies the configs into a fresh session (registry seeded accordingly).
    void apply(Session& session) const;
};

Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::string& path);

}  // namespace mnav
