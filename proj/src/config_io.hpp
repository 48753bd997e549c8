#pragma once

// JSON (de)serialization for every config struct, shared by the session
// archive and the scenario file. Readers are strict: unknown keys fail.

#include <json.hpp>

#include "mnav/error.hpp"
#include "mnav/session.hpp"

namespace mnav::config_io {

using nlohmann::json;

template <typename T>
void read_field(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

inline void check_keys(const json& j, std::initializer_list<const char*> allowed,
                       const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) throw ParseError("config: unknown key '" + it.key() + "' in " + where);
    }
}

inline json to_json(const SamplerConfig& c) {
    return {{"d_max", c.d_max}, {"sigma", c.sigma}, {"s_min", c.s_min},
            {"batch_size", c.batch_size}, {"seed", c.seed}};
}
inline SamplerConfig sampler_from_json(const json& j) {
    check_keys(j, {"d_max", "sigma", "s_min", "batch_size", "seed"}, "sampler");
    SamplerConfig c;
    read_field(j, "d_max", c.d_max);
    read_field(j, "sigma", c.sigma);
    read_field(j, "s_min", c.s_min);
    read_field(j, "batch_size", c.batch_size);
    read_field(j, "seed", c.seed);
    return c;
}

inline json to_json(const TrainConfig& c) {
    return {{"lambda_eik", c.lambda_eik},       {"lambda_td", c.lambda_td},
            {"lambda_normal", c.lambda_normal}, {"lambda_causality", c.lambda_causality},
            {"dt", c.dt},                       {"learning_rate", c.learning_rate},
            {"steps_per_frame", c.steps_per_frame}, {"batch_size", c.batch_size},
            {"post_confirm_steps", c.post_confirm_steps}, {"exact_metric", c.exact_metric},
            {"seed", c.seed}};
}
inline TrainConfig train_from_json(const json& j) {
    check_keys(j,
               {"lambda_eik", "lambda_td", "lambda_normal", "lambda_causality", "dt",
                "learning_rate", "steps_per_frame", "batch_size", "post_confirm_steps",
                "exact_metric", "seed"},
               "train");
    TrainConfig c;
    read_field(j, "lambda_eik", c.lambda_eik);
    read_field(j, "lambda_td", c.lambda_td);
    read_field(j, "lambda_normal", c.lambda_normal);
    read_field(j, "lambda_causality", c.lambda_causality);
    read_field(j, "dt", c.dt);
    read_field(j, "learning_rate", c.learning_rate);
    read_field(j, "steps_per_frame", c.steps_per_frame);
    read_field(j, "batch_size", c.batch_size);
    read_field(j, "post_confirm_steps", c.post_confirm_steps);
    read_field(j, "exact_metric", c.exact_metric);
    read_field(j, "seed", c.seed);
    return c;
}

inline json to_json(const NetConfig& c) {
    return {{"n_fourier", c.n_fourier}, {"fourier_scale", c.fourier_scale},
            {"hidden_width", c.hidden_width}, {"n_blocks", c.n_blocks},
            {"a", c.a}, {"b", c.b}, {"seed", c.seed}};
}
inline NetConfig net_from_json(const json& j) {
    check_keys(j, {"n_fourier", "fourier_scale", "hidden_width", "n_blocks", "a", "b", "seed"},
               "net");
    NetConfig c;
    read_field(j, "n_fourier", c.n_fourier);
    read_field(j, "fourier_scale", c.fourier_scale);
    read_field(j, "hidden_width", c.hidden_width);
    read_field(j, "n_blocks", c.n_blocks);
    read_field(j, "a", c.a);
    read_field(j, "b", c.b);
    read_field(j, "seed", c.seed);
    return c;
}

inline json to_json(const SegmenterConfig& c) {
    return {{"erosion_radius", c.erosion_radius}, {"min_room_area", c.min_room_area}};
}
inline SegmenterConfig segmenter_from_json(const json& j) {
    check_keys(j, {"erosion_radius", "min_room_area"}, "segmenter");
    SegmenterConfig c;
    read_field(j, "erosion_radius", c.erosion_radius);
    read_field(j, "min_room_area", c.min_room_area);
    return c;
}

inline json to_json(const ExplorerConfig& c) {
    return {{"n_beams", c.n_beams},       {"max_range", c.max_range},
            {"dbscan_eps", c.dbscan_eps}, {"dbscan_min_pts", c.dbscan_min_pts},
            {"step_budget", c.step_budget}, {"waypoint_spacing", c.waypoint_spacing},
            {"reach_tolerance", c.reach_tolerance}, {"frame_cap", c.frame_cap},
            {"final_training_sweeps", c.final_training_sweeps}};
}
inline ExplorerConfig explorer_from_json(const json& j) {
    check_keys(j,
               {"n_beams", "max_range", "dbscan_eps", "dbscan_min_pts", "step_budget",
                "waypoint_spacing", "reach_tolerance", "frame_cap", "final_training_sweeps"},
               "explorer");
    ExplorerConfig c;
    read_field(j, "n_beams", c.n_beams);
    read_field(j, "max_range", c.max_range);
    read_field(j, "dbscan_eps", c.dbscan_eps);
    read_field(j, "dbscan_min_pts", c.dbscan_min_pts);
    read_field(j, "step_budget", c.step_budget);
    read_field(j, "waypoint_spacing", c.waypoint_spacing);
    read_field(j, "reach_tolerance", c.reach_tolerance);
    read_field(j, "frame_cap", c.frame_cap);
    read_field(j, "final_training_sweeps", c.final_training_sweeps);
    return c;
}

inline json to_json(const NavGraphConfig& c) {
    return {{"overlap_frac", c.overlap_frac}, {"max_side", c.max_side},
            {"bbox_margin", c.bbox_margin}, {"monolithic", c.monolithic}};
}
inline NavGraphConfig nav_from_json(const json& j) {
    check_keys(j, {"overlap_frac", "max_side", "bbox_margin", "monolithic"}, "nav");
    NavGraphConfig c;
    read_field(j, "overlap_frac", c.overlap_frac);
    read_field(j, "max_side", c.max_side);
    read_field(j, "bbox_margin", c.bbox_margin);
    read_field(j, "monolithic", c.monolithic);
    return c;
}

inline json to_json(const PlannerConfig& c) {
    return {{"step", c.step}, {"tolerance", c.tolerance}, {"max_iters", c.max_iters},
            {"snap_radius_cells", c.snap_radius_cells}};
}
inline PlannerConfig planner_from_json(const json& j) {
    check_keys(j, {"step", "tolerance", "max_iters", "snap_radius_cells"}, "planner");
    PlannerConfig c;
    read_field(j, "step", c.step);
    read_field(j, "tolerance", c.tolerance);
    read_field(j, "max_iters", c.max_iters);
    read_field(j, "snap_radius_cells", c.snap_radius_cells);
    return c;
}

}  // namespace mnav::config_io
