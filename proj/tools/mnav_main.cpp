// mnav: explore / plan / bench / render entry points.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "mnav/bench.hpp"
#include "mnav/error.hpp"
#include "mnav/explorer.hpp"
#include "mnav/scenario.hpp"
#include "mnav/svg.hpp"

using namespace mnav;

namespace {

constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNoPath = 3;

Vec2 parse_point(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw CLI::ValidationError("expected X,Y");
    try {
        return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
    } catch (const std::exception&) {
        throw CLI::ValidationError("expected numeric X,Y");
    }
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << content;
}

int cmd_explore(const std::string& map_path, const std::string& config_path,
                const std::string& out_path, uint64_t seed, int frames,
                const std::string& events_path, const std::string& training_path) {
    Scenario scenario = config_path.empty() ? Scenario{} : load_scenario(config_path);
    scenario.train.seed = seed;
    scenario.sampler.seed = seed;
    if (frames > 0) scenario.explorer.frame_cap = frames;

    const GroundTruthMap world = load_map(map_path, scenario.resolution);
    Pose start{scenario.start, 0.0};
    if (!scenario.has_start) {
        // first free cell center scanning row-major
        for (int r = 0; r < world.lattice.height && !scenario.has_start; ++r)
            for (int c = 0; c < world.lattice.width && !scenario.has_start; ++c)
                if (!world.occupied[world.lattice.index({r, c})]) {
                    start.position = world.lattice.center({r, c});
                    scenario.has_start = true;
                }
    }
    if (!is_free(world, start.position)) throw DomainError("explore: start pose is not free");

    Session session;
    scenario.apply(session);
    ExploreLogs logs;
    const bool done = run_exploration(world, start, session, logs);
    save_session(session, out_path);
    if (!events_path.empty()) write_file(events_path, logs.events_csv());
    if (!training_path.empty()) write_file(training_path, logs.training_csv());

    double ft_mean = 0.0;
    for (double t : logs.frame_seconds) ft_mean += t;
    if (!logs.frame_seconds.empty()) ft_mean /= logs.frame_seconds.size();
    std::cout << "frames: " << session.frames << (done ? "" : " (frame cap hit: incomplete)")
              << "\nrooms: " << session.rooms.rooms.size()
              << "  entry points: " << session.eps.points.size()
              << "  networks: " << session.registry.entries.size() << "\nMT: " << logs.mapping_seconds
              << " s   FT mean: " << ft_mean << " s/frame\n";
    if (!logs.warning.empty()) std::cout << "warning: " << logs.warning << '\n';
    return done ? 0 : kExitError;
}

int cmd_plan(const std::string& session_path, const std::string& start_s, const std::string& goal_s,
             const std::string& csv_path, const std::string& svg_path) {
    const Session session = load_session(session_path);
    const Vec2 start = parse_point(start_s), goal = parse_point(goal_s);
    Path path;
    try {
        path = plan(session.context(), start, goal, session.planner);
    } catch (const UnreachableError& e) {
        std::cerr << "no path: " << e.what() << '\n';
        return kExitNoPath;
    } catch (const NumericError& e) {
        std::cerr << "no path: " << e.what() << '\n';
        return kExitNoPath;
    }
    if (!csv_path.empty()) {
        std::ostringstream csv;
        csv << "x,y\n";
        for (const Vec2& p : path.vertices) csv << p.x << ',' << p.y << '\n';
        write_file(csv_path, csv.str());
    }
    if (!svg_path.empty()) {
        RenderOptions opts;
        opts.path = path.vertices;
        write_file(svg_path, render_svg(session, opts));
    }
    std::cout << "planning_time: " << path.planning_time << " s\nlength: "
              << polyline_length(path.vertices) << " m\nestimate: " << path.total_time_estimate
              << " s\nvertices: " << path.vertices.size() << '\n';
    return 0;
}

int cmd_bench(const std::string& session_path, int pairs, uint64_t seed, const std::string& csv_path,
              bool with_baseline) {
    const Session session = load_session(session_path);
    if (!session.complete) std::cerr << "note: benchmarking an incomplete session\n";
    const BenchResult result = run_bench(session, pairs, seed);
    if (!csv_path.empty()) write_file(csv_path, result.csv());
    if (result.records.empty()) {
        std::cout << "SR: N/A (no pairs)\n";
        return 0;
    }
    std::cout << "SR: " << result.success_rate * 100.0 << " %\n"
              << "plan time: " << result.plan_mean << " +- " << result.plan_std << " s\n"
              << "path length: " << result.length_mean << " +- " << result.length_std << " m\n"
              << "length ratio vs oracle: " << result.length_ratio_mean << '\n';
    if (with_baseline)
        std::cout << "fmm baseline: " << fmm_baseline_mean_seconds(session, result.records)
                  << " s per query\n";
    return 0;
}

int cmd_render(const std::string& session_path, const std::string& svg_path,
               const std::string& contours, const std::string& path_csv) {
    const Session session = load_session(session_path);
    RenderOptions opts;
    if (!contours.empty()) {
        const auto colon = contours.find(':');
        opts.contour_source = parse_point(colon == std::string::npos ? contours
                                                                     : contours.substr(0, colon));
        if (colon != std::string::npos) opts.contour_levels = std::stoi(contours.substr(colon + 1));
    }
    if (!path_csv.empty()) {
        std::ifstream in(path_csv);
        if (!in) throw Error("cannot open " + path_csv);
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            const auto comma = line.find(',');
            if (comma == std::string::npos) continue;
            opts.path.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
        }
    }
    write_file(svg_path, render_svg(session, opts));
    std::cout << "wrote " << svg_path << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hierarchical neural travel-time exploration and navigation"};
    app.require_subcommand(1);

    std::string map_path, config_path, out_path, events_path, training_path;
    uint64_t seed = 0;
    int frames = 0;
    auto* explore = app.add_subcommand("explore", "explore a map and train the time fields");
    explore->add_option("--map", map_path, "ASCII or PGM map file")->required();
    explore->add_option("--config", config_path, "scenario JSON");
    explore->add_option("--out", out_path, "session file to write")->required();
    explore->add_option("--seed", seed, "run seed");
    explore->add_option("--frames", frames, "frame cap override");
    explore->add_option("--events", events_path, "event log CSV");
    explore->add_option("--training", training_path, "training log CSV");

    std::string session_path, start_s, goal_s, csv_path, svg_path;
    auto* plan_cmd = app.add_subcommand("plan", "plan a path through a saved session");
    plan_cmd->add_option("--session", session_path, "session file")->required();
    plan_cmd->add_option("--start", start_s, "start X,Y")->required();
    plan_cmd->add_option("--goal", goal_s, "goal X,Y")->required();
    plan_cmd->add_option("--csv", csv_path, "path CSV output");
    plan_cmd->add_option("--svg", svg_path, "SVG overlay output");

    std::string bench_session, bench_csv;
    int pairs = 200;
    uint64_t bench_seed = 0;
    bool baseline = false;
    auto* bench_cmd = app.add_subcommand("bench", "success-rate benchmark over random pairs");
    bench_cmd->add_option("--session", bench_session, "session file")->required();
    bench_cmd->add_option("--pairs", pairs, "number of start/goal pairs");
    bench_cmd->add_option("--seed", bench_seed, "pair sampling seed");
    bench_cmd->add_option("--csv", bench_csv, "per-pair CSV output");
    bench_cmd->add_flag("--baseline", baseline, "also time the full-map FMM baseline");

    std::string render_session, render_svg_path, contours, path_csv;
    auto* render_cmd = app.add_subcommand("render", "render a session to SVG");
    render_cmd->add_option("--session", render_session, "session file")->required();
    render_cmd->add_option("--svg", render_svg_path, "output SVG")->required();
    render_cmd->add_option("--contours", contours, "SOURCE_X,SOURCE_Y[:LEVELS] contour overlay");
    render_cmd->add_option("--path", path_csv, "path CSV to overlay");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (explore->parsed())
            return cmd_explore(map_path, config_path, out_path, seed, frames, events_path,
                               training_path);
        if (plan_cmd->parsed()) return cmd_plan(session_path, start_s, goal_s, csv_path, svg_path);
        if (bench_cmd->parsed()) return cmd_bench(bench_session, pairs, bench_seed, bench_csv, baseline);
        if (render_cmd->parsed()) return cmd_render(render_session, render_svg_path, contours, path_csv);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitUsage;
}
