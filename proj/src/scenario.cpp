#include "mnav/scenario.hpp"

#include <fstream>
#include <sstream>

#include "config_io.hpp"

namespace mnav {

using nlohmann::json;

Scenario parse_scenario(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("scenario: ") + e.what());
    }
    config_io::check_keys(j,
                          {"resolution", "start", "sampler", "train", "net", "segmenter",
                           "explorer", "nav", "planner"},
                          "scenario");
    Scenario s;
    if (j.contains("resolution")) s.resolution = j.at("resolution");
    if (j.contains("start")) {
        s.start = {j.at("start").at(0), j.at("start").at(1)};
        s.has_start = true;
    }
    if (j.contains("sampler")) s.sampler = config_io::sampler_from_json(j.at("sampler"));
    if (j.contains("train")) s.train = config_io::train_from_json(j.at("train"));
    if (j.contains("net")) s.net = config_io::net_from_json(j.at("net"));
    if (j.contains("segmenter")) s.segmenter = config_io::segmenter_from_json(j.at("segmenter"));
    if (j.contains("explorer")) s.explorer = config_io::explorer_from_json(j.at("explorer"));
    if (j.contains("nav")) s.nav = config_io::nav_from_json(j.at("nav"));
    if (j.contains("planner")) s.planner = config_io::planner_from_json(j.at("planner"));
    if (s.resolution <= 0.0) throw ParseError("scenario: resolution must be positive");
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("scenario: cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

void Scenario::apply(Session& session) const {
    session.sampler = sampler;
    session.train = train;
    session.net_config = net;
    session.segmenter = segmenter;
    session.explorer = explorer;
    session.nav = nav;
    session.planner = planner;
    session.registry.net_config = net;
    session.registry.d_max = sampler.d_max;
}

}  // namespace mnav
