#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mnav/session.hpp"

namespace mnav {

struct RenderOptions {
    bool rooms = true;
    bool graph = true;
    std::optional<Vec2> contour_source;  // iso-travel-time overlay source
    int contour_levels = 8;
    std::vector<Vec2> path;              // optional polyline overlay
    double pixels_per_meter = 60.0;
};

/// Layered SVG: occupancy, room labels, graph nodes/edges, optional learned
/// iso-travel-time contours, optional path. One <g id="..."> per layer.
std::string render_svg(const Session& session, const RenderOptions& opts);

}  // namespace mnav
