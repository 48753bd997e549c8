#include "mnav/svg.hpp"

#include <cmath>
#include <sstream>

#include "mnav/error.hpp"
#include "mnav/planner.hpp"

namespace mnav {

namespace {

const char* kRoomFills[] = {"#9ecae1", "#a1d99b", "#fdae6b", "#bcbddc",
                            "#fc9272", "#c7e9c0", "#fee391", "#d9d9d9"};

void marching_squares(std::ostringstream& out, const std::vector<double>& field, int nx, int ny,
                      double x0, double y0, double step, double level, double px) {
    auto val = [&](int i, int j) { return field[static_cast<size_t>(j) * nx + i]; };
    auto interp = [&](double a, double b) { return (level - a) / (b - a); };
    for (int j = 0; j + 1 < ny; ++j) {
        for (int i = 0; i + 1 < nx; ++i) {
            const double v00 = val(i, j), v10 = val(i + 1, j);
            const double v01 = val(i, j + 1), v11 = val(i + 1, j + 1);
            if (!std::isfinite(v00) || !std::isfinite(v10) || !std::isfinite(v01) ||
                !std::isfinite(v11))
                continue;
            int mask = 0;
            if (v00 > level) mask |= 1;
            if (v10 > level) mask |= 2;
            if (v11 > level) mask |= 4;
            if (v01 > level) mask |= 8;
            if (mask == 0 || mask == 15) continue;
            // edge crossings: bottom, right, top, left
            Vec2 pts[4];
            bool has[4] = {false, false, false, false};
            if ((mask & 1) != ((mask >> 1) & 1)) {
                pts[0] = {x0 + (i + interp(v00, v10)) * step, y0 + j * step};
                has[0] = true;
            }
            if (((mask >> 1) & 1) != ((mask >> 2) & 1)) {
                pts[1] = {x0 + (i + 1) * step, y0 + (j + interp(v10, v11)) * step};
                has[1] = true;
            }
            if (((mask >> 3) & 1) != ((mask >> 2) & 1)) {
                pts[2] = {x0 + (i + interp(v01, v11)) * step, y0 + (j + 1) * step};
                has[2] = true;
            }
            if ((mask & 1) != ((mask >> 3) & 1)) {
                pts[3] = {x0 + i * step, y0 + (j + interp(v00, v01)) * step};
                has[3] = true;
            }
            Vec2 seg[2];
            int k = 0;
            for (int e = 0; e < 4 && k < 2; ++e)
                if (has[e]) seg[k++] = pts[e];
            if (k == 2)
                out << "<line x1=\"" << seg[0].x * px << "\" y1=\"" << seg[0].y * px << "\" x2=\""
                    << seg[1].x * px << "\" y2=\"" << seg[1].y * px << "\"/>\n";
        }
    }
}

}  // namespace

std::string render_svg(const Session& s, const RenderOptions& opts) {
    const Lattice& lat = s.occupancy.lattice;
    const double px = opts.pixels_per_meter * lat.resolution;  // pixels per cell
    const double W = lat.width * px, H = lat.height * px;
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
    out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";

    // occupancy: horizontal runs of occupied / unexplored cells
    out << "<g id=\"occupancy\">\n";
    for (int pass = 0; pass < 2; ++pass) {
        const CellState want = pass == 0 ? CellState::Unexplored : CellState::Occupied;
        const char* fill = pass == 0 ? "#eeeeee" : "#333333";
        for (int r = 0; r < lat.height; ++r) {
            int c = 0;
            while (c < lat.width) {
                if (s.occupancy.at({r, c}) != want) {
                    ++c;
                    continue;
                }
                int c1 = c;
                while (c1 < lat.width && s.occupancy.at({r, c1}) == want) ++c1;
                out << "<rect x=\"" << c * px << "\" y=\"" << r * px << "\" width=\""
                    << (c1 - c) * px << "\" height=\"" << px << "\" fill=\"" << fill << "\"/>\n";
                c = c1;
            }
        }
    }
    out << "</g>\n";

    if (opts.rooms) {
        out << "<g id=\"rooms\">\n";
        for (const Room& room : s.rooms.rooms) {
            const char* fill = kRoomFills[room.id % 8];
            out << "<rect x=\"" << room.bbox.lo.x * opts.pixels_per_meter << "\" y=\""
                << room.bbox.lo.y * opts.pixels_per_meter << "\" width=\""
                << room.bbox.width() * opts.pixels_per_meter << "\" height=\""
                << room.bbox.height() * opts.pixels_per_meter << "\" fill=\"" << fill
                << "\" fill-opacity=\"0.25\" stroke=\"" << fill << "\"/>\n";
            const Vec2 c = room.bbox.center();
            out << "<text x=\"" << c.x * opts.pixels_per_meter << "\" y=\""
                << c.y * opts.pixels_per_meter << "\" font-size=\"" << 14
                << "\" text-anchor=\"middle\">" << room.id << (room.confirmed ? "" : "?")
                << "</text>\n";
        }
        out << "</g>\n";
    }

    if (opts.contour_source) {
        const PlanContext ctx = s.context();
        const int room = locate_room(*opts.contour_source, ctx, s.planner);
        const NetworkEntry* entry = s.registry.entry_of_room(room);
        if (!entry) throw DomainError("render: the source room has no trained network");
        const Subnetwork& net = *entry->net;
        const BBox box = net.bbox();
        const double step = lat.resolution * 2.0;
        const int nx = std::max(2, static_cast<int>(box.width() / step));
        const int ny = std::max(2, static_cast<int>(box.height() / step));
        std::vector<double> field(static_cast<size_t>(nx) * ny,
                                  std::numeric_limits<double>::quiet_NaN());
        double tmax = 0.0;
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                const Vec2 p{box.lo.x + (i + 0.5) * step, box.lo.y + (j + 0.5) * step};
                if (!box.contains(p) || !s.occupancy.is_free(p)) continue;
                const double t = travel_time(net, *opts.contour_source, p);
                field[static_cast<size_t>(j) * nx + i] = t;
                tmax = std::max(tmax, t);
            }
        }
        out << "<g id=\"contours\" stroke=\"#00b0b0\" stroke-width=\"1\" fill=\"none\">\n";
        for (int l = 1; l <= opts.contour_levels; ++l)
            marching_squares(out, field, nx, ny, box.lo.x + 0.5 * step, box.lo.y + 0.5 * step, step,
                             tmax * l / (opts.contour_levels + 1), opts.pixels_per_meter);
        out << "</g>\n";
    }

    if (opts.graph) {
        out << "<g id=\"graph\">\n";
        for (const GraphEdge& e : s.graph.edges) {
            if (e.kind == EdgeKind::Doorway) continue;  // zero-length visually
            const GraphNode* u = s.graph.find(e.u);
            const GraphNode* v = s.graph.find(e.v);
            out << "<line x1=\"" << u->position.x * opts.pixels_per_meter << "\" y1=\""
                << u->position.y * opts.pixels_per_meter << "\" x2=\""
                << v->position.x * opts.pixels_per_meter << "\" y2=\""
                << v->position.y * opts.pixels_per_meter
                << "\" stroke=\"#555555\" stroke-dasharray=\"4 3\"/>\n";
        }
        for (const GraphNode& n : s.graph.nodes)
            out << "<circle cx=\"" << n.position.x * opts.pixels_per_meter << "\" cy=\""
                << n.position.y * opts.pixels_per_meter << "\" r=\"4\" fill=\"#d62728\"/>\n";
        out << "</g>\n";
    }

    if (!opts.path.empty()) {
        out << "<g id=\"path\">\n<polyline fill=\"none\" stroke=\"#e6550d\" stroke-width=\"2\" points=\"";
        for (const Vec2& p : opts.path)
            out << p.x * opts.pixels_per_meter << ',' << p.y * opts.pixels_per_meter << ' ';
        out << "\"/>\n</g>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace mnav
