#include "mnav/segmenter.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>

#include "mnav/error.hpp"

namespace mnav {

namespace {

constexpr int kNbr4[4][2] = {{-1, 0}, {0, -1}, {0, 1}, {1, 0}};

BBox bbox_of(const std::vector<int>& cells, const Lattice& lat) {
    int r0 = lat.height, r1 = -1, c0 = lat.width, c1 = -1;
    for (int idx : cells) {
        const int r = idx / lat.width, c = idx % lat.width;
        r0 = std::min(r0, r);
        r1 = std::max(r1, r);
        c0 = std::min(c0, c);
        c1 = std::max(c1, c);
    }
    return {{c0 * lat.resolution, r0 * lat.resolution},
            {(c1 + 1) * lat.resolution, (r1 + 1) * lat.resolution}};
}

// geodesic assignment of non-room FREE cells to the nearest room (4-conn BFS)
std::vector<int32_t> watershed_labels(const RoomSet& rooms, const OccupancyMap& map) {
    const Lattice& lat = map.lattice;
    std::vector<int32_t> labels(map.cells.size(), -1);
    std::deque<int> queue;
    for (const Room& room : rooms.rooms) {
        for (int idx : room.cells) {
            labels[idx] = room.id;
            queue.push_back(idx);
        }
    }
    while (!queue.empty()) {
        const int idx = queue.front();
        queue.pop_front();
        const int r = idx / lat.width, c = idx % lat.width;
        for (const auto& d : kNbr4) {
            const Cell nb{r + d[0], c + d[1]};
            if (!lat.in_bounds(nb)) continue;
            const int nidx = lat.index(nb);
            if (labels[nidx] >= 0 || !map.is_free(nb)) continue;
            labels[nidx] = labels[idx];
            queue.push_back(nidx);
        }
    }
    return labels;
}

}  // namespace

RoomSet segment(const OccupancyMap& map, const RoomSet* prior, const SegmenterConfig& cfg) {
    if (cfg.erosion_radius < 1) throw DomainError("segment: erosion_radius must be >= 1");
    const Lattice& lat = map.lattice;

    RoomSet out;
    out.lattice = lat;
    out.map_version = map.version;
    out.next_room_id = prior ? prior->next_room_id : 0;
    out.label_grid.assign(map.cells.size(), -1);

    // walls dilated by the disk radius: a FREE cell survives iff its center
    // is farther than erosion_radius cells from every OCCUPIED cell center
    const DistanceIndex walls(map, ObstacleMask::OccupiedOnly);
    const int64_t r2 = static_cast<int64_t>(cfg.erosion_radius) * cfg.erosion_radius;
    auto open_cell = [&](Cell c) {
        return map.is_free(c) && walls.squared_cells(c) > r2;
    };

    // 4-connected components in row-major discovery order
    std::vector<uint8_t> seen(map.cells.size(), 0);
    std::vector<std::vector<int>> components;
    for (int r = 0; r < lat.height; ++r) {
        for (int c = 0; c < lat.width; ++c) {
            const int idx = lat.index({r, c});
            if (seen[idx] || !open_cell({r, c})) continue;
            std::vector<int> comp;
            std::deque<Cell> queue{{r, c}};
            seen[idx] = 1;
            while (!queue.empty()) {
                const Cell cur = queue.front();
                queue.pop_front();
                comp.push_back(lat.index(cur));
                for (const auto& d : kNbr4) {
                    const Cell nb{cur.row + d[0], cur.col + d[1]};
                    if (!lat.in_bounds(nb)) continue;
                    const int nidx = lat.index(nb);
                    if (seen[nidx] || !open_cell(nb)) continue;
                    seen[nidx] = 1;
                    queue.push_back(nb);
                }
            }
            std::sort(comp.begin(), comp.end());
            const double area = comp.size() * lat.resolution * lat.resolution;
            if (area >= cfg.min_room_area) components.push_back(std::move(comp));
        }
    }

    // confirmed rooms persist verbatim; the matching component is consumed
    std::vector<uint8_t> comp_used(components.size(), 0);
    if (prior) {
        for (const Room& pr : prior->rooms) {
            if (!pr.confirmed) continue;
            out.rooms.push_back(pr);
            for (size_t ci = 0; ci < components.size(); ++ci) {
                if (comp_used[ci]) continue;
                std::vector<int> inter;
                std::set_intersection(components[ci].begin(), components[ci].end(),
                                      pr.cells.begin(), pr.cells.end(), std::back_inserter(inter));
                if (inter.size() * 10 >= pr.cells.size() * 9) {
                    comp_used[ci] = 1;
                    break;
                }
            }
        }
    }

    // unconfirmed priors keep their id when 90% of their cells carry over
    struct Claim {
        size_t comp;
        const Room* prior_room;
        size_t overlap;
    };
    std::vector<Claim> claims;
    if (prior) {
        for (size_t ci = 0; ci < components.size(); ++ci) {
            if (comp_used[ci]) continue;
            for (const Room& pr : prior->rooms) {
                if (pr.confirmed) continue;
                std::vector<int> inter;
                std::set_intersection(components[ci].begin(), components[ci].end(),
                                      pr.cells.begin(), pr.cells.end(), std::back_inserter(inter));
                if (inter.size() * 10 >= pr.cells.size() * 9)
                    claims.push_back({ci, &pr, inter.size()});
            }
        }
    }
    std::stable_sort(claims.begin(), claims.end(),
                     [](const Claim& a, const Claim& b) { return a.overlap > b.overlap; });
    std::vector<int> taken_ids;
    for (const Claim& cl : claims) {
        if (comp_used[cl.comp]) continue;
        if (std::find(taken_ids.begin(), taken_ids.end(), cl.prior_room->id) != taken_ids.end())
            continue;
        comp_used[cl.comp] = 1;
        taken_ids.push_back(cl.prior_room->id);
        Room room;
        room.id = cl.prior_room->id;
        room.cells = components[cl.comp];
        room.bbox = bbox_of(room.cells, lat);
        out.rooms.push_back(std::move(room));
    }

    for (size_t ci = 0; ci < components.size(); ++ci) {
        if (comp_used[ci]) continue;
        Room room;
        room.id = out.next_room_id++;
        room.cells = components[ci];
        room.bbox = bbox_of(room.cells, lat);
        out.rooms.push_back(std::move(room));
    }

    std::sort(out.rooms.begin(), out.rooms.end(),
              [](const Room& a, const Room& b) { return a.id < b.id; });
    for (const Room& room : out.rooms)
        for (int idx : room.cells) out.label_grid[idx] = room.id;
    out.watershed = watershed_labels(out, map);
    return out;
}

void classify(RoomSet& rooms, const OccupancyMap& map) {
    if (rooms.map_version != map.version)
        throw DomainError("classify: room set built from a different map version");
    const Lattice& lat = map.lattice;

    // Only observable unknowns count: an UNEXPLORED cell with no FREE
    // 4-neighbor (a wall-corner stone, or a cell buried inside wall bodies)
    // can never be hit by a ray and must not block confirmation forever.
    std::vector<uint8_t> observable(map.cells.size(), 0);
    for (int r = 0; r < lat.height; ++r) {
        for (int c = 0; c < lat.width; ++c) {
            if (map.at({r, c}) != CellState::Unexplored) continue;
            const bool fronting = map.is_free(Cell{r - 1, c}) || map.is_free(Cell{r + 1, c}) ||
                                  map.is_free(Cell{r, c - 1}) || map.is_free(Cell{r, c + 1});
            if (fronting) observable[lat.index({r, c})] = 1;
        }
    }

    // pre-erosion region of a room: its cells plus the sealed free cells the
    // watershed assigns to it
    std::vector<uint8_t> touches(static_cast<size_t>(rooms.next_room_id) + 1, 0);
    for (int r = 0; r < lat.height; ++r) {
        for (int c = 0; c < lat.width; ++c) {
            const int idx = lat.index({r, c});
            int label = rooms.label_grid[idx];
            if (label < 0 && map.is_free(Cell{r, c})) label = rooms.watershed[idx];
            if (label < 0) continue;
            bool adj = false;
            for (int dr = -1; dr <= 1 && !adj; ++dr)
                for (int dc = -1; dc <= 1 && !adj; ++dc) {
                    const Cell nb{r + dr, c + dc};
                    if (lat.in_bounds(nb) && observable[lat.index(nb)]) adj = true;
                }
            if (adj) touches[label] = 1;
        }
    }
    for (Room& room : rooms.rooms)
        if (!room.confirmed && !touches[room.id]) room.confirmed = true;
}

EntryPointSet detect_entry_points(const RoomSet& rooms, const OccupancyMap& map,
                                  const EntryPointSet* prior) {
    const Lattice& lat = map.lattice;
    EntryPointSet out;
    out.next_ep_id = prior ? prior->next_ep_id : 0;
    out.doorway_grid.assign(map.cells.size(), -1);

    auto cell_label = [&](Cell c) -> int {
        if (!lat.in_bounds(c) || !map.is_free(c)) return -1;
        const int idx = lat.index(c);
        return rooms.label_grid[idx] >= 0 ? rooms.label_grid[idx] : rooms.watershed[idx];
    };

    // boundary cells: sealed (non-room) free cells adjacent to a different label
    struct Border {
        int idx;
        int a, b;  // room pair, a < b
    };
    std::vector<Border> borders;
    for (int r = 0; r < lat.height; ++r) {
        for (int c = 0; c < lat.width; ++c) {
            const int idx = lat.index({r, c});
            if (!map.is_free(Cell{r, c}) || rooms.label_grid[idx] >= 0) continue;
            const int mine = rooms.watershed[idx];
            if (mine < 0) continue;
            for (const auto& d : kNbr4) {
                const int other = cell_label({r + d[0], c + d[1]});
                if (other >= 0 && other != mine)
                    borders.push_back({idx, std::min(mine, other), std::max(mine, other)});
            }
        }
    }

    // cluster the border cells of each pair by 4-connectivity
    std::map<std::pair<int, int>, std::map<int, int>> pair_cells;  // pair -> cell idx -> cluster
    for (const Border& b : borders) pair_cells[{b.a, b.b}][b.idx] = -1;

    struct Cluster {
        std::pair<int, int> pair;
        std::vector<int> cells;
        Vec2 centroid;
    };
    std::vector<Cluster> clusters;
    for (auto& [pair, cells] : pair_cells) {
        for (auto it0 = cells.begin(); it0 != cells.end(); ++it0) {
            if (it0->second >= 0) continue;
            const int id = static_cast<int>(clusters.size());
            Cluster cl;
            cl.pair = pair;
            std::deque<int> queue{it0->first};
            it0->second = id;
            while (!queue.empty()) {
                const int cur = queue.front();
                queue.pop_front();
                cl.cells.push_back(cur);
                const int r = cur / lat.width, c = cur % lat.width;
                for (const auto& d : kNbr4) {
                    const Cell nb{r + d[0], c + d[1]};
                    if (!lat.in_bounds(nb)) continue;
                    auto it = cells.find(lat.index(nb));
                    if (it == cells.end() || it->second >= 0) continue;
                    it->second = id;
                    queue.push_back(it->first);
                }
            }
            std::sort(cl.cells.begin(), cl.cells.end());
            Vec2 acc{0, 0};
            for (int ci : cl.cells) acc = acc + lat.center({ci / lat.width, ci % lat.width});
            cl.centroid = acc * (1.0 / cl.cells.size());
            clusters.push_back(std::move(cl));
        }
    }
    std::sort(clusters.begin(), clusters.end(), [](const Cluster& x, const Cluster& y) {
        if (x.pair != y.pair) return x.pair < y.pair;
        return x.cells.front() < y.cells.front();
    });

    // snap a centroid to the nearest FREE cell center (row-major ties)
    auto snap = [&](Vec2 p) -> Vec2 {
        Cell c0 = lat.cell_at(p);
        c0.row = std::clamp(c0.row, 0, lat.height - 1);
        c0.col = std::clamp(c0.col, 0, lat.width - 1);
        double best_d2 = std::numeric_limits<double>::infinity();
        Cell best{-1, -1};
        for (int ring = 0; ring < std::max(lat.width, lat.height); ++ring) {
            const double inner = (ring - 1) * lat.resolution;
            if (best.row >= 0 && inner * inner > best_d2) break;
            for (int r = c0.row - ring; r <= c0.row + ring; ++r) {
                for (int c = c0.col - ring; c <= c0.col + ring; ++c) {
                    if (std::max(std::abs(r - c0.row), std::abs(c - c0.col)) != ring) continue;
                    const Cell cand{r, c};
                    if (!lat.in_bounds(cand) || !map.is_free(cand)) continue;
                    const double d2 = squared_dist(p, lat.center(cand));
                    if (d2 < best_d2 || (d2 == best_d2 && cand < best)) {
                        best_d2 = d2;
                        best = cand;
                    }
                }
            }
        }
        return best.row >= 0 ? lat.center(best) : p;
    };

    std::vector<uint8_t> prior_used(prior ? prior->points.size() : 0, 0);
    for (const Cluster& cl : clusters) {
        EntryPoint ep;
        ep.room_a = cl.pair.first;
        ep.room_b = cl.pair.second;
        ep.position = snap(cl.centroid);
        ep.id = -1;
        if (prior) {
            double best = 0.5;  // persistence radius, meters
            int best_i = -1;
            for (size_t i = 0; i < prior->points.size(); ++i) {
                const EntryPoint& pp = prior->points[i];
                if (prior_used[i] || pp.room_a != ep.room_a || pp.room_b != ep.room_b) continue;
                const double d = (pp.position - ep.position).norm();
                if (d < best) {
                    best = d;
                    best_i = static_cast<int>(i);
                }
            }
            if (best_i >= 0) {
                prior_used[best_i] = 1;
                ep.id = prior->points[best_i].id;
            }
        }
        if (ep.id < 0) ep.id = out.next_ep_id++;
        const int ep_index = static_cast<int>(out.points.size());
        for (int ci : cl.cells) out.doorway_grid[ci] = ep_index;
        out.points.push_back(ep);
    }
    return out;
}

std::string label_grid_ascii(const RoomSet& rooms, const OccupancyMap& map) {
    const Lattice& lat = map.lattice;
    std::string s;
    for (int r = 0; r < lat.height; ++r) {
        for (int c = 0; c < lat.width; ++c) {
            const int idx = lat.index({r, c});
            if (rooms.label_grid[idx] >= 0)
                s += static_cast<char>('0' + rooms.label_grid[idx] % 10);
            else if (map.at({r, c}) == CellState::Occupied)
                s += '#';
            else if (map.at({r, c}) == CellState::Unexplored)
                s += 'U';
            else
                s += '.';
        }
        s += '\n';
    }
    return s;
}

std::string entry_points_csv(const EntryPointSet& eps) {
    std::ostringstream out;
    out << "id,x,y,room_a,room_b\n";
    for (const EntryPoint& p : eps.points)
        out << p.id << ',' << p.position.x << ',' << p.position.y << ',' << p.room_a << ','
            << p.room_b << '\n';
    return out.str();
}

}  // namespace mnav
