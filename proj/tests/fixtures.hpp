#pragma once

#include <string>
#include <vector>

#include "mnav/gridworld.hpp"
#include "mnav/mapper.hpp"

namespace mnav::testutil {

/// Rectangular room of the given interior size in cells, closed border.
inline std::string empty_room_ascii(int interior_w, int interior_h) {
    std::string s;
    const int w = interior_w + 2;
    for (int r = 0; r < interior_h + 2; ++r) {
        for (int c = 0; c < w; ++c) {
            const bool rim = r == 0 || r == interior_h + 1 || c == 0 || c == w - 1;
            s += rim ? '#' : '.';
        }
        s += '\n';
    }
    return s;
}

/// Two square rooms joined by a narrow corridor:
///   ##########program rows built explicitly below
inline std::string two_room_ascii(int room = 7, int corridor_len = 3, int corridor_w = 1) {
    const int w = room * 2 + corridor_len + 2;
    const int h = room + 2;
    std::vector<std::string> rows(h, std::string(w, '#'));
    for (int r = 1; r <= room; ++r) {
        for (int c = 1; c <= room; ++c) rows[r][c] = '.';
        for (int c = room + corridor_len + 1; c <= 2 * room + corridor_len; ++c) rows[r][c] = '.';
    }
    const int mid = 1 + (room - corridor_w) / 2;
    for (int r = mid; r < mid + corridor_w; ++r)
        for (int c = room + 1; c <= room + corridor_len; ++c) rows[r][c] = '.';
    std::string s;
    for (auto& row : rows) s += row + '\n';
    return s;
}

/// Fully observed occupancy map derived from ground truth (every cell known).
inline OccupancyMap full_knowledge(const GroundTruthMap& gt) {
    OccupancyMap m = OccupancyMap::unexplored(gt.lattice);
    for (size_t i = 0; i < gt.occupied.size(); ++i)
        m.cells[i] = static_cast<uint8_t>(gt.occupied[i] ? CellState::Occupied : CellState::Free);
    m.version = 1;
    return m;
}

}  // namespace mnav::testutil
