#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace mnav {

struct Vec2 {
    double x = 0.0, y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    bool operator==(const Vec2&) const = default;

    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    // out-of-line: distance values are compared for exact equality across
    // modules, so a single instruction sequence must produce them
    double norm() const;
    Vec2 normalized() const;
};

/// Out-of-line so every translation unit sees one instruction sequence;
/// exact-tie comparisons between modules depend on bitwise-equal results.
double squared_dist(Vec2 a, Vec2 b);

struct Cell {
    int row = 0, col = 0;
    bool operator==(const Cell&) const = default;
    // row-major ordering, used wherever a deterministic scan order is required
    bool operator<(const Cell& o) const {
        return row != o.row ? row < o.row : col < o.col;
    }
};

/// Axis-aligned box in meters.
struct BBox {
    Vec2 lo, hi;

    double width() const { return hi.x - lo.x; }
    double height() const { return hi.y - lo.y; }
    Vec2 center() const { return {(lo.x + hi.x) * 0.5, (lo.y + hi.y) * 0.5}; }
    double max_side() const { return std::max(width(), height()); }

    bool contains(Vec2 p, double tol = 0.0) const {
        return p.x >= lo.x - tol && p.x <= hi.x + tol && p.y >= lo.y - tol && p.y <= hi.y + tol;
    }
    BBox united(const BBox& o) const {
        return {{std::min(lo.x, o.lo.x), std::min(lo.y, o.lo.y)},
                {std::max(hi.x, o.hi.x), std::max(hi.y, o.hi.y)}};
    }
    BBox inflated(double m) const {
        return {{lo.x - m, lo.y - m}, {hi.x + m, hi.y + m}};
    }
    double intersection_area(const BBox& o) const {
        double w = std::min(hi.x, o.hi.x) - std::max(lo.x, o.lo.x);
        double h = std::min(hi.y, o.hi.y) - std::max(lo.y, o.lo.y);
        return (w > 0.0 && h > 0.0) ? w * h : 0.0;
    }
    double area() const { return width() * height(); }
};

/// Grid lattice conventions shared by every module.
///
/// Cell (row, col) covers [col*res, (col+1)*res) x [row*res, (row+1)*res);
/// its center is ((col+0.5)*res, (row+0.5)*res). Row 0 is the first row of a
/// map file, and world y grows with the row index.
struct Lattice {
    int width = 0, height = 0;   // columns, rows
    double resolution = 1.0;     // meters per cell

    bool in_bounds(Cell c) const {
        return c.row >= 0 && c.row < height && c.col >= 0 && c.col < width;
    }
    int index(Cell c) const { return c.row * width + c.col; }
    Cell cell_at(Vec2 p) const {
        return {static_cast<int>(std::floor(p.y / resolution)),
                static_cast<int>(std::floor(p.x / resolution))};
    }
    Vec2 center(Cell c) const {
        return {(c.col + 0.5) * resolution, (c.row + 0.5) * resolution};
    }
    bool matches(const Lattice& o) const {
        return width == o.width && height == o.height && resolution == o.resolution;
    }
    BBox bounds() const { return {{0.0, 0.0}, {width * resolution, height * resolution}}; }
};

/// One step of an Amanatides-Woo grid traversal. `visit(cell, t_entry)` is
/// called for every cell the ray enters, in order, starting with the origin
/// cell at t=0. Traversal stops when visit returns false or t exceeds t_max.
template <typename Visit>
void walk_ray(const Lattice& lat, Vec2 origin, Vec2 dir, double t_max, Visit&& visit) {
    Cell c = lat.cell_at(origin);
    if (!lat.in_bounds(c)) return;
    if (!visit(c, 0.0)) return;

    const double res = lat.resolution;
    int step_col = dir.x > 0.0 ? 1 : (dir.x < 0.0 ? -1 : 0);
    int step_row = dir.y > 0.0 ? 1 : (dir.y < 0.0 ? -1 : 0);

    double t_max_x, t_max_y, t_delta_x, t_delta_y;
    if (step_col != 0) {
        double next_x = (step_col > 0 ? (c.col + 1) * res : c.col * res);
        t_max_x = (next_x - origin.x) / dir.x;
        t_delta_x = res / std::abs(dir.x);
    } else {
        t_max_x = std::numeric_limits<double>::infinity();
        t_delta_x = std::numeric_limits<double>::infinity();
    }
    if (step_row != 0) {
        double next_y = (step_row > 0 ? (c.row + 1) * res : c.row * res);
        t_max_y = (next_y - origin.y) / dir.y;
        t_delta_y = res / std::abs(dir.y);
    } else {
        t_max_y = std::numeric_limits<double>::infinity();
        t_delta_y = std::numeric_limits<double>::infinity();
    }

    while (true) {
        double t;
        if (t_max_x < t_max_y) {
            t = t_max_x;
            t_max_x += t_delta_x;
            c.col += step_col;
        } else if (t_max_y < t_max_x) {
            t = t_max_y;
            t_max_y += t_delta_y;
            c.row += step_row;
        } else {
            // exact corner crossing: step diagonally (a thin ray touches the
            // two side cells only at their corner)
            t = t_max_x;
            t_max_x += t_delta_x;
            t_max_y += t_delta_y;
            c.col += step_col;
            c.row += step_row;
        }
        if (t > t_max || !lat.in_bounds(c)) return;
        if (!visit(c, t)) return;
    }
}

inline double wrap_angle(double a) {
    a = std::fmod(a + M_PI, 2.0 * M_PI);
    if (a < 0.0) a += 2.0 * M_PI;
    return a - M_PI;
}

}  // namespace mnav
