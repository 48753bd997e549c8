#include "mnav/geometry.hpp"

namespace mnav {

double squared_dist(Vec2 a, Vec2 b) {
    const double dx = a.x - b.x, dy = a.y - b.y;
    return dx * dx + dy * dy;
}

double Vec2::norm() const { return std::sqrt(squared_dist(*this, Vec2{})); }

Vec2 Vec2::normalized() const {
    const double n = norm();
    return n > 0.0 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
}

}  // namespace mnav
