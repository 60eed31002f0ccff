#pragma once

#include <array>
#include <vector>

namespace bevkit {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    bool operator==(const Vec2&) const = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

using Polygon = std::vector<Vec2>;

/// Counter-clockwise convex hull without collinear points (Andrew's monotone chain).
Polygon convex_hull(std::vector<Vec2> points);

/// Signed area, positive for counter-clockwise winding.
double polygon_area(const Polygon& poly);

/// Intersection of two convex polygons (both counter-clockwise), by
/// Sutherland-Hodgman clipping of `subject` against each edge of `clip`.
Polygon clip_convex(const Polygon& subject, const Polygon& clip);

/// Rectangle with center, full side lengths and heading of its length axis.
struct OrientedRect {
    Vec2 center;
    double length = 0.0;  // along heading
    double width = 0.0;
    double yaw = 0.0;

    /// Corners in counter-clockwise order.
    [[nodiscard]] std::array<Vec2, 4> corners() const;
    [[nodiscard]] bool contains(Vec2 p, double eps = 0.0) const;
    [[nodiscard]] double area() const { return length * width; }
};

/// Wraps an angle into (-pi/2, pi/2].
double normalize_half_pi(double angle);

/// Minimum-area enclosing rectangle of a point set (rotating calipers over
/// its convex hull). The length axis is the longer side; yaw is in
/// (-pi/2, pi/2]. Requires at least one point.
OrientedRect min_area_rect(const std::vector<Vec2>& points);

}  // namespace bevkit
