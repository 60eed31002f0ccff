#include "bevkit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "bevkit/error.hpp"

namespace bevkit {

Polygon convex_hull(std::vector<Vec2> pts) {
    std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    Polygon hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

double polygon_area(const Polygon& poly) {
    double a = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) a += cross(poly[i], poly[(i + 1) % poly.size()]);
    return 0.5 * a;
}

Polygon clip_convex(const Polygon& subject, const Polygon& clip) {
    Polygon out = subject;
    for (std::size_t e = 0; e < clip.size() && !out.empty(); ++e) {
        const Vec2 a = clip[e];
        const Vec2 b = clip[(e + 1) % clip.size()];
        const Vec2 edge = b - a;
        const auto side = [&](Vec2 p) { return cross(edge, p - a); };
        Polygon in = std::move(out);
        out.clear();
        for (std::size_t i = 0; i < in.size(); ++i) {
            const Vec2 cur = in[i];
            const Vec2 nxt = in[(i + 1) % in.size()];
            const double sc = side(cur);
            const double sn = side(nxt);
            if (sc >= 0.0) out.push_back(cur);
            if ((sc >= 0.0) != (sn >= 0.0)) {
                const double t = sc / (sc - sn);
                out.push_back(cur + (nxt - cur) * t);
            }
        }
    }
    return out;
}

std::array<Vec2, 4> OrientedRect::corners() const {
    const Vec2 ax{std::cos(yaw), std::sin(yaw)};
    const Vec2 ay{-ax.y, ax.x};
    const Vec2 hx = ax * (0.5 * length);
    const Vec2 hy = ay * (0.5 * width);
    return {center - hx - hy, center + hx - hy, center + hx + hy, center - hx + hy};
}

bool OrientedRect::contains(Vec2 p, double eps) const {
    const Vec2 d = p - center;
    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    const double lx = d.x * c + d.y * s;
    const double ly = -d.x * s + d.y * c;
    return std::abs(lx) <= 0.5 * length + eps && std::abs(ly) <= 0.5 * width + eps;
}

double normalize_half_pi(double angle) {
    constexpr double pi = std::numbers::pi;
    angle = std::fmod(angle, pi);
    if (angle <= -pi / 2) angle += pi;
    if (angle > pi / 2) angle -= pi;
    return angle;
}

OrientedRect min_area_rect(const std::vector<Vec2>& points) {
    if (points.empty()) throw Error(ErrorCode::EmptyMask, "min_area_rect of no points");
    const Polygon hull = convex_hull(points);
    if (hull.size() == 1) return {hull[0], 0.0, 0.0, 0.0};

    OrientedRect best;
    double best_area = std::numeric_limits<double>::infinity();
    const std::size_t edges = hull.size() == 2 ? 1 : hull.size();
    for (std::size_t i = 0; i < edges; ++i) {
        const Vec2 e = hull[(i + 1) % hull.size()] - hull[i];
        const double len = std::hypot(e.x, e.y);
        if (len == 0.0) continue;
        const Vec2 ax = e * (1.0 / len);
        const Vec2 ay{-ax.y, ax.x};
        double lo_x = std::numeric_limits<double>::infinity();
        double hi_x = -lo_x;
        double lo_y = lo_x;
        double hi_y = -lo_x;
        for (const auto& p : hull) {
            lo_x = std::min(lo_x, dot(p, ax));
            hi_x = std::max(hi_x, dot(p, ax));
            lo_y = std::min(lo_y, dot(p, ay));
            hi_y = std::max(hi_y, dot(p, ay));
        }
        const double area = (hi_x - lo_x) * (hi_y - lo_y);
        // Relative tolerance keeps the first edge on exact ties (e.g. squares).
        if (area < best_area * (1.0 - 1e-12)) {
            best_area = area;
            const double mx = 0.5 * (lo_x + hi_x);
            const double my = 0.5 * (lo_y + hi_y);
            best.center = ax * mx + ay * my;
            const double ext_x = hi_x - lo_x;
            const double ext_y = hi_y - lo_y;
            if (ext_x >= ext_y) {
                best.length = ext_x;
                best.width = ext_y;
                best.yaw = std::atan2(ax.y, ax.x);
            } else {
                best.length = ext_y;
                best.width = ext_x;
                best.yaw = std::atan2(ay.y, ay.x);
            }
        }
    }
    best.yaw = normalize_half_pi(best.yaw);
    return best;
}

}  // namespace bevkit
