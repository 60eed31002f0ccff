#include "bevkit/box3d.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "bevkit/stats.hpp"

namespace bevkit {

void HeightParams::validate() const {
    if (!(percentile > 0.0 && percentile <= 100.0)) {
        throw Error(ErrorCode::InvalidConfig, "height.percentile must be in (0,100]");
    }
    if (!(offset >= 0.0)) throw Error(ErrorCode::InvalidConfig, "height.offset must be >= 0");
    if (min_points < 1) throw Error(ErrorCode::InvalidConfig, "height.min_points must be >= 1");
}

OrientedRect oriented_footprint(const PixelMask& mask, const BevConfig& cfg, FootprintMode mode) {
    if (mask.empty()) throw Error(ErrorCode::EmptyMask, "footprint of empty mask");
    const double half = 0.5 * cfg.resolution;
    std::vector<Vec2> corners;
    // Interior pixels of a run cannot be hull vertices; only run ends matter.
    for (const auto& run : mask.runs()) {
        for (int u : {run.u_begin, run.u_end - 1}) {
            const auto c = pixel_to_world(u, run.v, cfg);
            corners.push_back({c.x - half, c.y - half});
            corners.push_back({c.x + half, c.y - half});
            corners.push_back({c.x + half, c.y + half});
            corners.push_back({c.x - half, c.y + half});
        }
    }
    if (mode == FootprintMode::Oriented) return min_area_rect(corners);

    double x0 = corners.front().x;
    double x1 = x0;
    double y0 = corners.front().y;
    double y1 = y0;
    for (const auto& p : corners) {
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
    }
    const Vec2 center{0.5 * (x0 + x1), 0.5 * (y0 + y1)};
    if (x1 - x0 >= y1 - y0) return {center, x1 - x0, y1 - y0, 0.0};
    return {center, y1 - y0, x1 - x0, std::numbers::pi / 2};
}

double ground_at(const GroundHeightMap& ground, Vec2 p) {
    std::optional<double> z;
    try {
        z = query_height(ground, p.x, p.y);
    } catch (const Error&) {
        throw Error(ErrorCode::UnknownGround, "footprint center outside ground map");
    }
    if (!z) throw Error(ErrorCode::UnknownGround, "no ground estimate at footprint center");
    return *z;
}

double object_height(const Frame& frame, const OrientedRect& footprint, const GroundHeightMap& ground,
                     const HeightParams& hp) {
    std::vector<double> zs;
    for (const auto& p : frame.points) {
        if (footprint.contains({p.x, p.y}, 1e-9)) zs.push_back(p.z);
    }
    if (static_cast<int>(zs.size()) < hp.min_points) {
        throw Error(ErrorCode::TooFewPoints,
                    std::to_string(zs.size()) + " points, need " + std::to_string(hp.min_points));
    }
    const double ground_z = ground_at(ground, footprint.center);
    return percentile(std::move(zs), hp.percentile) - ground_z + hp.offset;
}

Box3D build_box(const OrientedRect& footprint, double height, double ground_z) {
    if (!(footprint.length > 0.0) || !(footprint.width > 0.0) || !(height > 0.0)) {
        throw Error(ErrorCode::NonPositiveDim, "box dimensions must be positive");
    }
    return {footprint.center.x, footprint.center.y, ground_z + 0.5 * height,
            footprint.length, footprint.width, height, footprint.yaw};
}

std::vector<Box3D> median_smooth_dims(const std::vector<Box3D>& boxes, int window) {
    std::vector<Box3D> out = boxes;
    const int n = static_cast<int>(boxes.size());
    const int half = std::max(0, window / 2);
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - half);
        const int hi = std::min(n - 1, i + half);
        std::vector<double> xs;
        std::vector<double> ys;
        std::vector<double> zs;
        for (int j = lo; j <= hi; ++j) {
            xs.push_back(boxes[j].x_len);
            ys.push_back(boxes[j].y_len);
            zs.push_back(boxes[j].z_len);
        }
        out[i].x_len = median(xs);
        out[i].y_len = median(ys);
        out[i].z_len = median(zs);
        // Keep the box resting on the same ground.
        const double ground_z = boxes[i].z - 0.5 * boxes[i].z_len;
        out[i].z = ground_z + 0.5 * out[i].z_len;
    }
    return out;
}

}  // namespace bevkit
