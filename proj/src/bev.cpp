#include "bevkit/bev.hpp"

#include <cmath>
#include <string>

#include "bevkit/segment.hpp"

namespace bevkit {
namespace {

// Absorbs representation error so that e.g. 10.0 / 0.1 yields 100 cells, not 101.
constexpr double kCellEps = 1e-9;

int cell_count(double span, double res) {
    return static_cast<int>(std::ceil(span / res - kCellEps));
}

}  // namespace

int BevConfig::width() const { return cell_count(x_max - x_min, resolution); }
int BevConfig::height() const { return cell_count(y_max - y_min, resolution); }

void BevConfig::validate() const {
    if (!(resolution > 0.0) || !std::isfinite(resolution)) {
        throw Error(ErrorCode::InvalidConfig, "bev.resolution must be > 0");
    }
    if (!(x_max > x_min) || !(y_max > y_min)) {
        throw Error(ErrorCode::InvalidConfig, "bev ranges must satisfy max > min");
    }
    if (width() < 1 || height() < 1) throw Error(ErrorCode::InvalidConfig, "bev grid is empty");
}

std::optional<PixelCoord> world_to_pixel(double x, double y, const BevConfig& cfg) {
    if (!(x >= cfg.x_min && x <= cfg.x_max && y >= cfg.y_min && y <= cfg.y_max)) {
        return std::nullopt;
    }
    const int w = cfg.width();
    const int h = cfg.height();
    int u = static_cast<int>(std::floor((x - cfg.x_min) / cfg.resolution));
    int v = static_cast<int>(std::floor((cfg.y_max - y) / cfg.resolution));
    if (u >= w) u = w - 1;
    if (v >= h) v = h - 1;
    return PixelCoord{u, v};
}

BevImage rasterize(const Frame& frame, const BevConfig& cfg) {
    cfg.validate();
    BevImage img{cfg, Grid<std::uint32_t>(cfg.width(), cfg.height()),
                 BinaryGrid(cfg.width(), cfg.height())};
    for (const auto& p : frame.points) {
        if (auto px = world_to_pixel(p.x, p.y, cfg)) {
            ++img.counts(px->u, px->v);
            img.occupancy(px->u, px->v) = 1;
        }
    }
    return img;
}

WorldPoint pixel_to_world(int u, int v, const BevConfig& cfg) {
    if (u < 0 || v < 0 || u >= cfg.width() || v >= cfg.height()) {
        throw Error(ErrorCode::OutOfGrid,
                    "pixel (" + std::to_string(u) + "," + std::to_string(v) + ")");
    }
    return {cfg.x_min + (u + 0.5) * cfg.resolution, cfg.y_max - (v + 0.5) * cfg.resolution};
}

WorldRect pixel_box_to_world_rect(const BBox2D& box, const BevConfig& cfg) {
    if (box.u_min < 0 || box.v_min < 0 || box.u_max > cfg.width() || box.v_max > cfg.height() ||
        box.u_max <= box.u_min || box.v_max <= box.v_min) {
        throw Error(ErrorCode::OutOfGrid, "pixel box outside grid");
    }
    return {cfg.x_min + box.u_min * cfg.resolution, cfg.y_max - box.v_max * cfg.resolution,
            cfg.x_min + box.u_max * cfg.resolution, cfg.y_max - box.v_min * cfg.resolution};
}

}  // namespace bevkit
