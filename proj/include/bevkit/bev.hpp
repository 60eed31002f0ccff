#pragma once

#include <cstdint>

#include "bevkit/frames.hpp"
#include "bevkit/grid.hpp"

namespace bevkit {

/// World extent and pixel pitch of a bird's-eye-view raster. Row 0 is the
/// maximum y so images read like a north-up map.
struct BevConfig {
    double resolution = 0.10;
    double x_min = -20.0;
    double x_max = 20.0;
    double y_min = -20.0;
    double y_max = 20.0;

    [[nodiscard]] int width() const;
    [[nodiscard]] int height() const;
    /// Throws InvalidConfig.
    void validate() const;

    bool operator==(const BevConfig&) const = default;
};

struct PixelCoord {
    int u = 0;
    int v = 0;
    bool operator==(const PixelCoord&) const = default;
};

struct WorldPoint {
    double x = 0.0;
    double y = 0.0;
};

/// Axis-aligned world rectangle in meters.
struct WorldRect {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    [[nodiscard]] bool contains(double x, double y, double eps = 0.0) const {
        return x >= x_min - eps && x <= x_max + eps && y >= y_min - eps && y <= y_max + eps;
    }
};

struct BevImage {
    BevConfig config;
    Grid<std::uint32_t> counts;
    BinaryGrid occupancy;

    [[nodiscard]] int width() const { return counts.width(); }
    [[nodiscard]] int height() const { return counts.height(); }
};

/// Pixel containing (x, y), or nullopt when outside the configured ranges.
/// The upper range boundaries clamp into the last column/row.
std::optional<PixelCoord> world_to_pixel(double x, double y, const BevConfig& cfg);

BevImage rasterize(const Frame& frame, const BevConfig& cfg);

/// Cell center of pixel (u, v). Throws OutOfGrid.
WorldPoint pixel_to_world(int u, int v, const BevConfig& cfg);

struct BBox2D;
/// Outer edges of a pixel box (exclusive max). Throws OutOfGrid.
WorldRect pixel_box_to_world_rect(const BBox2D& box, const BevConfig& cfg);

}  // namespace bevkit
