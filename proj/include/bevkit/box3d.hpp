#pragma once

#include <array>
#include <vector>

#include "bevkit/bev.hpp"
#include "bevkit/frames.hpp"
#include "bevkit/geometry.hpp"
#include "bevkit/groundmap.hpp"
#include "bevkit/segment.hpp"

namespace bevkit {

/// z-rotated cuboid. dims are (x_len, y_len, z_len) in the box frame, x along yaw.
struct Box3D {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double x_len = 0.0;
    double y_len = 0.0;
    double z_len = 0.0;
    double yaw = 0.0;

    /// [x_ctr, y_ctr, z_ctr, x_len, y_len, z_len, x_rot, y_rot, z_rot] with zero roll/pitch.
    [[nodiscard]] std::array<double, 9> to_tuple() const {
        return {x, y, z, x_len, y_len, z_len, 0.0, 0.0, yaw};
    }
    [[nodiscard]] OrientedRect footprint() const { return {{x, y}, x_len, y_len, yaw}; }
    [[nodiscard]] double volume() const { return x_len * y_len * z_len; }
};

struct HeightParams {
    double percentile = 95.0;
    double offset = 0.10;
    int min_points = 5;

    /// Throws InvalidConfig.
    void validate() const;
    bool operator==(const HeightParams&) const = default;
};

enum class FootprintMode { Oriented, AxisAligned };

/// Minimum-area rectangle around the mask's cells, each cell inflated to its
/// full res x res extent. AxisAligned mode returns the world bounding
/// rectangle with yaw 0 or pi/2. Throws EmptyMask.
OrientedRect oriented_footprint(const PixelMask& mask, const BevConfig& cfg,
                                FootprintMode mode = FootprintMode::Oriented);

/// Above-ground height: percentile of in-footprint point z minus the ground
/// at the footprint center, plus offset. Throws TooFewPoints, UnknownGround.
double object_height(const Frame& frame, const OrientedRect& footprint, const GroundHeightMap& ground,
                     const HeightParams& hp);

/// Ground elevation under the footprint center. Throws UnknownGround.
double ground_at(const GroundHeightMap& ground, Vec2 p);

/// Throws NonPositiveDim.
Box3D build_box(const OrientedRect& footprint, double height, double ground_z);

/// Running median of each dimension over a centered window (edge windows shrink).
std::vector<Box3D> median_smooth_dims(const std::vector<Box3D>& boxes, int window = 5);

}  // namespace bevkit
