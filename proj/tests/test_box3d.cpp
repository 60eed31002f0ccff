#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bevkit/box3d.hpp"
#include "bevkit/stats.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace bevkit;

namespace {

constexpr double kPi = std::numbers::pi;

GroundHeightMap flat_ground(double z) {
    const BevConfig cfg{0.5, -20.0, 20.0, -20.0, 20.0};
    SampledGround s{cfg, Grid<double>(cfg.width(), cfg.height(), z)};
    return interpolate(s, {});
}

// Pixels whose cell centers fall inside the rectangle.
PixelMask rasterize_rect(const OrientedRect& r, const BevConfig& cfg) {
    BinaryGrid g(cfg.width(), cfg.height());
    for (int v = 0; v < cfg.height(); ++v) {
        for (int u = 0; u < cfg.width(); ++u) {
            const auto c = pixel_to_world(u, v, cfg);
            if (r.contains({c.x, c.y})) g(u, v) = 1;
        }
    }
    return PixelMask::from_grid(g);
}

double angle_diff(double a, double b) {
    // Undirected axes: compare modulo pi.
    double d = std::fmod(std::abs(a - b), kPi);
    return std::min(d, kPi - d);
}

Frame points_at(Vec2 c, const std::vector<double>& zs) {
    Frame f;
    for (std::size_t i = 0; i < zs.size(); ++i) {
        f.points.push_back({c.x + 0.01 * static_cast<double>(i % 5), c.y + 0.01 * static_cast<double>(i / 5), zs[i], {}});
    }
    return f;
}

}  // namespace

TEST(Geometry, ConvexHullAndArea) {
    const auto hull = convex_hull({{0, 0}, {2, 0}, {2, 1}, {0, 1}, {1, 0.5}, {1, 0}, {0.5, 0.2}});
    ASSERT_EQ(hull.size(), 4u);
    EXPECT_DOUBLE_EQ(polygon_area(hull), 2.0);
    Polygon cw{{0, 0}, {0, 1}, {2, 1}, {2, 0}};
    EXPECT_DOUBLE_EQ(polygon_area(cw), -2.0);
    EXPECT_EQ(convex_hull({{1, 1}}).size(), 1u);
}

TEST(Geometry, ClipSquares) {
    const Polygon a{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
    const Polygon b{{1, 1}, {3, 1}, {3, 3}, {1, 3}};
    EXPECT_NEAR(polygon_area(clip_convex(a, b)), 1.0, 1e-12);
    const Polygon far{{5, 5}, {6, 5}, {6, 6}, {5, 6}};
    EXPECT_NEAR(std::abs(polygon_area(clip_convex(a, far))), 0.0, 1e-12);
}

TEST(Geometry, NormalizeHalfPi) {
    EXPECT_DOUBLE_EQ(normalize_half_pi(0.0), 0.0);
    EXPECT_DOUBLE_EQ(normalize_half_pi(kPi / 2), kPi / 2);
    EXPECT_NEAR(normalize_half_pi(-kPi / 2), kPi / 2, 1e-12);
    EXPECT_NEAR(normalize_half_pi(kPi), 0.0, 1e-12);
    EXPECT_NEAR(normalize_half_pi(3 * kPi / 4), -kPi / 4, 1e-12);
}

TEST(Geometry, MinAreaRectMatchesAngleScan) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> c(-3.0, 3.0);
    for (int t = 0; t < 50; ++t) {
        std::vector<Vec2> pts;
        for (int i = 0; i < 12; ++i) pts.push_back({c(rng), c(rng) * 0.4});
        const auto r = min_area_rect(pts);
        EXPECT_GE(r.length, r.width);
        EXPECT_GT(r.yaw, -kPi / 2);
        EXPECT_LE(r.yaw, kPi / 2);
        for (const auto& p : pts) EXPECT_TRUE(r.contains(p, 1e-9));
        // Bounding-box area over a fine sweep of orientations never beats it.
        double best = 1e18;
        for (int k = 0; k < 3600; ++k) {
            const double th = kPi / 2 * k / 3600.0;
            double x0 = 1e9, x1 = -1e9, y0 = 1e9, y1 = -1e9;
            for (const auto& p : pts) {
                const double lx = std::cos(th) * p.x + std::sin(th) * p.y;
                const double ly = -std::sin(th) * p.x + std::cos(th) * p.y;
                x0 = std::min(x0, lx);
                x1 = std::max(x1, lx);
                y0 = std::min(y0, ly);
                y1 = std::max(y1, ly);
            }
            best = std::min(best, (x1 - x0) * (y1 - y0));
        }
        EXPECT_LE(r.area(), best + 1e-9);
        EXPECT_GT(r.area(), best * 0.999);
    }
}

TEST(Footprint, AxisAlignedMask) {
    const BevConfig cfg;
    std::vector<PixelRun> runs;
    for (int v = 50; v < 54; ++v) runs.push_back({v, 100, 110});
    const auto r = oriented_footprint(PixelMask(runs), cfg);
    EXPECT_NEAR(r.length, 1.0, 1e-9);
    EXPECT_NEAR(r.width, 0.4, 1e-9);
    EXPECT_NEAR(r.yaw, 0.0, 1e-9);
    const auto a = oriented_footprint(PixelMask(runs), cfg, FootprintMode::AxisAligned);
    EXPECT_NEAR(a.length, 1.0, 1e-9);
    EXPECT_NEAR(a.width, 0.4, 1e-9);
    EXPECT_EQ(a.yaw, 0.0);
    EXPECT_NEAR(a.center.x, r.center.x, 1e-9);
    EXPECT_NEAR(a.center.y, r.center.y, 1e-9);
}

TEST(Footprint, SinglePixel) {
    const BevConfig cfg;
    const auto r = oriented_footprint(PixelMask({{7, 3, 4}}), cfg);
    EXPECT_NEAR(r.length, 0.1, 1e-9);
    EXPECT_NEAR(r.width, 0.1, 1e-9);
    EXPECT_NEAR(r.yaw, 0.0, 1e-9);
    const auto c = pixel_to_world(3, 7, cfg);
    EXPECT_NEAR(r.center.x, c.x, 1e-9);
    EXPECT_NEAR(r.center.y, c.y, 1e-9);
    EXPECT_BEVKIT_ERROR(oriented_footprint(PixelMask(), cfg), ErrorCode::EmptyMask);
}

TEST(Footprint, RotatedRasterizedRectangle) {
    const BevConfig cfg;
    for (double deg : {30.0, -30.0, 60.0, 10.0}) {
        const OrientedRect truth{{1.3, -2.1}, 4.2, 1.8, deg * kPi / 180};
        const auto r = oriented_footprint(rasterize_rect(truth, cfg), cfg);
        EXPECT_LT(angle_diff(r.yaw, truth.yaw), 5.0 * kPi / 180) << deg;
        EXPECT_NEAR(r.length, truth.length, 0.15 * truth.length) << deg;
        EXPECT_NEAR(r.width, truth.width, 0.15 * truth.width) << deg;
    }
}

TEST(Footprint, ContainmentAndMinimality) {
    const BevConfig cfg;
    std::mt19937_64 rng(23);
    for (int t = 0; t < 100; ++t) {
        BinaryGrid g(cfg.width(), cfg.height());
        const int u0 = 150 + static_cast<int>(rng() % 50);
        const int v0 = 150 + static_cast<int>(rng() % 50);
        for (int i = 0; i < 25; ++i) g(u0 + static_cast<int>(rng() % 15), v0 + static_cast<int>(rng() % 9)) = 1;
        const auto mask = PixelMask::from_grid(g);
        const auto r = oriented_footprint(mask, cfg);
        const auto a = oriented_footprint(mask, cfg, FootprintMode::AxisAligned);
        EXPECT_LE(r.area(), a.area() + 1e-9);
        mask.for_each_pixel([&](int u, int v) {
            const auto c = pixel_to_world(u, v, cfg);
            for (double dx : {-0.05, 0.05}) {
                for (double dy : {-0.05, 0.05}) EXPECT_TRUE(r.contains({c.x + dx, c.y + dy}, 1e-6));
            }
        });
    }
}

TEST(Height, Examples) {
    const auto ground = flat_ground(-2.0);
    const OrientedRect fp{{3.0, 4.0}, 1.0, 1.0, 0.0};
    HeightParams hp;
    hp.min_points = 3;
    // 95th percentile of {-0.6,-0.5,-0.5} is -0.5; 1.5 above ground plus 0.1.
    EXPECT_NEAR(object_height(points_at(fp.center, {-0.6, -0.5, -0.5}), fp, ground, hp), 1.6, 1e-12);
    hp.min_points = 5;
    EXPECT_BEVKIT_ERROR(object_height(points_at(fp.center, {-0.6, -0.5, -0.5}), fp, ground, hp),
                        ErrorCode::TooFewPoints);
    EXPECT_NEAR(object_height(points_at(fp.center, std::vector<double>(8, -2.0)), fp, ground, hp), hp.offset, 1e-12);
    // Points outside the footprint are ignored.
    auto f = points_at(fp.center, std::vector<double>(8, -1.0));
    f.points.push_back({fp.center.x + 0.6, fp.center.y, 5.0, {}});
    EXPECT_NEAR(object_height(f, fp, ground, hp), 1.1, 1e-12);
}

TEST(Height, UnknownGround) {
    const BevConfig cfg{0.5, -20.0, 20.0, -20.0, 20.0};
    SampledGround s{cfg, Grid<double>(cfg.width(), cfg.height(), std::nan(""))};
    s.z(0, 0) = -2.0;
    IdwParams idw;
    idw.max_radius = 1.0;
    const auto ground = interpolate(s, idw);
    const OrientedRect fp{{0.0, 0.0}, 1.0, 1.0, 0.0};
    EXPECT_BEVKIT_ERROR(object_height(points_at(fp.center, std::vector<double>(8, -1.0)), fp, ground, {}),
                        ErrorCode::UnknownGround);
    const OrientedRect outside{{50.0, 0.0}, 1.0, 1.0, 0.0};
    EXPECT_BEVKIT_ERROR(object_height(points_at(outside.center, std::vector<double>(8, -1.0)), outside, ground, {}),
                        ErrorCode::UnknownGround);
}

TEST(Height, MonotoneInPointHeights) {
    const auto ground = flat_ground(-2.0);
    const OrientedRect fp{{-5.0, 2.0}, 2.0, 2.0, 0.4};
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> z(-2.0, 0.0);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> zs(20);
        for (auto& v : zs) v = z(rng);
        auto f = points_at(fp.center, zs);
        const double before = object_height(f, fp, ground, {});
        f.points[rng() % f.points.size()].z += 0.3;
        EXPECT_GE(object_height(f, fp, ground, {}), before);
    }
}

TEST(Percentile, MatchesSortOracle) {
    std::mt19937_64 rng(37);
    std::normal_distribution<double> z(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> v(1 + rng() % 40);
        for (auto& x : v) x = z(rng);
        for (double q : {0.0, 5.0, 25.0, 50.0, 95.0, 100.0}) EXPECT_NEAR(percentile(v, q), oracle::sort_percentile(v, q), 1e-12);
    }
    EXPECT_BEVKIT_ERROR(percentile({}, 50.0), ErrorCode::Empty);
}

TEST(BuildBox, AssemblyAndErrors) {
    const OrientedRect fp{{10.0, 5.0}, 4.2, 1.8, 0.3};
    const auto b = build_box(fp, 1.5, -2.0);
    EXPECT_DOUBLE_EQ(b.x, 10.0);
    EXPECT_DOUBLE_EQ(b.y, 5.0);
    EXPECT_DOUBLE_EQ(b.z, -1.25);
    EXPECT_DOUBLE_EQ(b.x_len, 4.2);
    EXPECT_DOUBLE_EQ(b.y_len, 1.8);
    EXPECT_DOUBLE_EQ(b.z_len, 1.5);
    EXPECT_DOUBLE_EQ(b.yaw, 0.3);
    const auto t = b.to_tuple();
    EXPECT_EQ(t[6], 0.0);
    EXPECT_EQ(t[7], 0.0);
    EXPECT_EQ(t[8], 0.3);
    EXPECT_BEVKIT_ERROR(build_box(fp, 0.0, -2.0), ErrorCode::NonPositiveDim);
    EXPECT_BEVKIT_ERROR(build_box({{0, 0}, 0.0, 1.0, 0.0}, 1.0, -2.0), ErrorCode::NonPositiveDim);
}

TEST(BuildBox, CornerRoundTrip) {
    const BevConfig cfg;
    const OrientedRect truth{{-3.0, 6.0}, 3.6, 1.6, 0.7};
    const auto fp = oriented_footprint(rasterize_rect(truth, cfg), cfg);
    const auto b = build_box(fp, 1.4, -2.0);
    const auto want = fp.corners();
    const auto got = b.footprint().corners();
    for (int i = 0; i < 4; ++i) {
        EXPECT_NEAR(got[i].x, want[i].x, cfg.resolution);
        EXPECT_NEAR(got[i].y, want[i].y, cfg.resolution);
    }
}

TEST(MedianSmooth, RemovesSpikeAndKeepsGround) {
    std::vector<Box3D> boxes;
    for (int i = 0; i < 7; ++i) boxes.push_back({0, 0, -2.0 + 0.75, 4.0, 1.8, 1.5, 0});
    boxes[3].x_len = 9.0;
    boxes[3].z_len = 3.0;
    boxes[3].z = -2.0 + 1.5;
    const auto s = median_smooth_dims(boxes, 5);
    EXPECT_DOUBLE_EQ(s[3].x_len, 4.0);
    EXPECT_DOUBLE_EQ(s[3].z_len, 1.5);
    EXPECT_DOUBLE_EQ(s[3].z, -2.0 + 0.75);
    EXPECT_EQ(median_smooth_dims(boxes, 1)[3].x_len, 9.0);
}
