#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bevkit/stats.hpp"
#include "bevkit/traffic.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace bevkit;

namespace {

std::vector<Vec2> line(int n, double step, Vec2 start = {}) {
    std::vector<Vec2> p;
    for (int i = 0; i < n; ++i) p.push_back({start.x + step * i, start.y + 0.5 * step * i});
    return p;
}

// Direct convolution with the truncated, renormalized kernel and clamped indices.
std::vector<Vec2> reference_smooth(const std::vector<Vec2>& p, double sigma) {
    const int r = static_cast<int>(std::ceil(4 * sigma));
    const int n = static_cast<int>(p.size());
    std::vector<Vec2> out;
    for (int i = 0; i < n; ++i) {
        double wx = 0, wy = 0, ws = 0;
        for (int k = -r; k <= r; ++k) {
            const double w = std::exp(-(k * k) / (2 * sigma * sigma));
            const auto& q = p[std::min(std::max(i + k, 0), n - 1)];
            wx += w * q.x;
            wy += w * q.y;
            ws += w;
        }
        out.push_back({wx / ws, wy / ws});
    }
    return out;
}

Box3D footprint_box(double lx, double ly) { return {0, 0, -1.25, lx, ly, 1.5, 0}; }

}  // namespace

TEST(Smoothing, ConstantAndLinear) {
    const std::vector<Vec2> still(25, {3.0, -1.0});
    for (const auto& p : smooth_trajectory(still, 2.0)) {
        EXPECT_NEAR(p.x, 3.0, 1e-12);
        EXPECT_NEAR(p.y, -1.0, 1e-12);
    }
    const auto l = line(40, 0.5, {2.0, 1.0});
    const auto s = smooth_trajectory(l, 2.0);
    for (int i = 8; i < 32; ++i) {
        EXPECT_NEAR(s[i].x, l[i].x, 1e-9);
        EXPECT_NEAR(s[i].y, l[i].y, 1e-9);
    }
    EXPECT_TRUE(smooth_trajectory({}, 2.0).empty());
}

TEST(Smoothing, MatchesReferenceAndTranslates) {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<Vec2> p;
    for (int i = 0; i < 33; ++i) p.push_back({n(rng), n(rng)});
    const auto got = smooth_trajectory(p, 1.5);
    const auto want = reference_smooth(p, 1.5);
    for (std::size_t i = 0; i < p.size(); ++i) {
        EXPECT_NEAR(got[i].x, want[i].x, 1e-12);
        EXPECT_NEAR(got[i].y, want[i].y, 1e-12);
    }
    auto shifted = p;
    for (auto& q : shifted) q = q + Vec2{7.5, -3.25};
    const auto gs = smooth_trajectory(shifted, 1.5);
    for (std::size_t i = 0; i < p.size(); ++i) {
        EXPECT_NEAR(gs[i].x, got[i].x + 7.5, 1e-9);
        EXPECT_NEAR(gs[i].y, got[i].y - 3.25, 1e-9);
    }
}

TEST(Smoothing, ReducesNoiseOnSinePath) {
    std::mt19937_64 rng(43);
    std::normal_distribution<double> n(0.0, 0.2);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Vec2> truth, noisy;
        for (int i = 0; i < 80; ++i) {
            truth.push_back({0.3 * i, 2.0 * std::sin(0.05 * i)});
            noisy.push_back({truth.back().x + n(rng), truth.back().y + n(rng)});
        }
        const auto s = smooth_trajectory(noisy, 2.0);
        double before = 0, after = 0;
        for (int i = 8; i < 72; ++i) {
            before += std::pow(noisy[i].x - truth[i].x, 2) + std::pow(noisy[i].y - truth[i].y, 2);
            after += std::pow(s[i].x - truth[i].x, 2) + std::pow(s[i].y - truth[i].y, 2);
        }
        EXPECT_LT(after, before);
    }
}

TEST(Speed, ConstantVelocityAndStationary) {
    std::vector<Vec2> p;
    for (int i = 0; i < 12; ++i) p.push_back({0.5 * i, 0.0});
    for (double v : compute_speed(p, 10.0)) EXPECT_NEAR(v, 5.0, 1e-12);
    for (double v : compute_speed(std::vector<Vec2>(5, {1.0, 1.0}), 10.0)) EXPECT_EQ(v, 0.0);
    EXPECT_BEVKIT_ERROR(compute_speed({{0.0, 0.0}}, 10.0), ErrorCode::TooShort);
    // A gap of two frames is a longer time step, not a faster object.
    const auto g = compute_speed({{0.0, 0.0}, {0.5, 0.0}, {1.5, 0.0}}, {0, 1, 3}, 10.0);
    EXPECT_NEAR(g[0], 5.0, 1e-12);
    EXPECT_NEAR(g[1], 5.0, 1e-12);
    EXPECT_NEAR(g[2], 5.0, 1e-12);
}

TEST(Speed, SmoothingInvariantInterior) {
    const auto l = line(50, 0.4);
    const auto raw = compute_speed(l, 10.0);
    const auto smooth = compute_speed(smooth_trajectory(l, 2.0), 10.0);
    for (int i = 9; i < 41; ++i) EXPECT_NEAR(smooth[i], raw[i], 1e-9);
}

TEST(Speed, TrackMeanUsesInteriorSamples) {
    std::vector<Vec2> p;
    std::vector<std::int64_t> ids;
    for (int i = 0; i < 30; ++i) {
        p.push_back({0.5 * i, 0.0});
        ids.push_back(100 + i);
    }
    const auto k = track_kinematics(4, ClassLabel::Vehicle, ids, p, 10.0, 2.0);
    EXPECT_EQ(k.edge_frames, 8);
    EXPECT_NEAR(k.mean_speed(), 5.0, 1e-4);
    // Edge samples are slowed by the replicated boundary.
    EXPECT_LT(k.speed.front(), 4.0);
    // Too short for an interior: every sample counts.
    const auto s = track_kinematics(5, ClassLabel::Vehicle, {0, 1, 2}, {{0, 0}, {0.5, 0}, {1.0, 0}}, 10.0, 2.0);
    double sum = 0;
    for (double v : s.speed) sum += v;
    EXPECT_NEAR(s.mean_speed(), sum / 3, 1e-12);
}

TEST(Speed, MphConversion) {
    EXPECT_NEAR(3.88 * kMphPerMps, 8.68, 0.005);
    EXPECT_NEAR(1.76 * kMphPerMps, 3.94, 0.005);
    EXPECT_NEAR(1.0 * kMphPerMps, 3600.0 / 1609.344, 1e-6);
}

TEST(Acceleration, ConstantAndRamp) {
    for (double a : compute_acceleration(std::vector<double>(10, 4.0), 10.0)) EXPECT_EQ(a, 0.0);
    std::vector<double> ramp;
    for (int i = 0; i <= 10; ++i) ramp.push_back(0.5 * i);
    const auto a = compute_acceleration(ramp, 10.0);
    for (std::size_t i = 1; i + 1 < a.size(); ++i) EXPECT_NEAR(a[i], 5.0, 1e-12);
    std::vector<double> brake{5.0, 4.0, 3.0};
    EXPECT_NEAR(compute_acceleration(brake, 10.0)[1], -10.0, 1e-12);
    EXPECT_BEVKIT_ERROR(compute_acceleration({1.0}, 10.0), ErrorCode::TooShort);
}

TEST(Classify, Examples) {
    EXPECT_EQ(classify_track(std::vector<Box3D>(5, footprint_box(4.2, 1.8))), ClassLabel::Vehicle);
    EXPECT_EQ(classify_track(std::vector<Box3D>(5, footprint_box(0.5, 0.5))), ClassLabel::Pedestrian);
    std::vector<Box3D> mixed(6, footprint_box(4.2, 1.8));
    mixed.insert(mixed.end(), 4, footprint_box(0.5, 0.5));
    EXPECT_EQ(classify_track(mixed), ClassLabel::Vehicle);
    std::vector<Box3D> tie(3, footprint_box(4.2, 1.8));
    tie.insert(tie.end(), 3, footprint_box(0.5, 0.5));
    EXPECT_EQ(classify_track(tie), ClassLabel::Vehicle);
}

TEST(Classify, ThresholdMonotone) {
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> side(0.3, 4.0);
    for (int t = 0; t < 200; ++t) {
        std::vector<Box3D> boxes;
        for (int i = 0; i < 7; ++i) boxes.push_back(footprint_box(side(rng), side(rng)));
        bool was_pedestrian = false;
        for (double th = 0.5; th <= 10.0; th += 0.5) {
            const bool ped = classify_track(boxes, th) == ClassLabel::Pedestrian;
            EXPECT_FALSE(was_pedestrian && !ped);
            was_pedestrian = ped;
        }
    }
}

TEST(Counts, ByClass) {
    using L = ClassLabel;
    EXPECT_EQ(count_by_class({{1, L::Vehicle}, {2, L::Vehicle}, {3, L::Vehicle}, {4, L::Pedestrian}, {5, L::Pedestrian}}),
              (ClassCounts{3, 2}));
    EXPECT_EQ(count_by_class({}), (ClassCounts{0, 0}));
    EXPECT_EQ(count_by_class({{1, L::Vehicle}, {1, L::Vehicle}}), (ClassCounts{1, 0}));
    EXPECT_EQ(parse_class_label(to_string(L::Pedestrian)), L::Pedestrian);
    EXPECT_BEVKIT_ERROR(parse_class_label("Bicycle"), ErrorCode::InvalidConfig);
}

TEST(DescribeStats, Examples) {
    const std::vector<double> v{1, 2, 3, 4, 5};
    const auto s = describe_stats(v);
    EXPECT_DOUBLE_EQ(s.mean, 3.0);
    EXPECT_DOUBLE_EQ(s.p50, 3.0);
    EXPECT_DOUBLE_EQ(s.p25, 2.0);
    EXPECT_DOUBLE_EQ(s.p75, 4.0);
    EXPECT_DOUBLE_EQ(s.p90, 4.6);
    EXPECT_DOUBLE_EQ(s.min, 1.0);
    EXPECT_DOUBLE_EQ(s.std, std::sqrt(2.0));
    const std::vector<double> one{7.25};
    const auto o = describe_stats(one);
    EXPECT_EQ(o.mean, 7.25);
    EXPECT_EQ(o.p90, 7.25);
    EXPECT_EQ(o.std, 0.0);
    EXPECT_BEVKIT_ERROR(describe_stats(std::vector<double>{}), ErrorCode::Empty);
}

TEST(DescribeStats, MatchesNaiveOracle) {
    std::mt19937_64 rng(53);
    std::lognormal_distribution<double> d(0.0, 1.0);
    for (int t = 0; t < 20; ++t) {
        std::vector<double> v(1000);
        for (auto& x : v) x = d(rng) - 1.0;
        const auto s = describe_stats(v);
        double sum = 0;
        for (double x : v) sum += x;
        const double mean = sum / v.size();
        double ss = 0;
        for (double x : v) ss += (x - mean) * (x - mean);
        EXPECT_NEAR(s.mean, mean, 1e-9);
        EXPECT_NEAR(s.std, std::sqrt(ss / v.size()), 1e-9);
        EXPECT_NEAR(s.min, *std::min_element(v.begin(), v.end()), 1e-12);
        EXPECT_NEAR(s.p25, oracle::sort_percentile(v, 25), 1e-9);
        EXPECT_NEAR(s.p50, oracle::sort_percentile(v, 50), 1e-9);
        EXPECT_NEAR(s.p75, oracle::sort_percentile(v, 75), 1e-9);
        EXPECT_NEAR(s.p90, oracle::sort_percentile(v, 90), 1e-9);
        EXPECT_EQ(s.count, 1000u);
    }
}
