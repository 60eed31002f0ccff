#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bevkit/groundmap.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace bevkit;

namespace {

BevConfig small_cfg() { return {0.5, -10.0, 10.0, -10.0, 10.0}; }

SampledGround empty_sampled(const BevConfig& cfg) {
    return {cfg, Grid<double>(cfg.width(), cfg.height(), std::nan(""))};
}

Frame plane_frame(const BevConfig& cfg, double a, double b, double c, double noise, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, noise);
    Frame f;
    for (int v = 0; v < cfg.height(); ++v) {
        for (int u = 0; u < cfg.width(); ++u) {
            const auto p = pixel_to_world(u, v, cfg);
            for (int k = 0; k < 3; ++k) f.points.push_back({p.x, p.y, a * p.x + b * p.y + c + (noise > 0 ? n(rng) : 0.0), {}});
        }
    }
    return f;
}

}  // namespace

TEST(GroundSamples, ConstantPlane) {
    const auto cfg = small_cfg();
    std::vector<Frame> frames{plane_frame(cfg, 0, 0, -2.0, 0.02, 1), plane_frame(cfg, 0, 0, -2.0, 0.02, 2)};
    const auto s = accumulate_ground_samples(frames, BinaryGrid(cfg.width(), cfg.height(), 1), cfg);
    for (const auto& cell : s.cells) {
        ASSERT_EQ(cell.size(), 6u);
        for (float z : cell) EXPECT_NEAR(z, -2.0, 0.1);
    }
}

TEST(GroundSamples, NeverBackgroundCellIsEmpty) {
    const auto cfg = small_cfg();
    BinaryGrid bg(cfg.width(), cfg.height(), 1);
    bg(3, 4) = 0;
    std::vector<Frame> frames{plane_frame(cfg, 0, 0, -2.0, 0.0, 1)};
    const auto s = accumulate_ground_samples(frames, bg, cfg);
    EXPECT_TRUE(s.cells[bg.index(3, 4)].empty());
    EXPECT_EQ(s.cells[bg.index(4, 4)].size(), 3u);
}

TEST(GroundSamples, MatchesRecount) {
    const BevConfig cfg{1.0, 0.0, 6.0, 0.0, 4.0};
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ux(-1.0, 7.0), uy(-1.0, 5.0), uz(-3.0, 0.0);
    std::vector<Frame> frames(3);
    for (auto& f : frames) {
        for (int i = 0; i < 60; ++i) f.points.push_back({ux(rng), uy(rng), uz(rng), {}});
    }
    auto bg = oracle::random_grid(rng, cfg.width(), cfg.height(), 0.6);
    const auto s = accumulate_ground_samples(frames, bg, cfg);
    for (int v = 0; v < cfg.height(); ++v) {
        for (int u = 0; u < cfg.width(); ++u) {
            std::size_t count = 0;
            if (bg(u, v)) {
                for (const auto& f : frames) {
                    for (const auto& p : f.points) {
                        // Unit cells; rows count down from y_max, far edges clamp inward.
                        const int pu = std::min(static_cast<int>(std::floor(p.x - cfg.x_min)), cfg.width() - 1);
                        const int pv = std::min(static_cast<int>(std::floor(cfg.y_max - p.y)), cfg.height() - 1);
                        if (p.x >= cfg.x_min && p.x <= cfg.x_max && p.y >= cfg.y_min && p.y <= cfg.y_max &&
                            pu == u && pv == v) {
                            ++count;
                        }
                    }
                }
            }
            EXPECT_EQ(s.cells[bg.index(u, v)].size(), count) << u << "," << v;
        }
    }
}

TEST(GroundSamples, DimensionMismatch) {
    const auto cfg = small_cfg();
    EXPECT_BEVKIT_ERROR(accumulate_ground_samples({}, BinaryGrid(3, 3), cfg), ErrorCode::DimensionMismatch);
    std::vector<Frame> frames{Frame{}};
    EXPECT_BEVKIT_ERROR(accumulate_ground_samples(frames, BinaryGrid(3, 3), cfg), ErrorCode::DimensionMismatch);
}

TEST(CellGround, PercentileAndSupportGate) {
    const BevConfig cfg{1.0, 0.0, 3.0, 0.0, 1.0};
    GroundSamples s{cfg, {{-2.0f, -2.0f, -1.9f}, {-2.0f, -2.0f, 0.5f}, {-2.0f, -1.0f}}};
    const auto g = estimate_cell_ground(s, 5.0, 3);
    EXPECT_NEAR(g.z(0, 0), -2.0, 1e-6);
    EXPECT_NEAR(g.z(1, 0), -2.0, 1e-6);
    EXPECT_TRUE(std::isnan(g.z(2, 0)));
    // Linear interpolation at rank (n-1)q/100, checked against sorting.
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<float> z(-3.0f, 1.0f);
    GroundSamples r{cfg, std::vector<std::vector<float>>(3)};
    for (auto& cell : r.cells) {
        for (int i = 0; i < 17; ++i) cell.push_back(z(rng));
    }
    const auto gr = estimate_cell_ground(r, 5.0, 3);
    for (int u = 0; u < 3; ++u) {
        std::vector<double> vals(r.cells[u].begin(), r.cells[u].end());
        EXPECT_NEAR(gr.z(u, 0), oracle::sort_percentile(vals, 5.0), 1e-12);
    }
}

TEST(Interpolate, ConstantFieldIsFixedPoint) {
    const auto cfg = small_cfg();
    auto s = empty_sampled(cfg);
    for (int v = 0; v < cfg.height(); v += 7) {
        for (int u = 0; u < cfg.width(); u += 5) s.z(u, v) = -2.0;
    }
    const auto m = interpolate(s, {});
    for (int v = 0; v < cfg.height(); ++v) {
        for (int u = 0; u < cfg.width(); ++u) {
            ASSERT_NE(m.state(u, v), CellState::Unknown);
            EXPECT_EQ(m.z(u, v), -2.0);
        }
    }
}

TEST(Interpolate, SlopedPlaneRms) {
    const BevConfig cfg{0.1, -20.0, 20.0, -20.0, 20.0};
    auto s = empty_sampled(cfg);
    for (int v = 0; v < cfg.height(); v += 15) {
        for (int u = 0; u < cfg.width(); u += 15) {
            const auto p = pixel_to_world(u, v, cfg);
            s.z(u, v) = 0.02 * p.x;
        }
    }
    const auto m = interpolate(s, {});
    double se = 0.0;
    int n = 0;
    for (int v = 0; v < cfg.height(); ++v) {
        for (int u = 0; u < cfg.width(); ++u) {
            const auto p = pixel_to_world(u, v, cfg);
            if (std::abs(p.x) > 15 || std::abs(p.y) > 15) continue;
            se += std::pow(m.z(u, v) - 0.02 * p.x, 2);
            ++n;
        }
    }
    EXPECT_LT(std::sqrt(se / n), 0.05);
}

TEST(Interpolate, RadiusGate) {
    const auto cfg = small_cfg();
    auto s = empty_sampled(cfg);
    s.z(0, 0) = -2.0;
    IdwParams idw;
    idw.max_radius = 3.0;
    const auto m = interpolate(s, idw);
    EXPECT_EQ(m.state(0, 0), CellState::Sampled);
    EXPECT_EQ(m.state(6, 0), CellState::Interpolated);  // 3.0 m away
    EXPECT_EQ(m.state(7, 0), CellState::Unknown);
    EXPECT_EQ(m.state(39, 39), CellState::Unknown);
    EXPECT_FALSE(query_height(m, 9.9, 9.9).has_value());
}

TEST(Interpolate, MatchesBruteForceIdwAndBounds) {
    const auto cfg = small_cfg();
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> z(-2.5, -1.5);
    auto s = empty_sampled(cfg);
    std::vector<std::tuple<int, int, double>> pts;
    for (int i = 0; i < 30; ++i) {
        const int u = static_cast<int>(rng() % cfg.width());
        const int v = static_cast<int>(rng() % cfg.height());
        if (!std::isnan(s.z(u, v))) continue;
        s.z(u, v) = z(rng);
        pts.push_back({u, v, s.z(u, v)});
    }
    IdwParams idw;
    idw.max_radius = 6.0;
    const auto m = interpolate(s, idw);
    int compared = 0;
    for (int v = 0; v < cfg.height(); ++v) {
        for (int u = 0; u < cfg.width(); ++u) {
            if (m.state(u, v) == CellState::Sampled) {
                EXPECT_EQ(m.z(u, v), s.z(u, v));
                continue;
            }
            std::vector<std::pair<long, double>> near;
            for (const auto& [pu, pv, pz] : pts) {
                const long d2 = static_cast<long>(pu - u) * (pu - u) + static_cast<long>(pv - v) * (pv - v);
                if (std::sqrt(static_cast<double>(d2)) * cfg.resolution <= idw.max_radius) near.push_back({d2, pz});
            }
            if (near.empty()) {
                EXPECT_EQ(m.state(u, v), CellState::Unknown);
                continue;
            }
            ASSERT_EQ(m.state(u, v), CellState::Interpolated);
            std::sort(near.begin(), near.end());
            const std::size_t k = std::min<std::size_t>(idw.k, near.size());
            if (k < near.size() && near[k].first == near[k - 1].first) continue;  // ambiguous k-th neighbor
            double ws = 0, zs = 0, lo = 1e9, hi = -1e9;
            for (std::size_t i = 0; i < k; ++i) {
                const double w = 1.0 / std::pow(std::sqrt(static_cast<double>(near[i].first)) * cfg.resolution, 2.0);
                ws += w;
                zs += w * near[i].second;
                lo = std::min(lo, near[i].second);
                hi = std::max(hi, near[i].second);
            }
            EXPECT_NEAR(m.z(u, v), zs / ws, 1e-12);
            EXPECT_GE(m.z(u, v), lo - 1e-12);
            EXPECT_LE(m.z(u, v), hi + 1e-12);
            ++compared;
        }
    }
    EXPECT_GT(compared, 100);
}

TEST(Interpolate, IdempotentOnCompleteMap) {
    const auto cfg = small_cfg();
    auto s = empty_sampled(cfg);
    for (int v = 0; v < cfg.height(); v += 4) {
        for (int u = 0; u < cfg.width(); u += 3) s.z(u, v) = -2.0 + 0.01 * u - 0.02 * v;
    }
    const auto once = interpolate(s, {});
    const auto twice = interpolate({cfg, once.z}, {});
    for (std::size_t i = 0; i < once.z.size(); ++i) EXPECT_EQ(once.z.data()[i], twice.z.data()[i]);
    EXPECT_BEVKIT_ERROR(interpolate(empty_sampled(cfg), {}), ErrorCode::NoSamples);
}

TEST(QueryHeight, NearestCellContract) {
    const auto cfg = small_cfg();
    auto s = empty_sampled(cfg);
    s.z(10, 10) = -1.7;
    s.z(11, 10) = -1.9;
    const auto m = interpolate(s, {});
    const auto c = pixel_to_world(10, 10, cfg);
    EXPECT_EQ(query_height(m, c.x, c.y), -1.7);
    // Anywhere in the cell returns the same value, no bilinear blending.
    EXPECT_EQ(query_height(m, c.x + 0.24, c.y - 0.24), -1.7);
    EXPECT_BEVKIT_ERROR(query_height(m, 10.5, 0.0), ErrorCode::OutOfGrid);
    EXPECT_BEVKIT_ERROR(query_height(m, 0.0, -11.0), ErrorCode::OutOfGrid);
}

TEST(GroundMapIo, CsvRoundTrip) {
    testutil::TempDir dir;
    const auto cfg = small_cfg();
    auto s = empty_sampled(cfg);
    s.z(0, 0) = -2.0;
    s.z(5, 9) = -1.953125;
    IdwParams idw;
    idw.max_radius = 4.0;
    auto m = interpolate(s, idw);
    m.params.percentile = 7.5;
    write_ground_map(dir.path / "ground_map.csv", m);
    EXPECT_TRUE(std::filesystem::exists(dir.path / "ground_map.json"));
    const auto r = read_ground_map(dir.path / "ground_map.csv");
    EXPECT_EQ(r.config, m.config);
    EXPECT_EQ(r.params, m.params);
    for (std::size_t i = 0; i < m.z.size(); ++i) {
        ASSERT_EQ(r.state.data()[i], m.state.data()[i]);
        if (m.state.data()[i] != CellState::Unknown) EXPECT_EQ(r.z.data()[i], m.z.data()[i]);
    }
}
