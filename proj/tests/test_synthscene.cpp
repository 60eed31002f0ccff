#include <gtest/gtest.h>

#include <cmath>

#include "bevkit/synthscene.hpp"
#include "test_util.hpp"

using namespace bevkit;

namespace {

SceneScript bare_scene() {
    SceneScript sc;
    sc.ground = {0.03, -0.02, -2.0};
    sc.extent_x_min = sc.extent_y_min = -10.0;
    sc.extent_x_max = sc.extent_y_max = 10.0;
    sc.duration = 1.0;
    return sc;
}

// Points of a slim 0.5 x 0.5 x 4 m post at (x, 0), excluding the ground.
long post_points(double x, int frames) {
    SceneScript sc = bare_scene();
    sc.ground = {0.0, 0.0, -2.0};
    sc.extent_x_max = 25.0;
    sc.duration = frames / sc.frame_rate_hz;
    sc.statics = {{x, 0.0, 0.0, 0.5, 0.5, 4.0}};
    long n = 0;
    for (int k = 0; k < frames; ++k) {
        for (const auto& p : sample_frame(sc, k / sc.frame_rate_hz).points) {
            n += std::abs(p.x - x) <= 0.26 && std::abs(p.y) <= 0.26 && p.z > -1.9;
        }
    }
    return n;
}

Agent walker(std::vector<Waypoint> w) {
    Agent a;
    a.label = ClassLabel::Pedestrian;
    a.x_len = 0.5;
    a.y_len = 0.5;
    a.z_len = 1.7;
    a.waypoints = std::move(w);
    return a;
}

}  // namespace

TEST(SynthScene, EmptySceneIsGroundWithinThreeSigma) {
    const auto sc = bare_scene();
    const auto f = sample_frame(sc, 0.5);
    EXPECT_EQ(f.frame_id, 5);
    ASSERT_GT(f.points.size(), 100u);
    for (const auto& p : f.points) {
        EXPECT_LE(std::abs(p.z - sc.ground.at(p.x, p.y)), 3 * sc.sampling.z_noise + 1e-12);
    }
}

TEST(SynthScene, InverseSquareDensity) {
    const double ratio = static_cast<double>(post_points(5.0, 200)) / static_cast<double>(post_points(20.0, 200));
    EXPECT_NEAR(ratio, 16.0, 0.3 * 16.0);
}

TEST(SynthScene, DeterministicPerSeed) {
    const auto sc = intersection_scene(ScenePreset::Near, 7);
    const auto a = sample_frame(sc, 2.0);
    const auto b = sample_frame(sc, 2.0);
    ASSERT_EQ(a.points.size(), b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        EXPECT_EQ(a.points[i].x, b.points[i].x);
        EXPECT_EQ(a.points[i].y, b.points[i].y);
        EXPECT_EQ(a.points[i].z, b.points[i].z);
    }
    auto other = sc;
    other.sampling.seed = 8;
    const auto c = sample_frame(other, 2.0);
    EXPECT_FALSE(c.points.size() == a.points.size() && c.points.front().x == a.points.front().x);
}

TEST(SynthScene, GroundTruthAssembly) {
    SceneScript sc = bare_scene();
    sc.ground = {0.0, 0.0, -2.0};
    Agent car;
    car.waypoints = {{-5.0, 3.0, 0.0}, {5.0, 3.0, 2.0}};
    sc.agents = {car, walker({{2.0, 2.0, 0.0}})};
    const auto gt = emit_ground_truth(sc, 0.4);
    ASSERT_EQ(gt.size(), 1u);  // the walker only exists at t = 0
    EXPECT_EQ(gt[0].frame_id, 4);
    EXPECT_DOUBLE_EQ(gt[0].box.z, -1.25);
    EXPECT_DOUBLE_EQ(gt[0].box.x, -3.0);
    EXPECT_DOUBLE_EQ(gt[0].box.x_len, 4.2);
    EXPECT_EQ(gt[0].x_rot, 0.0);
    EXPECT_EQ(gt[0].y_rot, 0.0);
    EXPECT_EQ(emit_ground_truth(sc, 0.0).size(), 2u);
}

TEST(SynthScene, StationaryAgentIsConstant) {
    SceneScript sc = bare_scene();
    // Walks east, then stands still; the heading persists while standing.
    sc.agents = {walker({{0.0, 5.0, 0.0}, {1.0, 5.0, 0.5}, {1.0, 5.0, 1.0}})};
    const auto a = emit_ground_truth(sc, 0.6);
    const auto b = emit_ground_truth(sc, 0.9);
    ASSERT_EQ(a.size(), 1u);
    EXPECT_EQ(a[0].box.to_tuple(), b[0].box.to_tuple());
    EXPECT_EQ(a[0].box.yaw, 0.0);
    EXPECT_EQ(agent_pose(sc.agents[0], 0.8)->speed, 0.0);
}

TEST(SynthScene, HeadingMatchesFiniteDifference) {
    Agent a = walker({{0.0, 0.0, 0.0}, {3.0, 4.0, 5.0}, {-1.0, 6.0, 9.0}, {-1.0, -2.0, 11.0}});
    for (double t = 0.05; t < 11.0; t += 0.37) {
        const auto p = agent_pose(a, t);
        const auto q = agent_pose(a, t + 1e-6);
        if (!p || !q) continue;
        // Skip samples straddling a waypoint.
        if (std::abs(std::remainder(t, 1.0)) < 1e-3) continue;
        const double fd = std::atan2(q->y - p->y, q->x - p->x);
        EXPECT_NEAR(std::remainder(p->yaw - fd, 2 * 3.141592653589793), 0.0, 1e-6) << t;
    }
    // Piecewise-constant speed equals segment length over duration.
    EXPECT_DOUBLE_EQ(agent_pose(a, 1.0)->speed, 1.0);
    EXPECT_DOUBLE_EQ(agent_pose(a, 6.0)->speed, std::hypot(4.0, 2.0) / 4.0);
    EXPECT_DOUBLE_EQ(agent_pose(a, 10.0)->speed, 4.0);
    EXPECT_FALSE(agent_pose(a, 11.5).has_value());
}

TEST(SynthScene, AgentPointsInsideInflatedBox) {
    auto sc = intersection_scene(ScenePreset::Near, 3);
    const double tol = 3 * sc.sampling.z_noise + 1e-9;
    int checked = 0;
    for (double t : {1.0, 4.0, 7.5}) {
        const auto f = sample_frame(sc, t);
        for (const auto& gt : emit_ground_truth(sc, t)) {
            const auto fp = gt.box.footprint();
            long n = 0;
            for (const auto& p : f.points) {
                if (!fp.contains({p.x, p.y}, 1e-6)) continue;
                ++n;
                EXPECT_GE(p.z, gt.box.z - gt.box.z_len / 2 - tol);
                EXPECT_LE(p.z, gt.box.z + gt.box.z_len / 2 + tol);
            }
            EXPECT_GT(n, 0);
            ++checked;
        }
    }
    EXPECT_GT(checked, 10);
}

TEST(SynthScene, OcclusionRemovesHiddenReturns) {
    SceneScript sc = bare_scene();
    sc.extent_x_max = 25.0;
    sc.statics = {{6.0, 0.0, 0.0, 1.0, 3.0, 2.5}, {15.0, 0.0, 0.0, 1.0, 1.0, 2.5}};
    const auto open = sample_frame(sc, 0.0);
    sc.sampling.occlusion = true;
    const auto shaded = sample_frame(sc, 0.0);
    const auto behind = [](const Frame& f) {
        long n = 0;
        for (const auto& p : f.points) n += std::abs(p.x - 15.0) <= 0.51 && std::abs(p.y) <= 0.51 && p.z > -1.9;
        return n;
    };
    EXPECT_GT(behind(open), 0);
    EXPECT_EQ(behind(shaded), 0);
    EXPECT_LT(shaded.points.size(), open.points.size());
}

TEST(SynthScene, Validation) {
    auto sc = bare_scene();
    EXPECT_BEVKIT_ERROR(sample_frame(sc, 1.5), ErrorCode::TimeOutOfRange);
    EXPECT_BEVKIT_ERROR(sample_frame(sc, -0.1), ErrorCode::TimeOutOfRange);
    sc.ground.a = 0.06;
    EXPECT_BEVKIT_ERROR(sc.validate(), ErrorCode::InvalidConfig);
    sc = bare_scene();
    sc.agents = {walker({{0, 0, 1.0}, {1, 1, 1.0}})};
    EXPECT_BEVKIT_ERROR(sc.validate(), ErrorCode::InvalidConfig);
    EXPECT_EQ(bare_scene().frame_count(), 11);
}

TEST(SynthScene, JsonRoundTripAndStrictKeys) {
    const auto sc = intersection_scene(ScenePreset::Far, 11);
    const auto j = scene_to_json(sc);
    EXPECT_EQ(scene_to_json(scene_from_json(j)), j);
    auto bad = j;
    bad["sampling"]["colour"] = 1;
    EXPECT_BEVKIT_ERROR(scene_from_json(bad), ErrorCode::InvalidConfig);
    bad = j;
    bad["wind"] = 3;
    EXPECT_BEVKIT_ERROR(scene_from_json(bad), ErrorCode::InvalidConfig);
}

TEST(SynthScene, IntersectionPresets) {
    for (auto preset : {ScenePreset::Near, ScenePreset::Far}) {
        const auto sc = intersection_scene(preset);
        EXPECT_EQ(sc.frame_count(), 100);
        int vehicles = 0, pedestrians = 0;
        for (const auto& a : sc.agents) (a.label == ClassLabel::Vehicle ? vehicles : pedestrians)++;
        EXPECT_EQ(vehicles, 5);
        EXPECT_EQ(pedestrians, 3);
        for (int k = 0; k < 100; ++k) {
            for (const auto& gt : emit_ground_truth(sc, k / 10.0)) {
                if (gt.label != ClassLabel::Vehicle) continue;
                const double r = std::hypot(gt.box.x, gt.box.y);
                if (preset == ScenePreset::Near) {
                    EXPECT_LE(r, 15.0);
                } else {
                    EXPECT_GT(r, 15.0);
                }
            }
        }
        for (const auto& a : sc.agents) {
            const double v = a.label == ClassLabel::Vehicle ? 5.0 : 1.3;
            EXPECT_NEAR(agent_pose(a, a.waypoints.front().t)->speed, v, 1e-12);
        }
    }
}

TEST(SynthScene, WriteSequenceLoadsBack) {
    testutil::TempDir dir;
    auto sc = bare_scene();
    sc.agents = {walker({{-3.0, 4.0, 0.0}, {-2.0, 4.0, 1.0}})};
    const auto seq = generate_sequence(sc);
    ASSERT_EQ(seq.frames.size(), 11u);
    EXPECT_EQ(seq.ground_truth.size(), 11u);
    write_sequence(dir.path, seq);
    const auto back = load_sequence(dir.path);
    ASSERT_EQ(back.frames.size(), 11u);
    EXPECT_EQ(back.meta.frame_rate_hz, 10.0);
    for (std::size_t k = 0; k < 11; ++k) {
        ASSERT_EQ(back.frames[k].points.size(), seq.frames[k].points.size());
        EXPECT_EQ(back.frames[k].points[0].z, seq.frames[k].points[0].z);
    }
    EXPECT_EQ(read_ground_truth(dir.path / "ground_truth.jsonl").size(), 11u);
}
