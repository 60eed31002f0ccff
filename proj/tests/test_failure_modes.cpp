// Known classifier failure modes, reproduced on synthetic scenes: a tight
// group of pedestrians reads as one vehicle, and a vehicle seen only by its
// rear face reads as a pedestrian.

#include <gtest/gtest.h>

#include "bevkit/box3d.hpp"
#include "bevkit/io.hpp"
#include "bevkit/pipeline.hpp"
#include "bevkit/synthscene.hpp"
#include "test_util.hpp"

using namespace bevkit;

namespace {

SceneScript empty_street() {
    SceneScript sc;
    sc.ground = {0.0, 0.0, -2.0};
    sc.statics = {{-12.0, 14.0, 0.0, 6.0, 4.0, 5.0}};
    return sc;
}

// Class votes over a single-vehicle scene, with footprints from every return
// above the ground.
ClassLabel classify_lone_vehicle(const Agent& vehicle, const BevConfig& cfg) {
    SceneScript sc = empty_street();
    sc.statics.clear();
    sc.agents = {vehicle};
    std::vector<Box3D> boxes;
    for (double t = 0.0; t <= 1.0; t += 0.1) {
        BinaryGrid above(cfg.width(), cfg.height());
        for (const auto& p : sample_frame(sc, t).points) {
            if (p.z < sc.ground.c + 0.3) continue;
            if (const auto px = world_to_pixel(p.x, p.y, cfg)) above(px->u, px->v) = 1;
        }
        const auto fp = oriented_footprint(PixelMask::from_grid(above), cfg);
        boxes.push_back(build_box(fp, vehicle.z_len, sc.ground.c));
    }
    return classify_track(boxes);
}

}  // namespace

TEST(FailureModes, PedestrianCrowdCountsAsVehicle) {
    testutil::TempDir dir;
    SceneScript sc = empty_street();
    // Six walkers in a 3 x 2 block, 0.6 m apart, moving together at 1.3 m/s
    // along a lane 10 m out.
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 2; ++j) {
            Agent a;
            a.label = ClassLabel::Pedestrian;
            a.x_len = a.y_len = 0.5;
            a.z_len = 1.7;
            const double x0 = -7.0 + 0.6 * i, y = 10.0 + 0.6 * j;
            a.waypoints = {{x0, y, 0.0}, {x0 + 1.3 * 9.9, y, 9.9}};
            sc.agents.push_back(a);
        }
    }
    write_sequence(dir.path / "frames", generate_sequence(sc));
    PipelineConfig cfg;
    cfg.input = dir.path / "frames";
    cfg.out = dir.path / "out";
    run_pipeline(cfg);
    const auto counts = nlohmann::json::parse(read_text_file(cfg.out / "counts.json"));
    EXPECT_EQ(counts.value("Vehicle", 0), 1);
    EXPECT_EQ(counts.value("Pedestrian", 0), 0);
}

TEST(FailureModes, EndOnVehicleWithHiddenRoofCountsAsPedestrian) {
    const BevConfig cfg{0.1, -40.0, 40.0, -40.0, 40.0};
    Agent car;
    car.waypoints = {{28.0, 0.0, 0.0}, {33.0, 0.0, 1.0}};
    // Roof below the sensor: the top face is sampled and the footprint is whole.
    EXPECT_EQ(classify_lone_vehicle(car, cfg), ClassLabel::Vehicle);
    // A van taller than the sensor mount, driving straight away: only the
    // rear face returns, so the footprint collapses to a thin strip.
    Agent van = car;
    van.z_len = 2.5;
    EXPECT_EQ(classify_lone_vehicle(van, cfg), ClassLabel::Pedestrian);
}
