#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bevkit/eval3d.hpp"
#include "bevkit/frames.hpp"
#include "bevkit/traffic.hpp"

namespace bevkit {

/// z = a*x + b*y + c in the sensor frame (c is minus the sensor height).
struct GroundPlane {
    double a = 0.0;
    double b = 0.0;
    double c = -2.0;

    [[nodiscard]] double at(double x, double y) const { return a * x + b * y + c; }
};

struct StaticCuboid {
    double x = 0.0;
    double y = 0.0;
    double yaw = 0.0;
    double x_len = 1.0;
    double y_len = 1.0;
    double z_len = 1.0;
};

struct Waypoint {
    double x = 0.0;
    double y = 0.0;
    double t = 0.0;
};

struct Agent {
    ClassLabel label = ClassLabel::Vehicle;
    double x_len = 4.2;
    double y_len = 1.8;
    double z_len = 1.5;
    std::vector<Waypoint> waypoints;  // piecewise-linear, increasing t
};

struct SamplingParams {
    double base_density = 200.0;  // points per m^2 of surface at reference_range
    double reference_range = 5.0;
    double min_range = 1.0;            // density is capped inside this range
    double ground_density_scale = 0.05; // ground returns relative to object faces
    double z_noise = 0.02;
    std::uint64_t seed = 42;
    bool occlusion = false;
    double occlusion_bin_deg = 0.5;
};

struct SceneScript {
    GroundPlane ground;
    double extent_x_min = -25.0;  // ground patch
    double extent_x_max = 25.0;
    double extent_y_min = -25.0;
    double extent_y_max = 25.0;
    std::vector<StaticCuboid> statics;
    std::vector<Agent> agents;
    SamplingParams sampling;
    double duration = 9.9;  // seconds; valid times are [0, duration]
    double frame_rate_hz = 10.0;

    /// Throws InvalidConfig.
    void validate() const;
    [[nodiscard]] std::int64_t frame_count() const;
};

struct AgentPose {
    double x = 0.0;
    double y = 0.0;
    double yaw = 0.0;
    double speed = 0.0;
};

/// Pose at time t, or nullopt when t is outside the agent's waypoint span.
std::optional<AgentPose> agent_pose(const Agent& agent, double t);

/// Samples one sweep at time t; frame_id = round(t * frame_rate_hz).
/// Throws TimeOutOfRange.
Frame sample_frame(const SceneScript& script, double t);
/// One annotation per agent present at time t.
std::vector<GtAnnotation> emit_ground_truth(const SceneScript& script, double t);

struct SyntheticSequence {
    SequenceMeta meta;
    std::vector<Frame> frames;
    std::vector<GtAnnotation> ground_truth;
};

SyntheticSequence generate_sequence(const SceneScript& script);
/// Writes frame_*.csv, meta.json and ground_truth.jsonl into `dir`.
void write_sequence(const std::filesystem::path& dir, const SyntheticSequence& seq);

nlohmann::json scene_to_json(const SceneScript& script);
/// Strict: unknown keys are rejected.
SceneScript scene_from_json(const nlohmann::json& j);

enum class ScenePreset { Near, Far };

/// Intersection with 5 vehicles at 5 m/s and 3 pedestrians at 1.3 m/s over
/// 100 frames. Near keeps the vehicles within 15 m of the sensor, Far puts
/// them beyond.
SceneScript intersection_scene(ScenePreset preset, std::uint64_t seed = 42);

}  // namespace bevkit
