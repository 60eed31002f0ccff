#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "bevkit/background.hpp"
#include "bevkit/bev.hpp"
#include "bevkit/box3d.hpp"
#include "bevkit/groundmap.hpp"
#include "bevkit/track.hpp"

namespace bevkit {

struct PipelineConfig {
    std::filesystem::path input;
    std::filesystem::path out = "bevkit_out";
    BevConfig bev;
    double tau_bg = 0.2;
    PccParams pcc;
    /// "components" or "external:<shell command>".
    std::string segmenter = "components";
    int min_area_px = 4;
    double nms_iou = 0.5;
    double segmenter_timeout_s = 30.0;
    TrackerParams tracker;
    TrackFilterConfig filters;
    GroundParams ground;
    HeightParams height;
    FootprintMode footprint = FootprintMode::Oriented;
    int median_window = 5;
    double area_threshold = 1.5;
    double sigma = 2.0;
    std::optional<std::filesystem::path> eval_gt;
    double match_iou = 0.1;
    double near_radius = 15.0;

    /// Throws InvalidConfig.
    void validate() const;
};

/// Strict: unknown keys and wrong types are InvalidConfig. Missing keys keep
/// their defaults.
PipelineConfig config_from_json(const nlohmann::json& j);
/// Every field, defaults included.
nlohmann::json config_to_json(const PipelineConfig& cfg);
PipelineConfig load_config(const std::filesystem::path& path);

/// Sets `key.path` in `j` to `value`, parsed as JSON when possible and taken
/// as a string otherwise. Intermediate objects are created as needed.
void set_key_path(nlohmann::json& j, const std::string& key_path, const std::string& value);

}  // namespace bevkit
