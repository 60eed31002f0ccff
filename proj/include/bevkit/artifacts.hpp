#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include "bevkit/eval3d.hpp"
#include "bevkit/segment.hpp"
#include "bevkit/track.hpp"
#include "bevkit/traffic.hpp"

namespace bevkit {

using FrameDetections = std::vector<std::pair<std::int64_t, std::vector<Detection>>>;

/// One line per frame: {"frame_id","detections":[{"bbox","score","runs":[[v,u0,u1],..]}]}.
void write_detections(const std::filesystem::path& path, const FrameDetections& frames);
FrameDetections read_detections(const std::filesystem::path& path);

struct LabeledTrack {
    Track track;
    std::optional<ClassLabel> label;
};

/// One line per track: {"track_id","class","states":[{"frame_id","bbox","x","y","score","detection"}]}.
void write_tracks(const std::filesystem::path& path, const std::vector<LabeledTrack>& tracks);
std::vector<LabeledTrack> read_tracks(const std::filesystem::path& path);

/// {"frame_id","track_id","class","box":[x,y,z,x_len,y_len,z_len,0,0,yaw]}, sorted by (frame_id, track_id).
void write_boxes(const std::filesystem::path& path, std::vector<PredictedBox> boxes);
std::vector<PredictedBox> read_boxes(const std::filesystem::path& path);

/// frame_id,track_id,class,x,y,speed_ms,speed_mph,accel_ms2
void write_params_csv(const std::filesystem::path& path, const std::vector<TrackKinematics>& tracks);
std::vector<TrackKinematics> read_params_csv(const std::filesystem::path& path);

}  // namespace bevkit
