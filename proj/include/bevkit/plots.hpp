#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "bevkit/traffic.hpp"

namespace bevkit {

/// Overview of all smoothed trajectories, one class-colored polyline per track.
std::string trajectory_svg(const std::vector<TrackKinematics>& tracks);
/// Speed and acceleration against time for one track, two stacked panels.
std::string kinematics_svg(const TrackKinematics& track, double frame_rate_hz);

/// Writes trajectories.svg and track_<id>.svg files into `dir`.
void emit_plots(const std::vector<TrackKinematics>& tracks, double frame_rate_hz,
                const std::filesystem::path& dir);

}  // namespace bevkit
