#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "bevkit/box3d.hpp"
#include "bevkit/geometry.hpp"
#include "bevkit/stats.hpp"

namespace bevkit {

inline constexpr double kMphPerMps = 2.236936;

enum class ClassLabel { Vehicle, Pedestrian };

std::string_view to_string(ClassLabel label);
/// Throws InvalidConfig for anything but "Vehicle"/"Pedestrian".
ClassLabel parse_class_label(std::string_view text);

/// Gaussian smoothing of x(t) and y(t) independently. Kernel truncated at
/// +-4 sigma and renormalized; boundaries replicate the edge sample.
std::vector<Vec2> smooth_trajectory(const std::vector<Vec2>& positions, double sigma_frames = 2.0);

/// Speed magnitude by central differences (one-sided at the ends). Sample
/// times are frame ids / rate so gaps in a track are respected. Throws TooShort.
std::vector<double> compute_speed(const std::vector<Vec2>& positions,
                                  const std::vector<std::int64_t>& frame_ids, double frame_rate_hz);
/// Consecutive frames starting at 0.
std::vector<double> compute_speed(const std::vector<Vec2>& positions, double frame_rate_hz);

/// Signed derivative of the scalar speed series. Throws TooShort.
std::vector<double> compute_acceleration(const std::vector<double>& speeds,
                                         const std::vector<std::int64_t>& frame_ids,
                                         double frame_rate_hz);
std::vector<double> compute_acceleration(const std::vector<double>& speeds, double frame_rate_hz);

/// Per-box vote on BEV footprint area; ties go to Vehicle.
ClassLabel classify_track(const std::vector<Box3D>& boxes, double area_threshold = 1.5);

struct ClassCounts {
    int vehicle = 0;
    int pedestrian = 0;
    bool operator==(const ClassCounts&) const = default;
};

/// Counts distinct track ids per class.
ClassCounts count_by_class(const std::vector<std::pair<int, ClassLabel>>& tracks);

struct TrackKinematics {
    int track_id = 0;
    ClassLabel label = ClassLabel::Vehicle;
    std::vector<std::int64_t> frame_ids;
    std::vector<Vec2> smoothed;
    std::vector<double> speed;  // m/s
    std::vector<double> accel;  // m/s^2
    /// Samples at each end that the smoothing kernel reaches past the track.
    int edge_frames = 0;

    /// Mean speed over samples at least edge_frames from either end, where edge
    /// replication does not bias the estimate; all samples for short tracks.
    [[nodiscard]] double mean_speed() const;
};

/// Smooths a track's box centers and derives speed and acceleration.
TrackKinematics track_kinematics(int track_id, ClassLabel label, const std::vector<std::int64_t>& frame_ids,
                                 const std::vector<Vec2>& centers, double frame_rate_hz, double sigma_frames);

}  // namespace bevkit
