#include "bevkit/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "bevkit/error.hpp"

namespace bevkit {

std::string_view to_string(ClassLabel label) {
    return label == ClassLabel::Vehicle ? "Vehicle" : "Pedestrian";
}

ClassLabel parse_class_label(std::string_view text) {
    if (text == "Vehicle") return ClassLabel::Vehicle;
    if (text == "Pedestrian") return ClassLabel::Pedestrian;
    throw Error(ErrorCode::InvalidConfig, "unknown class '" + std::string(text) + "'");
}

std::vector<Vec2> smooth_trajectory(const std::vector<Vec2>& positions, double sigma_frames) {
    if (positions.empty() || !(sigma_frames > 0.0)) return positions;
    const int radius = static_cast<int>(std::ceil(4.0 * sigma_frames));
    std::vector<double> kernel(2 * radius + 1);
    for (int k = -radius; k <= radius; ++k) {
        kernel[k + radius] = std::exp(-0.5 * (k * k) / (sigma_frames * sigma_frames));
    }
    const double sum = std::accumulate(kernel.begin(), kernel.end(), 0.0);
    for (double& w : kernel) w /= sum;

    const int n = static_cast<int>(positions.size());
    std::vector<Vec2> out(positions.size());
    for (int i = 0; i < n; ++i) {
        Vec2 acc;
        for (int k = -radius; k <= radius; ++k) {
            const Vec2& p = positions[std::clamp(i + k, 0, n - 1)];
            acc.x += kernel[k + radius] * p.x;
            acc.y += kernel[k + radius] * p.y;
        }
        out[i] = acc;
    }
    return out;
}

namespace {

std::vector<std::int64_t> consecutive(std::size_t n) {
    std::vector<std::int64_t> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    return ids;
}

template <typename T, typename Diff>
std::vector<double> differentiate(const std::vector<T>& values, const std::vector<std::int64_t>& frame_ids,
                                  double frame_rate_hz, Diff diff) {
    const std::size_t n = values.size();
    if (n < 2) throw Error(ErrorCode::TooShort, "need at least 2 samples");
    if (frame_ids.size() != n) throw Error(ErrorCode::DimensionMismatch, "frame ids do not match samples");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t a = i == 0 ? 0 : i - 1;
        const std::size_t b = i + 1 == n ? n - 1 : i + 1;
        const double dt = static_cast<double>(frame_ids[b] - frame_ids[a]) / frame_rate_hz;
        out[i] = diff(values[b], values[a]) / dt;
    }
    return out;
}

}  // namespace

std::vector<double> compute_speed(const std::vector<Vec2>& positions,
                                  const std::vector<std::int64_t>& frame_ids, double frame_rate_hz) {
    return differentiate(positions, frame_ids, frame_rate_hz,
                         [](Vec2 b, Vec2 a) { return std::hypot(b.x - a.x, b.y - a.y); });
}

std::vector<double> compute_speed(const std::vector<Vec2>& positions, double frame_rate_hz) {
    return compute_speed(positions, consecutive(positions.size()), frame_rate_hz);
}

std::vector<double> compute_acceleration(const std::vector<double>& speeds,
                                         const std::vector<std::int64_t>& frame_ids,
                                         double frame_rate_hz) {
    return differentiate(speeds, frame_ids, frame_rate_hz, [](double b, double a) { return b - a; });
}

std::vector<double> compute_acceleration(const std::vector<double>& speeds, double frame_rate_hz) {
    return compute_acceleration(speeds, consecutive(speeds.size()), frame_rate_hz);
}

ClassLabel classify_track(const std::vector<Box3D>& boxes, double area_threshold) {
    std::size_t vehicle_votes = 0;
    for (const auto& b : boxes) vehicle_votes += (b.x_len * b.y_len >= area_threshold);
    return 2 * vehicle_votes >= boxes.size() ? ClassLabel::Vehicle : ClassLabel::Pedestrian;
}

ClassCounts count_by_class(const std::vector<std::pair<int, ClassLabel>>& tracks) {
    std::set<int> vehicles;
    std::set<int> pedestrians;
    for (const auto& [id, label] : tracks) {
        (label == ClassLabel::Vehicle ? vehicles : pedestrians).insert(id);
    }
    return {static_cast<int>(vehicles.size()), static_cast<int>(pedestrians.size())};
}

double TrackKinematics::mean_speed() const {
    if (speed.empty()) return 0.0;
    const auto n = static_cast<std::ptrdiff_t>(speed.size());
    const std::ptrdiff_t edge = n > 2 * edge_frames ? edge_frames : 0;
    return std::accumulate(speed.begin() + edge, speed.end() - edge, 0.0) / static_cast<double>(n - 2 * edge);
}

TrackKinematics track_kinematics(int track_id, ClassLabel label, const std::vector<std::int64_t>& frame_ids,
                                 const std::vector<Vec2>& centers, double frame_rate_hz, double sigma_frames) {
    TrackKinematics k;
    k.track_id = track_id;
    k.label = label;
    k.frame_ids = frame_ids;
    k.smoothed = smooth_trajectory(centers, sigma_frames);
    k.edge_frames = sigma_frames > 0.0 ? static_cast<int>(std::ceil(4.0 * sigma_frames)) : 0;
    k.speed = compute_speed(k.smoothed, frame_ids, frame_rate_hz);
    k.accel = compute_acceleration(k.speed, frame_ids, frame_rate_hz);
    return k;
}

}  // namespace bevkit
