#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "bevkit/bev.hpp"
#include "bevkit/segment.hpp"

namespace bevkit {

struct TrackState {
    std::int64_t frame_id = 0;
    BBox2D bbox;
    double x = 0.0;  // world position of the bbox centroid, meters
    double y = 0.0;
    double score = 0.0;
    /// Index of the matched detection within its frame's detection list.
    int detection_index = -1;
};

enum class TrackStatus { Tentative, Confirmed, Lost, Removed };

struct Track {
    int track_id = 0;
    std::vector<TrackState> states;
    TrackStatus status = TrackStatus::Tentative;
    int hits = 0;
    int misses = 0;  // consecutive frames without a match
    bool ever_confirmed = false;
};

struct TrackerParams {
    double tau_high = 0.6;
    double tau_low = 0.1;
    double iou_match = 0.3;
    int max_age = 30;
    int min_hits = 3;
    bool predict_motion = true;

    /// Throws InvalidConfig.
    void validate() const;
    bool operator==(const TrackerParams&) const = default;
};

/// Axis-aligned rectangle in continuous pixel units (used for predicted boxes).
struct RectD {
    double u_min = 0.0;
    double v_min = 0.0;
    double u_max = 0.0;
    double v_max = 0.0;
};

double iou(const RectD& a, const RectD& b);

/// World position of a bbox centroid under `cfg`.
WorldPoint bbox_center_world(const BBox2D& box, const BevConfig& cfg);

/// Two-stage IoU tracker. High-score detections are matched first against
/// all live tracks, then low-score detections against the tracks left over.
class Tracker {
public:
    Tracker(TrackerParams params, BevConfig cfg);

    /// Advances one frame. Throws FrameOrderViolation when frame ids do not
    /// strictly increase, or when a detection carries a different frame id.
    void associate_frame(std::int64_t frame_id, const std::vector<Detection>& dets);

    /// Tracks that are not removed.
    [[nodiscard]] std::vector<const Track*> active_tracks() const;
    [[nodiscard]] const std::vector<Track>& all_tracks() const noexcept { return tracks_; }
    /// All tracks that ever reached min_hits, in track_id order.
    [[nodiscard]] std::vector<Track> confirmed_tracks() const;

    /// Box a track is expected to occupy at `frame_id`.
    [[nodiscard]] RectD predicted_box(const Track& t, std::int64_t frame_id) const;

private:
    TrackerParams params_;
    BevConfig cfg_;
    std::vector<Track> tracks_;
    int next_id_ = 1;
    bool started_ = false;
    std::int64_t last_frame_ = 0;
};

/// Runs the tracker over per-frame detection lists (frame order) and returns
/// every track that was ever confirmed.
std::vector<Track> run_tracker(const std::vector<std::pair<std::int64_t, std::vector<Detection>>>& frames,
                               const TrackerParams& p, const BevConfig& cfg);

struct TrackFilterConfig {
    int min_frames = 8;
    /// Upper bound on states; 0 disables the check.
    std::int64_t frame_count = 0;
    double winding_max = 3.0;
    double min_displacement = 1.0;
    double ar_max = 8.0;
    long area_min_px = 12;

    bool operator==(const TrackFilterConfig&) const = default;
};

enum class FilterCriterion { Frequency = 1, Winding = 2, AspectRatio = 3 };

struct TrackRemoval {
    int track_id = 0;
    FilterCriterion criterion = FilterCriterion::Frequency;
};

struct FilterResult {
    std::vector<Track> kept;
    std::vector<TrackRemoval> removed;
};

/// Drops tracks with implausible appearance counts, meandering or stationary
/// paths, or mostly sliver-shaped small boxes. The first criterion that fires
/// is logged.
FilterResult filter_tracks(const std::vector<Track>& tracks, const TrackFilterConfig& cfg);

}  // namespace bevkit
