#include "bevkit/track.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "bevkit/assignment.hpp"

namespace bevkit {

void TrackerParams::validate() const {
    if (!(tau_low >= 0.0 && tau_low < tau_high && tau_high <= 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "tracker requires 0 <= tau_low < tau_high <= 1");
    }
    if (!(iou_match > 0.0 && iou_match < 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "tracker.iou_match must be in (0,1)");
    }
    if (max_age < 0 || min_hits < 1) {
        throw Error(ErrorCode::InvalidConfig, "tracker.max_age >= 0 and min_hits >= 1 required");
    }
}

double iou(const RectD& a, const RectD& b) {
    const double iw = std::max(0.0, std::min(a.u_max, b.u_max) - std::max(a.u_min, b.u_min));
    const double ih = std::max(0.0, std::min(a.v_max, b.v_max) - std::max(a.v_min, b.v_min));
    const double inter = iw * ih;
    const double uni = (a.u_max - a.u_min) * (a.v_max - a.v_min) +
                       (b.u_max - b.u_min) * (b.v_max - b.v_min) - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

WorldPoint bbox_center_world(const BBox2D& box, const BevConfig& cfg) {
    const double cu = 0.5 * (box.u_min + box.u_max);
    const double cv = 0.5 * (box.v_min + box.v_max);
    return {cfg.x_min + cu * cfg.resolution, cfg.y_max - cv * cfg.resolution};
}

Tracker::Tracker(TrackerParams params, BevConfig cfg) : params_(params), cfg_(cfg) {
    params_.validate();
}

RectD Tracker::predicted_box(const Track& t, std::int64_t frame_id) const {
    const auto& last = t.states.back();
    RectD box{static_cast<double>(last.bbox.u_min), static_cast<double>(last.bbox.v_min),
              static_cast<double>(last.bbox.u_max), static_cast<double>(last.bbox.v_max)};
    if (!params_.predict_motion || t.states.size() < 2) return box;
    const auto& prev = t.states[t.states.size() - 2];
    const double gap = static_cast<double>(last.frame_id - prev.frame_id);
    const double du = 0.5 * ((last.bbox.u_min + last.bbox.u_max) - (prev.bbox.u_min + prev.bbox.u_max)) / gap;
    const double dv = 0.5 * ((last.bbox.v_min + last.bbox.v_max) - (prev.bbox.v_min + prev.bbox.v_max)) / gap;
    const double steps = static_cast<double>(frame_id - last.frame_id);
    box.u_min += du * steps;
    box.u_max += du * steps;
    box.v_min += dv * steps;
    box.v_max += dv * steps;
    return box;
}

std::vector<const Track*> Tracker::active_tracks() const {
    std::vector<const Track*> out;
    for (const auto& t : tracks_) {
        if (t.status != TrackStatus::Removed) out.push_back(&t);
    }
    return out;
}

std::vector<Track> Tracker::confirmed_tracks() const {
    std::vector<Track> out;
    for (const auto& t : tracks_) {
        if (t.ever_confirmed) out.push_back(t);
    }
    return out;
}

void Tracker::associate_frame(std::int64_t frame_id, const std::vector<Detection>& dets) {
    if (started_ && frame_id <= last_frame_) {
        throw Error(ErrorCode::FrameOrderViolation,
                    "frame " + std::to_string(frame_id) + " after " + std::to_string(last_frame_));
    }
    for (const auto& d : dets) {
        if (d.frame_id != frame_id) {
            throw Error(ErrorCode::FrameOrderViolation,
                        "detection from frame " + std::to_string(d.frame_id) + " passed with frame " +
                            std::to_string(frame_id));
        }
    }
    started_ = true;
    last_frame_ = frame_id;

    std::vector<int> live;
    for (int i = 0; i < static_cast<int>(tracks_.size()); ++i) {
        if (tracks_[i].status != TrackStatus::Removed) live.push_back(i);
    }
    std::vector<int> high;
    std::vector<int> low;
    for (int k = 0; k < static_cast<int>(dets.size()); ++k) {
        if (dets[k].score >= params_.tau_high) {
            high.push_back(k);
        } else if (dets[k].score >= params_.tau_low) {
            low.push_back(k);
        }
    }

    std::vector<char> track_matched(tracks_.size(), 0);
    const auto extend = [&](int ti, int di) {
        Track& t = tracks_[ti];
        const Detection& d = dets[di];
        const auto c = bbox_center_world(d.bbox, cfg_);
        t.states.push_back({frame_id, d.bbox, c.x, c.y, d.score, di});
        ++t.hits;
        t.misses = 0;
        if (t.hits >= params_.min_hits) {
            t.status = TrackStatus::Confirmed;
            t.ever_confirmed = true;
        } else {
            t.status = TrackStatus::Tentative;
        }
        track_matched[ti] = 1;
    };

    const auto match_stage = [&](const std::vector<int>& track_idx, const std::vector<int>& det_idx) {
        std::vector<std::vector<double>> w(track_idx.size(), std::vector<double>(det_idx.size(), 0.0));
        for (std::size_t r = 0; r < track_idx.size(); ++r) {
            const RectD pred = predicted_box(tracks_[track_idx[r]], frame_id);
            for (std::size_t c = 0; c < det_idx.size(); ++c) {
                const auto& b = dets[det_idx[c]].bbox;
                w[r][c] = iou(pred, RectD{static_cast<double>(b.u_min), static_cast<double>(b.v_min),
                                          static_cast<double>(b.u_max), static_cast<double>(b.v_max)});
            }
        }
        std::vector<char> det_used(det_idx.size(), 0);
        for (auto [r, c] : max_weight_matching(w, params_.iou_match)) {
            extend(track_idx[r], det_idx[c]);
            det_used[c] = 1;
        }
        std::vector<int> leftover;
        for (std::size_t c = 0; c < det_idx.size(); ++c) {
            if (!det_used[c]) leftover.push_back(det_idx[c]);
        }
        return leftover;
    };

    const std::vector<int> unmatched_high = match_stage(live, high);
    std::vector<int> remaining_tracks;
    for (int ti : live) {
        if (!track_matched[ti]) remaining_tracks.push_back(ti);
    }
    match_stage(remaining_tracks, low);

    for (int ti : live) {
        if (track_matched[ti]) continue;
        Track& t = tracks_[ti];
        t.misses = static_cast<int>(frame_id - t.states.back().frame_id);
        if (t.misses > params_.max_age) {
            t.status = TrackStatus::Removed;
        } else if (t.status == TrackStatus::Confirmed) {
            t.status = TrackStatus::Lost;
        }
    }

    for (int di : unmatched_high) {
        Track t;
        t.track_id = next_id_++;
        tracks_.push_back(std::move(t));
        track_matched.push_back(0);
        extend(static_cast<int>(tracks_.size()) - 1, di);
    }
}

std::vector<Track> run_tracker(const std::vector<std::pair<std::int64_t, std::vector<Detection>>>& frames,
                               const TrackerParams& p, const BevConfig& cfg) {
    Tracker tracker(p, cfg);
    for (const auto& [frame_id, dets] : frames) tracker.associate_frame(frame_id, dets);
    return tracker.confirmed_tracks();
}

FilterResult filter_tracks(const std::vector<Track>& tracks, const TrackFilterConfig& cfg) {
    FilterResult result;
    for (const auto& t : tracks) {
        const auto n = static_cast<std::int64_t>(t.states.size());
        std::optional<FilterCriterion> fired;
        if (n < cfg.min_frames || (cfg.frame_count > 0 && n > cfg.frame_count)) {
            fired = FilterCriterion::Frequency;
        }
        if (!fired) {
            double path = 0.0;
            for (std::size_t i = 1; i < t.states.size(); ++i) {
                path += std::hypot(t.states[i].x - t.states[i - 1].x, t.states[i].y - t.states[i - 1].y);
            }
            const double endpoint = std::hypot(t.states.back().x - t.states.front().x,
                                               t.states.back().y - t.states.front().y);
            if (path / std::max(endpoint, 0.1) > cfg.winding_max || endpoint < cfg.min_displacement) {
                fired = FilterCriterion::Winding;
            }
        }
        if (!fired && n > 0) {
            std::int64_t slivers = 0;
            for (const auto& s : t.states) {
                const double lo = std::min(s.bbox.width(), s.bbox.height());
                const double hi = std::max(s.bbox.width(), s.bbox.height());
                if (lo > 0 && hi / lo > cfg.ar_max && s.bbox.area() < cfg.area_min_px) ++slivers;
            }
            if (2 * slivers >= n) fired = FilterCriterion::AspectRatio;
        }
        if (fired) {
            result.removed.push_back({t.track_id, *fired});
        } else {
            result.kept.push_back(t);
        }
    }
    return result;
}

}  // namespace bevkit
