#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "bevkit/box3d.hpp"
#include "bevkit/traffic.hpp"

namespace bevkit {

struct GtAnnotation {
    std::int64_t frame_id = 0;
    ClassLabel label = ClassLabel::Vehicle;
    Box3D box;
    double x_rot = 0.0;
    double y_rot = 0.0;
};

struct PredictedBox {
    std::int64_t frame_id = 0;
    int track_id = 0;
    ClassLabel label = ClassLabel::Vehicle;
    Box3D box;
};

enum class View { Bev, Front, Side };

/// Throws DegenerateBox.
double volume_iou(const Box3D& a, const Box3D& b);
/// BEV: exact rotated footprint IoU. Front/side: IoU of the axis-aligned
/// (y,z) / (x,z) projections of the rotated boxes. Throws DegenerateBox.
double view_iou(const Box3D& a, const Box3D& b, View view);
/// Area of the intersection of two rotated footprints.
double bev_intersection_area(const Box3D& a, const Box3D& b);

struct MatchResult {
    std::vector<std::pair<int, int>> pairs;  // (pred index, gt index)
    std::vector<int> unmatched_preds;
    std::vector<int> unmatched_gts;
};

/// Greedy one-to-one matching by descending BEV IoU, pairs below min_iou
/// rejected. Inputs are assumed to come from one frame.
MatchResult match_boxes(const std::vector<Box3D>& preds, const std::vector<Box3D>& gts,
                        double min_iou = 0.1);

enum class ClassBucket { Overall = 0, Vehicle = 1, Pedestrian = 2 };
enum class RangeBucket { Overall = 0, Near = 1, Far = 2 };

struct BucketStats {
    int matched = 0;
    int missed = 0;
    int false_positives = 0;
    double volume_iou = 0.0;
    double front_iou = 0.0;
    double bev_iou = 0.0;
    double side_iou = 0.0;
    std::array<double, 3> center_abs{};  // |dx|, |dy|, |dz|
    std::array<double, 3> dim_abs{};     // |d x_len|, |d y_len|, |d z_len|
    std::array<double, 3> center_pct{};  // relative to mean |GT center|
    std::array<double, 3> dim_pct{};     // relative to mean GT dims
};

struct EvalReport {
    std::array<std::array<BucketStats, 3>, 3> buckets{};  // [class][range]
    double near_radius = 15.0;
    int skipped_gt = 0;  // GT with roll/pitch beyond the yaw-only tolerance

    [[nodiscard]] const BucketStats& at(ClassBucket c, RangeBucket r) const {
        return buckets[static_cast<int>(c)][static_cast<int>(r)];
    }
};

struct EvalConfig {
    double match_iou = 0.1;
    double near_radius = 15.0;
    double max_tilt = 0.05;  // radians
};

/// Matches per frame and reduces to class x range buckets. Range is the GT
/// center's horizontal distance from the sensor origin.
EvalReport evaluate(const std::vector<PredictedBox>& preds, const std::vector<GtAnnotation>& gts,
                    const EvalConfig& cfg = {});

struct MatchedPair {
    PredictedBox pred;
    GtAnnotation gt;
};

/// Bucketed summary of already-matched pairs plus unmatched lists.
EvalReport build_report(const std::vector<MatchedPair>& pairs, const std::vector<GtAnnotation>& missed,
                        const std::vector<PredictedBox>& false_positives, Vec2 sensor_origin = {},
                        double near_radius = 15.0);

nlohmann::json report_to_json(const EvalReport& report);
std::string report_to_text(const EvalReport& report);

/// JSON lines {"frame_id","class","box":[9 numbers]}.
std::vector<GtAnnotation> read_ground_truth(const std::filesystem::path& path);
void write_ground_truth(const std::filesystem::path& path, const std::vector<GtAnnotation>& gts);

}  // namespace bevkit
