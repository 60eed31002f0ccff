#include "bevkit/eval3d.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <sstream>

#include "bevkit/io.hpp"

namespace bevkit {
namespace {

void check_box(const Box3D& b) {
    const bool ok = std::isfinite(b.x) && std::isfinite(b.y) && std::isfinite(b.z) &&
                    std::isfinite(b.yaw) && b.x_len > 0.0 && b.y_len > 0.0 && b.z_len > 0.0 &&
                    std::isfinite(b.x_len) && std::isfinite(b.y_len) && std::isfinite(b.z_len);
    if (!ok) throw Error(ErrorCode::DegenerateBox, "box with non-positive or non-finite geometry");
}

double interval_overlap(double a0, double a1, double b0, double b1) {
    return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

Polygon footprint_polygon(const Box3D& b) {
    const auto c = b.footprint().corners();
    return {c.begin(), c.end()};
}

// Half extents of the rotated footprint's axis-aligned bound.
Vec2 aabb_half_extent(const Box3D& b) {
    const double c = std::abs(std::cos(b.yaw));
    const double s = std::abs(std::sin(b.yaw));
    return {0.5 * (b.x_len * c + b.y_len * s), 0.5 * (b.x_len * s + b.y_len * c)};
}

// Length axis first, yaw wrapped to (-pi/2, pi/2], so dims compare like-for-like.
Box3D canonical(Box3D b) {
    if (b.y_len > b.x_len) {
        std::swap(b.x_len, b.y_len);
        b.yaw += std::numbers::pi / 2;
    }
    b.yaw = normalize_half_pi(b.yaw);
    return b;
}

}  // namespace

double bev_intersection_area(const Box3D& a, const Box3D& b) {
    // A footprint intersects itself exactly; clipping would only add rounding.
    if (a.x == b.x && a.y == b.y && a.x_len == b.x_len && a.y_len == b.y_len && a.yaw == b.yaw) {
        return a.x_len * a.y_len;
    }
    const Polygon inter = clip_convex(footprint_polygon(a), footprint_polygon(b));
    return inter.size() < 3 ? 0.0 : std::abs(polygon_area(inter));
}

double volume_iou(const Box3D& a, const Box3D& b) {
    check_box(a);
    check_box(b);
    const double dz = interval_overlap(a.z - 0.5 * a.z_len, a.z + 0.5 * a.z_len, b.z - 0.5 * b.z_len,
                                       b.z + 0.5 * b.z_len);
    const double inter = dz > 0.0 ? bev_intersection_area(a, b) * dz : 0.0;
    const double uni = a.volume() + b.volume() - inter;
    return std::clamp(inter / uni, 0.0, 1.0);
}

double view_iou(const Box3D& a, const Box3D& b, View view) {
    check_box(a);
    check_box(b);
    if (view == View::Bev) {
        const double inter = bev_intersection_area(a, b);
        const double uni = a.x_len * a.y_len + b.x_len * b.y_len - inter;
        return std::clamp(inter / uni, 0.0, 1.0);
    }
    const Vec2 ea = aabb_half_extent(a);
    const Vec2 eb = aabb_half_extent(b);
    // Front view looks along x (projects onto y,z); side view along y (x,z).
    const double ca = view == View::Front ? a.y : a.x;
    const double cb = view == View::Front ? b.y : b.x;
    const double ha = view == View::Front ? ea.y : ea.x;
    const double hb = view == View::Front ? eb.y : eb.x;
    // Areas and overlap from the same interval ends, so identical boxes give exactly 1.
    const double a0 = ca - ha, a1 = ca + ha, b0 = cb - hb, b1 = cb + hb;
    const double az0 = a.z - 0.5 * a.z_len, az1 = a.z + 0.5 * a.z_len;
    const double bz0 = b.z - 0.5 * b.z_len, bz1 = b.z + 0.5 * b.z_len;
    const double inter = interval_overlap(a0, a1, b0, b1) * interval_overlap(az0, az1, bz0, bz1);
    const double uni = (a1 - a0) * (az1 - az0) + (b1 - b0) * (bz1 - bz0) - inter;
    return std::clamp(inter / uni, 0.0, 1.0);
}

MatchResult match_boxes(const std::vector<Box3D>& preds, const std::vector<Box3D>& gts, double min_iou) {
    struct Candidate {
        double iou;
        int p;
        int g;
    };
    std::vector<Candidate> cands;
    for (int p = 0; p < static_cast<int>(preds.size()); ++p) {
        for (int g = 0; g < static_cast<int>(gts.size()); ++g) {
            const double v = view_iou(preds[p], gts[g], View::Bev);
            if (v >= min_iou) cands.push_back({v, p, g});
        }
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.iou != b.iou) return a.iou > b.iou;
        return std::tie(a.p, a.g) < std::tie(b.p, b.g);
    });
    std::vector<char> pred_used(preds.size(), 0);
    std::vector<char> gt_used(gts.size(), 0);
    MatchResult r;
    for (const auto& c : cands) {
        if (pred_used[c.p] || gt_used[c.g]) continue;
        pred_used[c.p] = gt_used[c.g] = 1;
        r.pairs.emplace_back(c.p, c.g);
    }
    for (int p = 0; p < static_cast<int>(preds.size()); ++p) {
        if (!pred_used[p]) r.unmatched_preds.push_back(p);
    }
    for (int g = 0; g < static_cast<int>(gts.size()); ++g) {
        if (!gt_used[g]) r.unmatched_gts.push_back(g);
    }
    return r;
}

EvalReport build_report(const std::vector<MatchedPair>& pairs, const std::vector<GtAnnotation>& missed,
                        const std::vector<PredictedBox>& false_positives, Vec2 sensor_origin,
                        double near_radius) {
    EvalReport report;
    report.near_radius = near_radius;

    const auto range_of = [&](const Box3D& b) {
        return std::hypot(b.x - sensor_origin.x, b.y - sensor_origin.y) <= near_radius ? RangeBucket::Near
                                                                                       : RangeBucket::Far;
    };
    const auto class_of = [](ClassLabel l) {
        return l == ClassLabel::Vehicle ? ClassBucket::Vehicle : ClassBucket::Pedestrian;
    };
    const auto for_buckets = [&](ClassLabel label, const Box3D& where, auto&& fn) {
        for (ClassBucket c : {ClassBucket::Overall, class_of(label)}) {
            for (RangeBucket r : {RangeBucket::Overall, range_of(where)}) {
                fn(report.buckets[static_cast<int>(c)][static_cast<int>(r)]);
            }
        }
    };

    struct Sums {
        std::array<double, 3> gt_center{};
        std::array<double, 3> gt_dims{};
    };
    std::array<std::array<Sums, 3>, 3> sums{};

    for (const auto& pair : pairs) {
        const Box3D pred = canonical(pair.pred.box);
        const Box3D gt = canonical(pair.gt.box);
        const double v = volume_iou(pred, gt);
        const double f = view_iou(pred, gt, View::Front);
        const double b = view_iou(pred, gt, View::Bev);
        const double s = view_iou(pred, gt, View::Side);
        const ClassBucket cls = class_of(pair.gt.label);
        const RangeBucket rng = range_of(gt);
        for (ClassBucket c : {ClassBucket::Overall, cls}) {
            for (RangeBucket r : {RangeBucket::Overall, rng}) {
                auto& bucket = report.buckets[static_cast<int>(c)][static_cast<int>(r)];
                auto& sum = sums[static_cast<int>(c)][static_cast<int>(r)];
                ++bucket.matched;
                bucket.volume_iou += v;
                bucket.front_iou += f;
                bucket.bev_iou += b;
                bucket.side_iou += s;
                const std::array<double, 3> pc{pred.x, pred.y, pred.z};
                const std::array<double, 3> gc{gt.x, gt.y, gt.z};
                const std::array<double, 3> pd{pred.x_len, pred.y_len, pred.z_len};
                const std::array<double, 3> gd{gt.x_len, gt.y_len, gt.z_len};
                for (int k = 0; k < 3; ++k) {
                    bucket.center_abs[k] += std::abs(pc[k] - gc[k]);
                    bucket.dim_abs[k] += std::abs(pd[k] - gd[k]);
                    sum.gt_center[k] += std::abs(gc[k]);
                    sum.gt_dims[k] += gd[k];
                }
            }
        }
    }
    for (const auto& gt : missed) for_buckets(gt.label, gt.box, [](BucketStats& b) { ++b.missed; });
    for (const auto& fp : false_positives) {
        for_buckets(fp.label, fp.box, [](BucketStats& b) { ++b.false_positives; });
    }

    for (int c = 0; c < 3; ++c) {
        for (int r = 0; r < 3; ++r) {
            auto& b = report.buckets[c][r];
            if (b.matched == 0) continue;
            const double n = b.matched;
            b.volume_iou /= n;
            b.front_iou /= n;
            b.bev_iou /= n;
            b.side_iou /= n;
            for (int k = 0; k < 3; ++k) {
                b.center_abs[k] /= n;
                b.dim_abs[k] /= n;
                const double mean_c = sums[c][r].gt_center[k] / n;
                const double mean_d = sums[c][r].gt_dims[k] / n;
                b.center_pct[k] = mean_c > 0.0 ? 100.0 * b.center_abs[k] / mean_c : 0.0;
                b.dim_pct[k] = mean_d > 0.0 ? 100.0 * b.dim_abs[k] / mean_d : 0.0;
            }
        }
    }
    return report;
}

EvalReport evaluate(const std::vector<PredictedBox>& preds, const std::vector<GtAnnotation>& gts,
                    const EvalConfig& cfg) {
    std::map<std::int64_t, std::pair<std::vector<int>, std::vector<int>>> by_frame;
    for (int i = 0; i < static_cast<int>(preds.size()); ++i) by_frame[preds[i].frame_id].first.push_back(i);
    int skipped = 0;
    for (int i = 0; i < static_cast<int>(gts.size()); ++i) {
        if (std::abs(gts[i].x_rot) >= cfg.max_tilt || std::abs(gts[i].y_rot) >= cfg.max_tilt) {
            ++skipped;
            continue;
        }
        by_frame[gts[i].frame_id].second.push_back(i);
    }

    std::vector<MatchedPair> pairs;
    std::vector<GtAnnotation> missed;
    std::vector<PredictedBox> fps;
    for (const auto& [frame, idx] : by_frame) {
        std::vector<Box3D> pb;
        std::vector<Box3D> gb;
        for (int i : idx.first) pb.push_back(preds[i].box);
        for (int i : idx.second) gb.push_back(gts[i].box);
        const auto m = match_boxes(pb, gb, cfg.match_iou);
        for (auto [p, g] : m.pairs) pairs.push_back({preds[idx.first[p]], gts[idx.second[g]]});
        for (int p : m.unmatched_preds) fps.push_back(preds[idx.first[p]]);
        for (int g : m.unmatched_gts) missed.push_back(gts[idx.second[g]]);
    }
    auto report = build_report(pairs, missed, fps, {}, cfg.near_radius);
    report.skipped_gt = skipped;
    return report;
}

namespace {

const char* class_name(int c) {
    static const char* names[] = {"Overall", "Vehicle", "Pedestrian"};
    return names[c];
}

std::string range_name(int r, double radius) {
    char buf[32];
    if (r == 0) return "Overall";
    std::snprintf(buf, sizeof(buf), r == 1 ? "<=%g m" : ">%g m", radius);
    return buf;
}

}  // namespace

nlohmann::json report_to_json(const EvalReport& report) {
    nlohmann::json j;
    j["near_radius_m"] = report.near_radius;
    j["skipped_gt"] = report.skipped_gt;
    j["views_note"] = "front/side IoU use axis-aligned projections of the rotated boxes";
    nlohmann::json rows = nlohmann::json::array();
    for (int c = 0; c < 3; ++c) {
        for (int r = 0; r < 3; ++r) {
            const auto& b = report.buckets[c][r];
            rows.push_back({
                {"class", class_name(c)},
                {"range", range_name(r, report.near_radius)},
                {"matched", b.matched},
                {"missed", b.missed},
                {"false_positives", b.false_positives},
                {"volume_iou", b.volume_iou},
                {"front_iou", b.front_iou},
                {"bev_iou", b.bev_iou},
                {"side_iou", b.side_iou},
                {"center_abs", b.center_abs},
                {"center_pct", b.center_pct},
                {"dim_abs", b.dim_abs},
                {"dim_pct", b.dim_pct},
            });
        }
    }
    j["buckets"] = rows;
    return j;
}

std::string report_to_text(const EvalReport& report) {
    std::ostringstream out;
    char line[512];
    out << "3D box accuracy (front/side views: axis-aligned projections)\n";
    std::snprintf(line, sizeof(line), "%-11s %-9s %7s %7s %7s %7s %7s %7s %7s\n", "Class", "Range", "Matched",
                  "Missed", "FalsePos", "VolIoU", "FrontIoU", "BEVIoU", "SideIoU");
    out << line;
    for (int c = 0; c < 3; ++c) {
        for (int r = 0; r < 3; ++r) {
            const auto& b = report.buckets[c][r];
            std::snprintf(line, sizeof(line), "%-11s %-9s %7d %7d %8d %7.2f %8.2f %7.2f %7.2f\n",
                          r == 0 ? class_name(c) : "", range_name(r, report.near_radius).c_str(), b.matched,
                          b.missed, b.false_positives, b.volume_iou, b.front_iou, b.bev_iou, b.side_iou);
            out << line;
        }
    }
    out << "\nAbsolute difference (value | % of mean GT)\n";
    std::snprintf(line, sizeof(line), "%-11s %-9s %15s %15s %15s %15s %15s %15s\n", "Class", "Range", "X", "Y",
                  "Z", "Len X", "Len Y", "Len Z");
    out << line;
    for (int c = 0; c < 3; ++c) {
        for (int r = 0; r < 3; ++r) {
            const auto& b = report.buckets[c][r];
            std::snprintf(line, sizeof(line),
                          "%-11s %-9s %6.2f | %6.2f %6.2f | %6.2f %6.2f | %6.2f %6.2f | %6.2f %6.2f | %6.2f "
                          "%6.2f | %6.2f\n",
                          r == 0 ? class_name(c) : "", range_name(r, report.near_radius).c_str(),
                          b.center_abs[0], b.center_pct[0], b.center_abs[1], b.center_pct[1], b.center_abs[2],
                          b.center_pct[2], b.dim_abs[0], b.dim_pct[0], b.dim_abs[1], b.dim_pct[1], b.dim_abs[2],
                          b.dim_pct[2]);
            out << line;
        }
    }
    if (report.skipped_gt > 0) {
        out << "\nwarning: " << report.skipped_gt << " ground-truth boxes skipped (roll/pitch too large)\n";
    }
    return out.str();
}

std::vector<GtAnnotation> read_ground_truth(const std::filesystem::path& path) {
    std::vector<GtAnnotation> out;
    int line_no = 0;
    for (const auto& line : read_lines(path)) {
        ++line_no;
        const auto j = nlohmann::json::parse(line, nullptr, false);
        const auto bad = [&] {
            return Error(ErrorCode::MalformedRow, path.string() + ": line " + std::to_string(line_no));
        };
        if (j.is_discarded() || !j.contains("box") || !j["box"].is_array() || j["box"].size() != 9) throw bad();
        GtAnnotation gt;
        try {
            gt.frame_id = j.at("frame_id").get<std::int64_t>();
            gt.label = parse_class_label(j.at("class").get<std::string>());
            const auto b = j["box"].get<std::vector<double>>();
            gt.box = {b[0], b[1], b[2], b[3], b[4], b[5], b[8]};
            gt.x_rot = b[6];
            gt.y_rot = b[7];
        } catch (const nlohmann::json::exception&) {
            throw bad();
        } catch (const Error&) {
            throw bad();
        }
        if (!(gt.box.x_len > 0 && gt.box.y_len > 0 && gt.box.z_len > 0)) throw bad();
        out.push_back(gt);
    }
    return out;
}

void write_ground_truth(const std::filesystem::path& path, const std::vector<GtAnnotation>& gts) {
    std::string text;
    for (const auto& gt : gts) {
        auto tuple = gt.box.to_tuple();
        tuple[6] = gt.x_rot;
        tuple[7] = gt.y_rot;
        nlohmann::json j{{"frame_id", gt.frame_id}, {"class", std::string(to_string(gt.label))}, {"box", tuple}};
        text += j.dump() + "\n";
    }
    write_text_file(path, text);
}

}  // namespace bevkit
