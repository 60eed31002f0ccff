#include "bevkit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include <json.hpp>

#include "bevkit/artifacts.hpp"
#include "bevkit/background.hpp"
#include "bevkit/bev.hpp"
#include "bevkit/box3d.hpp"
#include "bevkit/eval3d.hpp"
#include "bevkit/external_segmenter.hpp"
#include "bevkit/frames.hpp"
#include "bevkit/groundmap.hpp"
#include "bevkit/io.hpp"
#include "bevkit/parallel.hpp"
#include "bevkit/plots.hpp"
#include "bevkit/stats.hpp"
#include "bevkit/track.hpp"
#include "bevkit/traffic.hpp"

namespace bevkit {

StageError::StageError(std::string stage, std::optional<std::int64_t> frame_id, ErrorCode code,
                       const std::string& msg)
    : std::runtime_error("stage " + stage + (frame_id ? " frame " + std::to_string(*frame_id) : std::string()) +
                         ": " + msg),
      stage_(std::move(stage)),
      frame_id_(frame_id),
      code_(code) {}

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct SequenceInfo {
    double frame_rate_hz = 10.0;
    std::vector<std::int64_t> frame_ids;
};

std::uint64_t mix_seed(std::uint64_t seed, std::int64_t frame_id) {
    std::uint64_t x = seed ^ (static_cast<std::uint64_t>(frame_id) * 0x9E3779B97F4A7C15ULL);
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Runs fn, turning library errors into a StageError for `stage`.
template <typename Fn>
auto in_stage(const std::string& stage, std::optional<std::int64_t> frame_id, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const Error& e) {
        throw StageError(stage, frame_id, e.code(), e.what());
    } catch (const json::exception& e) {
        throw StageError(stage, frame_id, ErrorCode::MalformedRow, e.what());
    } catch (const fs::filesystem_error& e) {
        throw StageError(stage, frame_id, ErrorCode::Io, e.what());
    }
}

fs::path bev_path(const PipelineConfig& c, std::int64_t id) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%06lld.pgm", static_cast<long long>(id));
    return c.out / "bev" / name;
}

fs::path fg_path(const PipelineConfig& c, std::int64_t id) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%06lld.pgm", static_cast<long long>(id));
    return c.out / "foreground" / name;
}

Sequence load_input(const PipelineConfig& c) {
    return in_stage("frames", std::nullopt, [&] {
        if (!fs::is_directory(c.input)) {
            throw Error(ErrorCode::Io, "input directory '" + c.input.string() + "' not found");
        }
        return load_sequence(c.input);
    });
}

SequenceInfo read_sequence_info(const PipelineConfig& c) {
    const auto j = json::parse(read_text_file(c.out / "sequence.json"));
    SequenceInfo info;
    info.frame_rate_hz = j.at("frame_rate_hz").get<double>();
    info.frame_ids = j.at("frame_ids").get<std::vector<std::int64_t>>();
    return info;
}

BinaryGrid read_grid_checked(const fs::path& path, const BevConfig& bev) {
    auto g = read_pgm(path);
    if (g.width() != bev.width() || g.height() != bev.height()) {
        throw Error(ErrorCode::DimensionMismatch, path.string() + " does not match the bev config");
    }
    return g;
}

// PCC fills bridge gaps so segments hold together, but the filled pixels lie
// up to a window beyond the object. Keeping only observed pixels in each mask
// stops that padding from leaking into footprints.
std::vector<Detection> observed_only(std::vector<Detection> dets, const BinaryGrid& observed) {
    std::vector<Detection> out;
    for (auto& d : dets) {
        std::vector<PixelRun> runs;
        for (const auto& r : d.mask.runs()) {
            int u = r.u_begin;
            while (u < r.u_end) {
                while (u < r.u_end && !observed(u, r.v)) ++u;
                const int begin = u;
                while (u < r.u_end && observed(u, r.v)) ++u;
                if (u > begin) runs.push_back({r.v, begin, u});
            }
        }
        if (runs.empty()) continue;
        out.push_back(make_detection(PixelMask(std::move(runs)), d.score, d.frame_id));
    }
    return out;
}

void write_json(const fs::path& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

json stats_json(const std::vector<double>& v) {
    if (v.empty()) return nullptr;
    const auto s = describe_stats(v);
    return {{"mean", s.mean}, {"std", s.std}, {"min", s.min},     {"p25", s.p25},
            {"p50", s.p50},   {"p75", s.p75}, {"p90", s.p90},     {"count", s.count}};
}

}  // namespace

std::unique_ptr<Segmenter> make_segmenter(const PipelineConfig& cfg) {
    if (cfg.segmenter == "components") return std::make_unique<ComponentSegmenter>(cfg.min_area_px);
    const auto ms = std::chrono::milliseconds(static_cast<long long>(cfg.segmenter_timeout_s * 1000.0));
    return std::make_unique<ExternalSegmenter>(cfg.segmenter.substr(9), ms);
}

void stage_rasterize(const PipelineConfig& cfg) {
    const auto seq = load_input(cfg);
    in_stage("rasterize", std::nullopt, [&] {
        fs::create_directories(cfg.out / "bev");
        parallel_for(seq.frames.size(), [&](std::size_t i) {
            const auto& f = seq.frames[i];
            in_stage("rasterize", f.frame_id, [&] { write_pgm(bev_path(cfg, f.frame_id), rasterize(f, cfg.bev).occupancy); });
        });
        json ids = json::array();
        for (const auto& f : seq.frames) ids.push_back(f.frame_id);
        write_json(cfg.out / "sequence.json", {{"frame_rate_hz", seq.meta.frame_rate_hz},
                                               {"frame_count", seq.meta.frame_count},
                                               {"frame_ids", ids}});
    });
}

void stage_background(const PipelineConfig& cfg) {
    in_stage("background", std::nullopt, [&] {
        const auto info = read_sequence_info(cfg);
        BackgroundAccumulator acc(cfg.bev.width(), cfg.bev.height());
        for (auto id : info.frame_ids) {
            in_stage("background", id, [&] { acc.add(read_grid_checked(bev_path(cfg, id), cfg.bev)); });
        }
        const auto bg = acc.finish(cfg.tau_bg);
        write_pgm(cfg.out / "background.pgm", bg.mask);
        write_pgm_normalized(cfg.out / "background_frequency.pgm", bg.frequency);
        auto segmenter = make_segmenter(cfg);
        const auto completed = complete_background(bg, cfg.pcc, segmenter.get());
        write_pgm(cfg.out / "completed_background.pgm", completed);
        write_json(cfg.out / "background.json", {{"tau_bg", bg.tau_bg},
                                                 {"frames_used", bg.frames_used},
                                                 {"background_pixels", count_on(bg.mask)},
                                                 {"completed_pixels", count_on(completed)}});
    });
}

void stage_detect(const PipelineConfig& cfg) {
    in_stage("detect", std::nullopt, [&] {
        const auto info = read_sequence_info(cfg);
        const auto completed = read_grid_checked(cfg.out / "completed_background.pgm", cfg.bev);
        fs::create_directories(cfg.out / "foreground");
        auto segmenter = make_segmenter(cfg);
        const bool parallel = cfg.segmenter == "components";
        FrameDetections frames(info.frame_ids.size());
        // The completed background is what gets subtracted, so the
        // frequency-only model is not needed here.
        const BackgroundModel no_bg{Grid<double>(cfg.bev.width(), cfg.bev.height(), 0.0),
                                    BinaryGrid(cfg.bev.width(), cfg.bev.height(), 0), cfg.tau_bg, 0};
        const auto one = [&](std::size_t i) {
            const auto id = info.frame_ids[i];
            in_stage("detect", id, [&] {
                const auto occ = read_grid_checked(bev_path(cfg, id), cfg.bev);
                auto p = cfg.pcc;
                p.seed = mix_seed(cfg.pcc.seed, id);
                const auto observed = subtract(occ, no_bg, &completed);
                const auto fg = pcc(observed, p);
                write_pgm(fg_path(cfg, id), fg);
                frames[i] = {id, nms(observed_only(segmenter->segment(fg, id), observed), cfg.nms_iou)};
            });
        };
        if (parallel) {
            parallel_for(info.frame_ids.size(), one);
        } else {
            for (std::size_t i = 0; i < info.frame_ids.size(); ++i) one(i);
        }
        write_detections(cfg.out / "detections.jsonl", frames);
    });
}

void stage_track(const PipelineConfig& cfg) {
    in_stage("track", std::nullopt, [&] {
        const auto info = read_sequence_info(cfg);
        const auto frames = read_detections(cfg.out / "detections.jsonl");
        const auto tracks = run_tracker(frames, cfg.tracker, cfg.bev);
        auto fcfg = cfg.filters;
        if (fcfg.frame_count == 0) fcfg.frame_count = static_cast<std::int64_t>(info.frame_ids.size());
        const auto result = filter_tracks(tracks, fcfg);
        std::vector<LabeledTrack> kept;
        for (const auto& t : result.kept) kept.push_back({t, std::nullopt});
        write_tracks(cfg.out / "tracks.jsonl", kept);
        json removed = json::array();
        for (const auto& r : result.removed) {
            removed.push_back({{"track_id", r.track_id}, {"criterion", static_cast<int>(r.criterion)}});
        }
        write_json(cfg.out / "track_filter.json",
                   {{"confirmed", tracks.size()}, {"kept", result.kept.size()}, {"removed", removed}});
    });
}

void stage_ground(const PipelineConfig& cfg) {
    const auto seq = load_input(cfg);
    in_stage("ground", std::nullopt, [&] {
        const auto completed = read_grid_checked(cfg.out / "completed_background.pgm", cfg.bev);
        // Completion can swallow parts of busy lanes. Cells covered by a
        // detection in a frame are moving-object cells for that frame and
        // contribute nothing.
        std::map<std::int64_t, const std::vector<Detection>*> dets_by_id;
        const auto frames = read_detections(cfg.out / "detections.jsonl");
        for (const auto& [id, d] : frames) dets_by_id[id] = &d;
        GroundSamples samples{cfg.bev, std::vector<std::vector<float>>(
                                           static_cast<std::size_t>(cfg.bev.width()) * cfg.bev.height())};
        for (const auto& f : seq.frames) {
            in_stage("ground", f.frame_id, [&] {
                auto mask = completed;
                if (const auto it = dets_by_id.find(f.frame_id); it != dets_by_id.end()) {
                    for (const auto& d : *it->second) {
                        for (int v = d.bbox.v_min; v < d.bbox.v_max; ++v) {
                            for (int u = d.bbox.u_min; u < d.bbox.u_max; ++u) mask(u, v) = 0;
                        }
                    }
                }
                add_ground_samples(samples, f, mask);
            });
        }
        const auto sampled = estimate_cell_ground(samples, cfg.ground.percentile, cfg.ground.min_samples);
        auto map = interpolate(sampled, cfg.ground.idw);
        map.params = cfg.ground;
        write_ground_map(cfg.out / "ground_map.csv", map);
        write_pgm_normalized(cfg.out / "ground_map.pgm", map.z);
    });
}

void stage_boxes(const PipelineConfig& cfg) {
    const auto seq = load_input(cfg);
    in_stage("boxes", std::nullopt, [&] {
        const auto frames = read_detections(cfg.out / "detections.jsonl");
        auto tracks = read_tracks(cfg.out / "tracks.jsonl");
        const auto ground = read_ground_map(cfg.out / "ground_map.csv");
        std::map<std::int64_t, const Frame*> frame_by_id;
        for (const auto& f : seq.frames) frame_by_id[f.frame_id] = &f;
        std::map<std::int64_t, const std::vector<Detection>*> dets_by_id;
        for (const auto& [id, d] : frames) dets_by_id[id] = &d;

        std::vector<std::vector<PredictedBox>> per_track(tracks.size());
        parallel_for(tracks.size(), [&](std::size_t ti) {
            auto& lt = tracks[ti];
            const auto& states = lt.track.states;
            std::vector<OrientedRect> fps;
            std::vector<double> heights;
            std::vector<double> grounds;
            for (const auto& s : states) {
                in_stage("boxes", s.frame_id, [&] {
                    const auto dit = dets_by_id.find(s.frame_id);
                    const auto fit = frame_by_id.find(s.frame_id);
                    if (dit == dets_by_id.end() || fit == frame_by_id.end() || s.detection_index < 0 ||
                        s.detection_index >= static_cast<int>(dit->second->size())) {
                        throw Error(ErrorCode::MalformedRow, "track " + std::to_string(lt.track.track_id) +
                                                                 " refers to a missing detection");
                    }
                    const auto& det = (*dit->second)[static_cast<std::size_t>(s.detection_index)];
                    const auto fp = oriented_footprint(det.mask, cfg.bev, cfg.footprint);
                    fps.push_back(fp);
                    const auto g = query_height(ground, fp.center.x, fp.center.y);
                    grounds.push_back(g ? *g : std::nan(""));
                    double h = std::nan("");
                    try {
                        h = object_height(*fit->second, fp, ground, cfg.height);
                    } catch (const Error& e) {
                        // Sparse or unsupported frames borrow the track's median below.
                        if (e.code() != ErrorCode::TooFewPoints && e.code() != ErrorCode::UnknownGround) throw;
                    }
                    heights.push_back(h);
                });
            }
            const auto fill_median = [&](std::vector<double>& v, const char* what) {
                std::vector<double> ok;
                for (double x : v) {
                    if (std::isfinite(x)) ok.push_back(x);
                }
                if (ok.empty()) {
                    throw StageError("boxes", states.front().frame_id, ErrorCode::TooFewPoints,
                                     "track " + std::to_string(lt.track.track_id) + " has no usable " + what);
                }
                const double m = median(ok);
                for (double& x : v) {
                    if (!std::isfinite(x)) x = m;
                }
            };
            fill_median(heights, "height");
            fill_median(grounds, "ground");
            std::vector<Box3D> boxes;
            for (std::size_t i = 0; i < states.size(); ++i) {
                boxes.push_back(in_stage("boxes", states[i].frame_id, [&] { return build_box(fps[i], heights[i], grounds[i]); }));
            }
            boxes = median_smooth_dims(boxes, cfg.median_window);
            lt.label = classify_track(boxes, cfg.area_threshold);
            for (std::size_t i = 0; i < states.size(); ++i) {
                per_track[ti].push_back({states[i].frame_id, lt.track.track_id, *lt.label, boxes[i]});
            }
        });
        std::vector<PredictedBox> all;
        for (auto& v : per_track) all.insert(all.end(), v.begin(), v.end());
        write_boxes(cfg.out / "boxes.jsonl", std::move(all));
        write_tracks(cfg.out / "tracks.jsonl", tracks);
    });
}

void stage_params(const PipelineConfig& cfg) {
    in_stage("params", std::nullopt, [&] {
        const auto info = read_sequence_info(cfg);
        const auto boxes = read_boxes(cfg.out / "boxes.jsonl");
        std::map<int, std::vector<const PredictedBox*>> by_track;
        for (const auto& b : boxes) by_track[b.track_id].push_back(&b);
        std::vector<TrackKinematics> kin;
        std::vector<std::pair<int, ClassLabel>> labels;
        for (auto& [id, list] : by_track) {
            std::sort(list.begin(), list.end(),
                      [](const PredictedBox* a, const PredictedBox* b) { return a->frame_id < b->frame_id; });
            std::vector<std::int64_t> ids;
            std::vector<Vec2> centers;
            for (const auto* b : list) {
                ids.push_back(b->frame_id);
                centers.push_back({b->box.x, b->box.y});
            }
            const auto label = list.front()->label;
            labels.emplace_back(id, label);
            if (ids.size() < 2) {
                TrackKinematics k{id, label, ids, centers, {0.0}, {0.0}};
                kin.push_back(std::move(k));
            } else {
                kin.push_back(track_kinematics(id, label, ids, centers, info.frame_rate_hz, cfg.sigma));
            }
        }
        write_params_csv(cfg.out / "params.csv", kin);

        json stats = json::object();
        json summary = json::array();
        for (auto label : {ClassLabel::Vehicle, ClassLabel::Pedestrian}) {
            std::vector<double> speed;
            std::vector<double> mph;
            std::vector<double> accel;
            int n_tracks = 0;
            for (const auto& k : kin) {
                if (k.label != label) continue;
                ++n_tracks;
                for (std::size_t i = 0; i < k.speed.size(); ++i) {
                    speed.push_back(k.speed[i]);
                    mph.push_back(k.speed[i] * kMphPerMps);
                    accel.push_back(k.accel[i]);
                }
            }
            stats[std::string(to_string(label))] = {{"tracks", n_tracks},
                                                    {"speed_ms", stats_json(speed)},
                                                    {"speed_mph", stats_json(mph)},
                                                    {"accel_ms2", stats_json(accel)}};
        }
        for (const auto& k : kin) {
            summary.push_back({{"track_id", k.track_id},
                               {"class", std::string(to_string(k.label))},
                               {"frames", k.frame_ids.size()},
                               {"first_frame", k.frame_ids.front()},
                               {"last_frame", k.frame_ids.back()},
                               {"mean_speed_ms", k.mean_speed()}});
        }
        const auto counts = count_by_class(labels);
        write_json(cfg.out / "stats.json", stats);
        write_json(cfg.out / "track_summary.json", summary);
        write_json(cfg.out / "counts.json", {{"Vehicle", counts.vehicle}, {"Pedestrian", counts.pedestrian}});
    });
}

void stage_eval(const PipelineConfig& cfg) {
    in_stage("eval", std::nullopt, [&] {
        if (!cfg.eval_gt) throw Error(ErrorCode::InvalidConfig, "eval.gt is not set");
        const auto gts = read_ground_truth(*cfg.eval_gt);
        const auto preds = read_boxes(cfg.out / "boxes.jsonl");
        EvalConfig ec;
        ec.match_iou = cfg.match_iou;
        ec.near_radius = cfg.near_radius;
        const auto report = evaluate(preds, gts, ec);
        write_json(cfg.out / "eval_report.json", report_to_json(report));
        write_text_file(cfg.out / "eval_report.txt", report_to_text(report));
    });
}

void stage_plot(const PipelineConfig& cfg) {
    in_stage("plot", std::nullopt, [&] {
        const auto info = read_sequence_info(cfg);
        const auto kin = read_params_csv(cfg.out / "params.csv");
        emit_plots(kin, info.frame_rate_hz, cfg.out / "plots");
    });
}

void run_pipeline(const PipelineConfig& cfg) {
    in_stage("config", std::nullopt, [&] {
        cfg.validate();
        fs::create_directories(cfg.out);
        write_json(cfg.out / "config.effective.json", config_to_json(cfg));
    });
    stage_rasterize(cfg);
    stage_background(cfg);
    stage_detect(cfg);
    stage_track(cfg);
    stage_ground(cfg);
    stage_boxes(cfg);
    stage_params(cfg);
    if (cfg.eval_gt) stage_eval(cfg);
    stage_plot(cfg);
}

}  // namespace bevkit
