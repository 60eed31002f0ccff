#include "bevkit/config.hpp"

#include <set>

#include "bevkit/io.hpp"

namespace bevkit {
namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); }

// Visits every key of an object section, rejecting keys outside `allowed`.
template <typename Fn>
void visit(const json& j, const std::string& section, std::initializer_list<const char*> allowed, Fn&& fn) {
    if (!j.is_object()) bad("'" + section + "' must be an object");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items()) {
        const std::string path = section.empty() ? key : section + "." + key;
        if (!keys.count(key)) bad("unknown key '" + path + "'");
        try {
            fn(key, value, path);
        } catch (const json::exception& e) {
            bad("bad value for '" + path + "': " + e.what());
        }
    }
}

template <typename T>
T get(const json& v, const std::string& path) {
    if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) bad("'" + path + "' must be a boolean");
    } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) bad("'" + path + "' must be an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) bad("'" + path + "' must be a number");
    } else {
        if (!v.is_string()) bad("'" + path + "' must be a string");
    }
    return v.get<T>();
}

std::string footprint_name(FootprintMode m) { return m == FootprintMode::Oriented ? "oriented" : "axis_aligned"; }

}  // namespace

void PipelineConfig::validate() const {
    bev.validate();
    pcc.validate();
    tracker.validate();
    height.validate();
    if (!(tau_bg > 0.0 && tau_bg <= 1.0)) bad("background.tau_bg must be in (0, 1]");
    if (segmenter != "components" && segmenter.rfind("external:", 0) != 0) {
        bad("segmenter must be 'components' or 'external:<command>'");
    }
    if (segmenter.rfind("external:", 0) == 0 && segmenter.size() == 9) bad("external segmenter needs a command");
    if (min_area_px < 1) bad("segment.min_area_px must be >= 1");
    if (!(nms_iou > 0.0 && nms_iou <= 1.0)) bad("segment.nms_iou must be in (0, 1]");
    if (!(segmenter_timeout_s > 0.0)) bad("segment.timeout_s must be > 0");
    if (filters.min_frames < 1 || filters.frame_count < 0) bad("filters frame bounds must be positive");
    if (!(filters.winding_max >= 1.0)) bad("filters.winding_max must be >= 1");
    if (!(filters.min_displacement >= 0.0) || !(filters.ar_max >= 1.0) || filters.area_min_px < 0) {
        bad("filters thresholds out of range");
    }
    if (!(ground.percentile >= 0.0 && ground.percentile <= 100.0)) bad("ground.percentile must be in [0, 100]");
    if (ground.min_samples < 1) bad("ground.min_samples must be >= 1");
    if (!(ground.idw.power > 0.0) || ground.idw.k < 1 || !(ground.idw.max_radius > 0.0)) bad("ground.idw out of range");
    if (median_window < 1) bad("boxes.median_window must be >= 1");
    if (!(area_threshold > 0.0)) bad("classify.area_threshold must be > 0");
    if (!(sigma >= 0.0)) bad("smoothing.sigma must be >= 0");
    if (!(match_iou > 0.0 && match_iou <= 1.0)) bad("eval.match_iou must be in (0, 1]");
    if (!(near_radius > 0.0)) bad("eval.near_radius must be > 0");
}

PipelineConfig config_from_json(const json& j) {
    PipelineConfig c;
    visit(j, "",
          {"input", "out", "bev", "background", "pcc", "segment", "tracker", "filters", "ground", "height", "boxes",
           "classify", "smoothing", "eval"},
          [&](const std::string& key, const json& v, const std::string& path) {
              if (key == "input") {
                  c.input = get<std::string>(v, path);
              } else if (key == "out") {
                  c.out = get<std::string>(v, path);
              } else if (key == "bev") {
                  visit(v, path, {"resolution", "x_min", "x_max", "y_min", "y_max"},
                        [&](const std::string& k, const json& x, const std::string& p) {
                            const double d = get<double>(x, p);
                            if (k == "resolution") c.bev.resolution = d;
                            if (k == "x_min") c.bev.x_min = d;
                            if (k == "x_max") c.bev.x_max = d;
                            if (k == "y_min") c.bev.y_min = d;
                            if (k == "y_max") c.bev.y_max = d;
                        });
              } else if (key == "background") {
                  visit(v, path, {"tau_bg"}, [&](const std::string&, const json& x, const std::string& p) {
                      c.tau_bg = get<double>(x, p);
                  });
              } else if (key == "pcc") {
                  visit(v, path, {"n", "rho", "alpha", "stride", "seed"},
                        [&](const std::string& k, const json& x, const std::string& p) {
                            if (k == "n") c.pcc.n = get<int>(x, p);
                            if (k == "rho") c.pcc.rho = get<double>(x, p);
                            if (k == "alpha") c.pcc.alpha = get<double>(x, p);
                            if (k == "stride") c.pcc.stride = get<int>(x, p);
                            if (k == "seed") c.pcc.seed = get<std::uint64_t>(x, p);
                        });
              } else if (key == "segment") {
                  visit(v, path, {"segmenter", "min_area_px", "nms_iou", "timeout_s"},
                        [&](const std::string& k, const json& x, const std::string& p) {
                            if (k == "segmenter") c.segmenter = get<std::string>(x, p);
                            if (k == "min_area_px") c.min_area_px = get<int>(x, p);
                            if (k == "nms_iou") c.nms_iou = get<double>(x, p);
                            if (k == "timeout_s") c.segmenter_timeout_s = get<double>(x, p);
                        });
              } else if (key == "tracker") {
                  visit(v, path, {"tau_high", "tau_low", "iou_match", "max_age", "min_hits", "predict_motion"},
                        [&](const std::string& k, const json& x, const std::string& p) {
                            if (k == "tau_high") c.tracker.tau_high = get<double>(x, p);
                            if (k == "tau_low") c.tracker.tau_low = get<double>(x, p);
                            if (k == "iou_match") c.tracker.iou_match = get<double>(x, p);
                            if (k == "max_age") c.tracker.max_age = get<int>(x, p);
                            if (k == "min_hits") c.tracker.min_hits = get<int>(x, p);
                            if (k == "predict_motion") c.tracker.predict_motion = get<bool>(x, p);
                        });
              } else if (key == "filters") {
                  visit(v, path,
                        {"min_frames", "frame_count", "winding_max", "min_displacement", "ar_max", "area_min_px"},
                        [&](const std::string& k, const json& x, const std::string& p) {
                            if (k == "min_frames") c.filters.min_frames = get<int>(x, p);
                            if (k == "frame_count") c.filters.frame_count = get<std::int64_t>(x, p);
                            if (k == "winding_max") c.filters.winding_max = get<double>(x, p);
                            if (k == "min_displacement") c.filters.min_displacement = get<double>(x, p);
                            if (k == "ar_max") c.filters.ar_max = get<double>(x, p);
                            if (k == "area_min_px") c.filters.area_min_px = get<long>(x, p);
                        });
              } else if (key == "ground") {
                  visit(v, path, {"percentile", "min_samples", "idw"},
                        [&](const std::string& k, const json& x, const std::string& p) {
                            if (k == "percentile") c.ground.percentile = get<double>(x, p);
                            if (k == "min_samples") c.ground.min_samples = get<int>(x, p);
                            if (k == "idw") {
                                visit(x, p, {"power", "k", "max_radius"},
                                      [&](const std::string& kk, const json& y, const std::string& pp) {
                                          if (kk == "power") c.ground.idw.power = get<double>(y, pp);
                                          if (kk == "k") c.ground.idw.k = get<int>(y, pp);
                                          if (kk == "max_radius") c.ground.idw.max_radius = get<double>(y, pp);
                                      });
                            }
                        });
              } else if (key == "height") {
                  visit(v, path, {"percentile", "offset", "min_points"},
                        [&](const std::string& k, const json& x, const std::string& p) {
                            if (k == "percentile") c.height.percentile = get<double>(x, p);
                            if (k == "offset") c.height.offset = get<double>(x, p);
                            if (k == "min_points") c.height.min_points = get<int>(x, p);
                        });
              } else if (key == "boxes") {
                  visit(v, path, {"footprint", "median_window"},
                        [&](const std::string& k, const json& x, const std::string& p) {
                            if (k == "median_window") {
                                c.median_window = get<int>(x, p);
                            } else {
                                const auto mode = get<std::string>(x, p);
                                if (mode == "oriented") {
                                    c.footprint = FootprintMode::Oriented;
                                } else if (mode == "axis_aligned") {
                                    c.footprint = FootprintMode::AxisAligned;
                                } else {
                                    bad("'" + p + "' must be 'oriented' or 'axis_aligned'");
                                }
                            }
                        });
              } else if (key == "classify") {
                  visit(v, path, {"area_threshold"}, [&](const std::string&, const json& x, const std::string& p) {
                      c.area_threshold = get<double>(x, p);
                  });
              } else if (key == "smoothing") {
                  visit(v, path, {"sigma"}, [&](const std::string&, const json& x, const std::string& p) {
                      c.sigma = get<double>(x, p);
                  });
              } else if (key == "eval") {
                  visit(v, path, {"gt", "match_iou", "near_radius"},
                        [&](const std::string& k, const json& x, const std::string& p) {
                            if (k == "gt") {
                                if (x.is_null()) {
                                    c.eval_gt.reset();
                                } else {
                                    c.eval_gt = get<std::string>(x, p);
                                }
                            }
                            if (k == "match_iou") c.match_iou = get<double>(x, p);
                            if (k == "near_radius") c.near_radius = get<double>(x, p);
                        });
              }
          });
    c.validate();
    return c;
}

json config_to_json(const PipelineConfig& c) {
    json j;
    j["input"] = c.input.string();
    j["out"] = c.out.string();
    j["bev"] = {{"resolution", c.bev.resolution}, {"x_min", c.bev.x_min}, {"x_max", c.bev.x_max},
                {"y_min", c.bev.y_min},           {"y_max", c.bev.y_max}};
    j["background"] = {{"tau_bg", c.tau_bg}};
    j["pcc"] = {{"n", c.pcc.n}, {"rho", c.pcc.rho}, {"alpha", c.pcc.alpha}, {"stride", c.pcc.stride},
                {"seed", c.pcc.seed}};
    j["segment"] = {{"segmenter", c.segmenter}, {"min_area_px", c.min_area_px}, {"nms_iou", c.nms_iou},
                    {"timeout_s", c.segmenter_timeout_s}};
    j["tracker"] = {{"tau_high", c.tracker.tau_high},   {"tau_low", c.tracker.tau_low},
                    {"iou_match", c.tracker.iou_match}, {"max_age", c.tracker.max_age},
                    {"min_hits", c.tracker.min_hits},   {"predict_motion", c.tracker.predict_motion}};
    j["filters"] = {{"min_frames", c.filters.min_frames},
                    {"frame_count", c.filters.frame_count},
                    {"winding_max", c.filters.winding_max},
                    {"min_displacement", c.filters.min_displacement},
                    {"ar_max", c.filters.ar_max},
                    {"area_min_px", c.filters.area_min_px}};
    j["ground"] = {{"percentile", c.ground.percentile},
                   {"min_samples", c.ground.min_samples},
                   {"idw", {{"power", c.ground.idw.power}, {"k", c.ground.idw.k},
                            {"max_radius", c.ground.idw.max_radius}}}};
    j["height"] = {{"percentile", c.height.percentile}, {"offset", c.height.offset},
                   {"min_points", c.height.min_points}};
    j["boxes"] = {{"footprint", footprint_name(c.footprint)}, {"median_window", c.median_window}};
    j["classify"] = {{"area_threshold", c.area_threshold}};
    j["smoothing"] = {{"sigma", c.sigma}};
    j["eval"] = {{"gt", c.eval_gt ? json(c.eval_gt->string()) : json(nullptr)},
                 {"match_iou", c.match_iou},
                 {"near_radius", c.near_radius}};
    return j;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        bad(path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

void set_key_path(json& j, const std::string& key_path, const std::string& value) {
    if (key_path.empty()) bad("empty key path");
    json* node = &j;
    std::size_t start = 0;
    while (true) {
        const auto dot = key_path.find('.', start);
        const std::string key = key_path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) bad("bad key path '" + key_path + "'");
        if (!node->is_object()) *node = json::object();
        if (dot == std::string::npos) {
            json parsed = json::parse(value, nullptr, false);
            (*node)[key] = parsed.is_discarded() ? json(value) : parsed;
            return;
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

}  // namespace bevkit
