#include "bevkit/synthscene.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include "bevkit/io.hpp"

namespace bevkit {
namespace {

struct V3 {
    double x, y, z;
    V3 operator+(V3 o) const { return {x + o.x, y + o.y, z + o.z}; }
    V3 operator*(double s) const { return {x * s, y * s, z * s}; }
};

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2));
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t kGroundStream = 0x67726F756E64ULL;
constexpr std::uint64_t kStaticStream = 0x737461746963ULL;
constexpr std::uint64_t kAgentStream = 0x6167656E74ULL;
constexpr std::uint64_t kNoiseStream = 0x6E6F697365ULL;

// Tagged point so occlusion can tell surfaces apart; owner -1 is ground.
struct Tagged {
    V3 p;
    int owner;
};

double density_at(const SamplingParams& s, V3 p, double scale) {
    const double d = std::max(s.min_range, std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z));
    const double r = s.reference_range / d;
    return scale * s.base_density * r * r;
}

// Poisson-samples the planar patch origin + a*e1 + b*e2, (a, b) in [0,1]^2,
// tile by tile so the inverse-square density follows the surface.
void sample_patch(V3 origin, V3 e1, V3 e2, double tile, const SamplingParams& s, double scale,
                  std::mt19937_64& rng, int owner, std::vector<Tagged>& out) {
    const double l1 = std::sqrt(e1.x * e1.x + e1.y * e1.y + e1.z * e1.z);
    const double l2 = std::sqrt(e2.x * e2.x + e2.y * e2.y + e2.z * e2.z);
    const int n1 = std::max(1, static_cast<int>(std::ceil(l1 / tile)));
    const int n2 = std::max(1, static_cast<int>(std::ceil(l2 / tile)));
    const double tile_area = (l1 / n1) * (l2 / n2);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < n1; ++i) {
        for (int j = 0; j < n2; ++j) {
            const V3 center = origin + e1 * ((i + 0.5) / n1) + e2 * ((j + 0.5) / n2);
            std::poisson_distribution<int> count(density_at(s, center, scale) * tile_area);
            const int k = count(rng);
            for (int m = 0; m < k; ++m) {
                const double a = (i + unit(rng)) / n1;
                const double b = (j + unit(rng)) / n2;
                out.push_back({origin + e1 * a + e2 * b, owner});
            }
        }
    }
}

// Faces of a z-rotated cuboid resting on z0 that face the sensor at the origin.
void sample_cuboid(double cx, double cy, double yaw, double lx, double ly, double lz, double z0,
                   const SamplingParams& s, std::mt19937_64& rng, int owner, std::vector<Tagged>& out) {
    const V3 ax{std::cos(yaw), std::sin(yaw), 0.0};
    const V3 ay{-ax.y, ax.x, 0.0};
    const V3 up{0.0, 0.0, lz};
    const V3 base{cx, cy, z0};
    const double tile = 0.25;
    if (z0 + lz < 0.0) {
        const V3 corner = base + ax * (-0.5 * lx) + ay * (-0.5 * ly) + up;
        sample_patch(corner, ax * lx, ay * ly, tile, s, 1.0, rng, owner, out);
    }
    struct Side {
        V3 normal;
        double offset;  // along normal
        V3 span;        // unit vector along the face
        double span_len;
    };
    const Side sides[] = {{ax, 0.5 * lx, ay, ly},
                          {ax * -1.0, 0.5 * lx, ay, ly},
                          {ay, 0.5 * ly, ax, lx},
                          {ay * -1.0, 0.5 * ly, ax, lx}};
    for (const auto& side : sides) {
        const V3 fc = base + side.normal * side.offset;
        // Outward normal must point toward the sensor.
        if (side.normal.x * -fc.x + side.normal.y * -fc.y <= 0.0) continue;
        const V3 corner = fc + side.span * (-0.5 * side.span_len);
        sample_patch(corner, side.span * side.span_len, up, tile, s, 1.0, rng, owner, out);
    }
}

bool inside_footprint(double px, double py, double cx, double cy, double yaw, double lx, double ly) {
    const double dx = px - cx;
    const double dy = py - cy;
    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    return std::abs(dx * c + dy * s) <= 0.5 * lx && std::abs(-dx * s + dy * c) <= 0.5 * ly;
}

void apply_occlusion(std::vector<Tagged>& pts, double bin_deg) {
    const double bin = bin_deg * std::numbers::pi / 180.0;
    const auto bin_of = [&](const Tagged& t) {
        return static_cast<long>(std::floor(std::atan2(t.p.y, t.p.x) / bin));
    };
    std::map<long, std::pair<double, int>> nearest;  // bin -> (range, owner)
    for (const auto& t : pts) {
        if (t.owner < 0) continue;
        const double r = std::hypot(t.p.x, t.p.y);
        auto [it, inserted] = nearest.try_emplace(bin_of(t), r, t.owner);
        if (!inserted && r < it->second.first) it->second = {r, t.owner};
    }
    std::erase_if(pts, [&](const Tagged& t) {
        const auto it = nearest.find(bin_of(t));
        if (it == nearest.end() || t.owner == it->second.second) return false;
        return std::hypot(t.p.x, t.p.y) > it->second.first;
    });
}

}  // namespace

void SceneScript::validate() const {
    const auto fail = [](const std::string& why) { throw Error(ErrorCode::InvalidConfig, "scene: " + why); };
    if (std::abs(ground.a) > 0.05 || std::abs(ground.b) > 0.05) fail("ground slope must satisfy |a|,|b| <= 0.05");
    if (!(frame_rate_hz > 0.0)) fail("frame_rate_hz must be > 0");
    if (!(duration >= 0.0)) fail("duration must be >= 0");
    if (!(extent_x_max > extent_x_min) || !(extent_y_max > extent_y_min)) fail("empty ground extent");
    if (!(sampling.base_density > 0.0) || !(sampling.reference_range > 0.0) || !(sampling.min_range > 0.0)) {
        fail("sampling densities and ranges must be > 0");
    }
    for (const auto& a : agents) {
        if (a.waypoints.empty()) fail("agent without waypoints");
        if (!(a.x_len > 0 && a.y_len > 0 && a.z_len > 0)) fail("agent dims must be > 0");
        for (std::size_t i = 1; i < a.waypoints.size(); ++i) {
            if (!(a.waypoints[i].t > a.waypoints[i - 1].t)) fail("waypoint times must increase");
        }
    }
}

std::int64_t SceneScript::frame_count() const {
    return static_cast<std::int64_t>(std::floor(duration * frame_rate_hz + 1e-9)) + 1;
}

std::optional<AgentPose> agent_pose(const Agent& agent, double t) {
    const auto& w = agent.waypoints;
    if (w.empty() || t < w.front().t || t > w.back().t) return std::nullopt;
    if (w.size() == 1) return AgentPose{w[0].x, w[0].y, 0.0, 0.0};
    std::size_t i = 0;
    while (i + 2 < w.size() && t >= w[i + 1].t) ++i;
    const auto& a = w[i];
    const auto& b = w[i + 1];
    const double f = (t - a.t) / (b.t - a.t);
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    AgentPose pose{a.x + f * dx, a.y + f * dy, 0.0, std::hypot(dx, dy) / (b.t - a.t)};
    if (dx != 0.0 || dy != 0.0) {
        pose.yaw = std::atan2(dy, dx);
    } else {
        // Standing still: keep the last heading of a moving segment.
        for (std::size_t k = i; k-- > 0;) {
            const double px = w[k + 1].x - w[k].x;
            const double py = w[k + 1].y - w[k].y;
            if (px != 0.0 || py != 0.0) {
                pose.yaw = std::atan2(py, px);
                break;
            }
        }
    }
    return pose;
}

Frame sample_frame(const SceneScript& script, double t) {
    script.validate();
    if (t < -1e-9 || t > script.duration + 1e-9) {
        throw Error(ErrorCode::TimeOutOfRange, "t=" + std::to_string(t));
    }
    const auto& s = script.sampling;
    Frame frame;
    frame.frame_id = std::llround(t * script.frame_rate_hz);
    frame.timestamp = static_cast<double>(frame.frame_id) / script.frame_rate_hz;

    std::vector<AgentPose> poses(script.agents.size());
    std::vector<char> present(script.agents.size(), 0);
    for (std::size_t i = 0; i < script.agents.size(); ++i) {
        if (auto p = agent_pose(script.agents[i], t)) {
            poses[i] = *p;
            present[i] = 1;
        }
    }

    std::vector<Tagged> pts;
    {
        // Fixed-pattern surfaces: the same xy every sweep, like fixed beams.
        std::mt19937_64 rng(mix(s.seed, kGroundStream));
        const V3 origin{script.extent_x_min, script.extent_y_min, 0.0};
        sample_patch(origin, {script.extent_x_max - script.extent_x_min, 0.0, 0.0},
                     {0.0, script.extent_y_max - script.extent_y_min, 0.0}, 0.5, s, s.ground_density_scale,
                     rng, -1, pts);
        std::erase_if(pts, [&](const Tagged& g) {
            for (const auto& st : script.statics) {
                if (inside_footprint(g.p.x, g.p.y, st.x, st.y, st.yaw, st.x_len, st.y_len)) return true;
            }
            for (std::size_t i = 0; i < script.agents.size(); ++i) {
                const auto& a = script.agents[i];
                if (present[i] && inside_footprint(g.p.x, g.p.y, poses[i].x, poses[i].y, poses[i].yaw, a.x_len, a.y_len)) {
                    return true;
                }
            }
            return false;
        });
        for (auto& g : pts) g.p.z = script.ground.at(g.p.x, g.p.y);
        for (std::size_t i = 0; i < script.statics.size(); ++i) {
            const auto& st = script.statics[i];
            std::mt19937_64 srng(mix(mix(s.seed, kStaticStream), i));
            sample_cuboid(st.x, st.y, st.yaw, st.x_len, st.y_len, st.z_len, script.ground.at(st.x, st.y), s, srng,
                          static_cast<int>(i), pts);
        }
    }
    const int agent_owner_base = static_cast<int>(script.statics.size());
    for (std::size_t i = 0; i < script.agents.size(); ++i) {
        if (!present[i]) continue;
        const auto& a = script.agents[i];
        std::mt19937_64 rng(mix(mix(mix(s.seed, kAgentStream), static_cast<std::uint64_t>(frame.frame_id)), i));
        sample_cuboid(poses[i].x, poses[i].y, poses[i].yaw, a.x_len, a.y_len, a.z_len,
                      script.ground.at(poses[i].x, poses[i].y), s, rng, agent_owner_base + static_cast<int>(i),
                      pts);
    }
    if (s.occlusion) apply_occlusion(pts, s.occlusion_bin_deg);

    std::mt19937_64 noise_rng(mix(mix(s.seed, kNoiseStream), static_cast<std::uint64_t>(frame.frame_id)));
    std::normal_distribution<double> noise(0.0, s.z_noise);
    // Truncated at 3 sigma by redrawing, so every return stays within 3 sigma of its surface.
    const auto draw = [&] {
        if (s.z_noise <= 0.0) return 0.0;
        for (;;) {
            const double e = noise(noise_rng);
            if (std::abs(e) <= 3.0 * s.z_noise) return e;
        }
    };
    frame.points.reserve(pts.size());
    for (const auto& tp : pts) frame.points.push_back({tp.p.x, tp.p.y, tp.p.z + draw(), std::nullopt});
    return frame;
}

std::vector<GtAnnotation> emit_ground_truth(const SceneScript& script, double t) {
    std::vector<GtAnnotation> out;
    const auto frame_id = std::llround(t * script.frame_rate_hz);
    for (const auto& a : script.agents) {
        const auto pose = agent_pose(a, t);
        if (!pose) continue;
        GtAnnotation gt;
        gt.frame_id = frame_id;
        gt.label = a.label;
        gt.box = {pose->x, pose->y, script.ground.at(pose->x, pose->y) + 0.5 * a.z_len,
                  a.x_len, a.y_len, a.z_len, pose->yaw};
        out.push_back(gt);
    }
    return out;
}

SyntheticSequence generate_sequence(const SceneScript& script) {
    script.validate();
    SyntheticSequence seq;
    seq.meta.frame_rate_hz = script.frame_rate_hz;
    seq.meta.frame_count = script.frame_count();
    for (std::int64_t k = 0; k < seq.meta.frame_count; ++k) {
        const double t = static_cast<double>(k) / script.frame_rate_hz;
        seq.frames.push_back(sample_frame(script, t));
        for (auto& gt : emit_ground_truth(script, t)) seq.ground_truth.push_back(gt);
    }
    return seq;
}

void write_sequence(const std::filesystem::path& dir, const SyntheticSequence& seq) {
    std::filesystem::create_directories(dir);
    for (const auto& f : seq.frames) write_frame(dir / frame_filename(f.frame_id), f);
    write_meta(dir / "meta.json", seq.meta);
    write_ground_truth(dir / "ground_truth.jsonl", seq.ground_truth);
}

namespace {

template <typename Fn>
void for_keys(const nlohmann::json& j, const std::string& where, std::initializer_list<const char*> keys, Fn&& fn) {
    if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, where + " must be an object");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) throw Error(ErrorCode::InvalidConfig, "unknown key '" + where + "." + key + "'");
        fn(key, value);
    }
}

}  // namespace

nlohmann::json scene_to_json(const SceneScript& sc) {
    nlohmann::json j;
    j["ground"] = {{"a", sc.ground.a}, {"b", sc.ground.b}, {"c", sc.ground.c}};
    j["extent"] = {{"x_min", sc.extent_x_min}, {"x_max", sc.extent_x_max},
                   {"y_min", sc.extent_y_min}, {"y_max", sc.extent_y_max}};
    j["statics"] = nlohmann::json::array();
    for (const auto& st : sc.statics) {
        j["statics"].push_back({{"x", st.x}, {"y", st.y}, {"yaw", st.yaw}, {"dims", {st.x_len, st.y_len, st.z_len}}});
    }
    j["agents"] = nlohmann::json::array();
    for (const auto& a : sc.agents) {
        nlohmann::json wps = nlohmann::json::array();
        for (const auto& w : a.waypoints) wps.push_back({w.x, w.y, w.t});
        j["agents"].push_back({{"class", std::string(to_string(a.label))},
                               {"dims", {a.x_len, a.y_len, a.z_len}},
                               {"waypoints", wps}});
    }
    const auto& s = sc.sampling;
    j["sampling"] = {{"base_density", s.base_density}, {"reference_range", s.reference_range},
                     {"min_range", s.min_range},       {"ground_density_scale", s.ground_density_scale},
                     {"z_noise", s.z_noise},           {"seed", s.seed},
                     {"occlusion", s.occlusion},       {"occlusion_bin_deg", s.occlusion_bin_deg}};
    j["duration"] = sc.duration;
    j["frame_rate_hz"] = sc.frame_rate_hz;
    return j;
}

SceneScript scene_from_json(const nlohmann::json& j) {
    SceneScript sc;
    const auto dims3 = [](const nlohmann::json& v, double& a, double& b, double& c) {
        const auto d = v.get<std::vector<double>>();
        if (d.size() != 3) throw Error(ErrorCode::InvalidConfig, "dims must have 3 entries");
        a = d[0];
        b = d[1];
        c = d[2];
    };
    for_keys(j, "scene", {"ground", "extent", "statics", "agents", "sampling", "duration", "frame_rate_hz"},
             [&](const std::string& key, const nlohmann::json& v) {
                 if (key == "ground") {
                     for_keys(v, "ground", {"a", "b", "c"}, [&](const std::string& k, const nlohmann::json& x) {
                         (k == "a" ? sc.ground.a : k == "b" ? sc.ground.b : sc.ground.c) = x.get<double>();
                     });
                 } else if (key == "extent") {
                     for_keys(v, "extent", {"x_min", "x_max", "y_min", "y_max"},
                              [&](const std::string& k, const nlohmann::json& x) {
                                  (k == "x_min"   ? sc.extent_x_min
                                   : k == "x_max" ? sc.extent_x_max
                                   : k == "y_min" ? sc.extent_y_min
                                                  : sc.extent_y_max) = x.get<double>();
                              });
                 } else if (key == "statics") {
                     for (const auto& item : v) {
                         StaticCuboid st;
                         for_keys(item, "statics[]", {"x", "y", "yaw", "dims"},
                                  [&](const std::string& k, const nlohmann::json& x) {
                                      if (k == "dims") {
                                          dims3(x, st.x_len, st.y_len, st.z_len);
                                      } else {
                                          (k == "x" ? st.x : k == "y" ? st.y : st.yaw) = x.get<double>();
                                      }
                                  });
                         sc.statics.push_back(st);
                     }
                 } else if (key == "agents") {
                     for (const auto& item : v) {
                         Agent a;
                         for_keys(item, "agents[]", {"class", "dims", "waypoints"},
                                  [&](const std::string& k, const nlohmann::json& x) {
                                      if (k == "class") {
                                          a.label = parse_class_label(x.get<std::string>());
                                      } else if (k == "dims") {
                                          dims3(x, a.x_len, a.y_len, a.z_len);
                                      } else {
                                          for (const auto& w : x) {
                                              const auto t = w.get<std::vector<double>>();
                                              if (t.size() != 3) {
                                                  throw Error(ErrorCode::InvalidConfig, "waypoint must be [x,y,t]");
                                              }
                                              a.waypoints.push_back({t[0], t[1], t[2]});
                                          }
                                      }
                                  });
                         sc.agents.push_back(std::move(a));
                     }
                 } else if (key == "sampling") {
                     auto& s = sc.sampling;
                     for_keys(v, "sampling",
                              {"base_density", "reference_range", "min_range", "ground_density_scale", "z_noise",
                               "seed", "occlusion", "occlusion_bin_deg"},
                              [&](const std::string& k, const nlohmann::json& x) {
                                  if (k == "seed") {
                                      s.seed = x.get<std::uint64_t>();
                                  } else if (k == "occlusion") {
                                      s.occlusion = x.get<bool>();
                                  } else {
                                      (k == "base_density"           ? s.base_density
                                       : k == "reference_range"      ? s.reference_range
                                       : k == "min_range"            ? s.min_range
                                       : k == "ground_density_scale" ? s.ground_density_scale
                                       : k == "z_noise"              ? s.z_noise
                                                                     : s.occlusion_bin_deg) = x.get<double>();
                                  }
                              });
                 } else if (key == "duration") {
                     sc.duration = v.get<double>();
                 } else {
                     sc.frame_rate_hz = v.get<double>();
                 }
             });
    sc.validate();
    return sc;
}

SceneScript intersection_scene(ScenePreset preset, std::uint64_t seed) {
    SceneScript sc;
    sc.ground = {0.02, 0.01, -2.0};
    sc.sampling.seed = seed;
    sc.duration = 9.9;
    sc.frame_rate_hz = 10.0;

    const bool far = preset == ScenePreset::Far;
    const double extent = far ? 32.0 : 25.0;
    sc.extent_x_min = sc.extent_y_min = -extent;
    sc.extent_x_max = sc.extent_y_max = extent;

    // Buildings at the corners and a parked car; all static background.
    const double b = extent - 4.0;
    sc.statics = {{b, b, 0.0, 8.0, 6.0, 7.0},
                  {-b, b, 0.0, 6.0, 8.0, 5.0},
                  {-b, -b, 0.0, 8.0, 6.0, 6.0},
                  {b, -b, 0.0, 6.0, 8.0, 8.0},
                  {-4.0, 17.5, 0.0, 4.2, 1.8, 1.5}};

    const auto vehicle = [](double y, double x0, double x1, double t0, double speed, double len, double wid,
                            double h) {
        Agent a;
        a.label = ClassLabel::Vehicle;
        a.x_len = len;
        a.y_len = wid;
        a.z_len = h;
        a.waypoints = {{x0, y, t0}, {x1, y, t0 + std::abs(x1 - x0) / speed}};
        return a;
    };
    const auto pedestrian = [](Waypoint from, double to_x, double to_y, double speed) {
        Agent a;
        a.label = ClassLabel::Pedestrian;
        a.x_len = 0.5;
        a.y_len = 0.5;
        a.z_len = 1.7;
        const double dist = std::hypot(to_x - from.x, to_y - from.y);
        a.waypoints = {from, {to_x, to_y, from.t + dist / speed}};
        return a;
    };

    constexpr double kVehicleSpeed = 5.0;
    constexpr double kPedSpeed = 1.3;
    // Lanes run along x; vehicles stay between 9 m and 15 m (Near) or
    // 19 m and 25 m (Far) from the sensor.
    const double inner = far ? 19.0 : 9.0;
    const double outer = far ? 22.0 : 12.0;
    const double span_in = 10.0;
    const double span_out = 8.0;
    sc.agents = {
        vehicle(-inner, -span_in, span_in, 0.0, kVehicleSpeed, 4.2, 1.8, 1.5),
        vehicle(inner, span_in, -span_in, 0.5, kVehicleSpeed, 4.6, 1.9, 1.6),
        vehicle(-outer, -span_out, span_out, 3.0, kVehicleSpeed, 4.0, 1.7, 1.45),
        vehicle(outer, span_out, -span_out, 4.0, kVehicleSpeed, 4.4, 1.8, 1.55),
        vehicle(-inner, -span_in, span_in, 5.5, kVehicleSpeed, 4.2, 1.8, 1.5),
        pedestrian({-6.0, 14.5, 0.3}, 6.0, 14.5, kPedSpeed),
        pedestrian({6.0, -14.5, 0.2}, -6.0, -14.5, kPedSpeed),
        pedestrian({14.5, -6.0, 0.5}, 14.5, 6.0, kPedSpeed),
    };
    sc.validate();
    return sc;
}

}  // namespace bevkit
