#include "bevkit/artifacts.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include <json.hpp>

#include "bevkit/io.hpp"

namespace bevkit {
namespace {

using nlohmann::json;

json bbox_json(const BBox2D& b) { return json::array({b.u_min, b.v_min, b.u_max, b.v_max}); }

BBox2D bbox_from(const json& j) {
    const auto v = j.get<std::vector<int>>();
    if (v.size() != 4) throw Error(ErrorCode::MalformedRow, "bbox must have 4 entries");
    return {v[0], v[1], v[2], v[3]};
}

template <typename Fn>
void for_each_json_line(const std::filesystem::path& path, Fn&& fn) {
    const auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        try {
            fn(json::parse(lines[i]));
        } catch (const json::exception& e) {
            throw Error(ErrorCode::MalformedRow,
                        path.string() + " line " + std::to_string(i + 1) + ": " + e.what());
        }
    }
}

std::string join_lines(const std::vector<json>& rows) {
    std::string out;
    for (const auto& r : rows) {
        out += r.dump();
        out += '\n';
    }
    return out;
}

}  // namespace

void write_detections(const std::filesystem::path& path, const FrameDetections& frames) {
    std::vector<json> rows;
    for (const auto& [frame_id, dets] : frames) {
        json arr = json::array();
        for (const auto& d : dets) {
            json runs = json::array();
            for (const auto& r : d.mask.runs()) runs.push_back({r.v, r.u_begin, r.u_end});
            arr.push_back({{"bbox", bbox_json(d.bbox)}, {"score", d.score}, {"runs", runs}});
        }
        rows.push_back({{"frame_id", frame_id}, {"detections", arr}});
    }
    write_text_file(path, join_lines(rows));
}

FrameDetections read_detections(const std::filesystem::path& path) {
    FrameDetections out;
    for_each_json_line(path, [&](const json& row) {
        const auto frame_id = row.at("frame_id").get<std::int64_t>();
        std::vector<Detection> dets;
        for (const auto& d : row.at("detections")) {
            std::vector<PixelRun> runs;
            for (const auto& r : d.at("runs")) {
                runs.push_back({r.at(0).get<int>(), r.at(1).get<int>(), r.at(2).get<int>()});
            }
            dets.push_back(make_detection(PixelMask(std::move(runs)), d.at("score").get<double>(), frame_id));
        }
        out.emplace_back(frame_id, std::move(dets));
    });
    return out;
}

void write_tracks(const std::filesystem::path& path, const std::vector<LabeledTrack>& tracks) {
    std::vector<json> rows;
    for (const auto& lt : tracks) {
        json states = json::array();
        for (const auto& s : lt.track.states) {
            states.push_back({{"frame_id", s.frame_id},
                              {"bbox", bbox_json(s.bbox)},
                              {"x", s.x},
                              {"y", s.y},
                              {"score", s.score},
                              {"detection", s.detection_index}});
        }
        rows.push_back({{"track_id", lt.track.track_id},
                        {"class", lt.label ? json(std::string(to_string(*lt.label))) : json(nullptr)},
                        {"states", states}});
    }
    write_text_file(path, join_lines(rows));
}

std::vector<LabeledTrack> read_tracks(const std::filesystem::path& path) {
    std::vector<LabeledTrack> out;
    for_each_json_line(path, [&](const json& row) {
        LabeledTrack lt;
        lt.track.track_id = row.at("track_id").get<int>();
        lt.track.status = TrackStatus::Confirmed;
        lt.track.ever_confirmed = true;
        if (!row.at("class").is_null()) lt.label = parse_class_label(row.at("class").get<std::string>());
        for (const auto& s : row.at("states")) {
            TrackState st;
            st.frame_id = s.at("frame_id").get<std::int64_t>();
            st.bbox = bbox_from(s.at("bbox"));
            st.x = s.at("x").get<double>();
            st.y = s.at("y").get<double>();
            st.score = s.at("score").get<double>();
            st.detection_index = s.at("detection").get<int>();
            lt.track.states.push_back(st);
        }
        lt.track.hits = static_cast<int>(lt.track.states.size());
        out.push_back(std::move(lt));
    });
    return out;
}

void write_boxes(const std::filesystem::path& path, std::vector<PredictedBox> boxes) {
    std::sort(boxes.begin(), boxes.end(), [](const PredictedBox& a, const PredictedBox& b) {
        return std::tie(a.frame_id, a.track_id) < std::tie(b.frame_id, b.track_id);
    });
    std::vector<json> rows;
    for (const auto& b : boxes) {
        rows.push_back({{"frame_id", b.frame_id},
                        {"track_id", b.track_id},
                        {"class", std::string(to_string(b.label))},
                        {"box", b.box.to_tuple()}});
    }
    write_text_file(path, join_lines(rows));
}

std::vector<PredictedBox> read_boxes(const std::filesystem::path& path) {
    std::vector<PredictedBox> out;
    for_each_json_line(path, [&](const json& row) {
        PredictedBox b;
        b.frame_id = row.at("frame_id").get<std::int64_t>();
        b.track_id = row.at("track_id").get<int>();
        b.label = parse_class_label(row.at("class").get<std::string>());
        const auto t = row.at("box").get<std::vector<double>>();
        if (t.size() != 9) throw Error(ErrorCode::MalformedRow, path.string() + ": box must have 9 entries");
        b.box = {t[0], t[1], t[2], t[3], t[4], t[5], t[8]};
        out.push_back(b);
    });
    return out;
}

void write_params_csv(const std::filesystem::path& path, const std::vector<TrackKinematics>& tracks) {
    struct Row {
        std::int64_t frame_id;
        int track_id;
        std::string line;
    };
    std::vector<Row> rows;
    for (const auto& k : tracks) {
        for (std::size_t i = 0; i < k.frame_ids.size(); ++i) {
            std::string line = std::to_string(k.frame_ids[i]) + "," + std::to_string(k.track_id) + "," +
                               std::string(to_string(k.label)) + "," + format_double(k.smoothed[i].x) + "," +
                               format_double(k.smoothed[i].y) + "," + format_double(k.speed[i]) + "," +
                               format_double(k.speed[i] * kMphPerMps) + "," + format_double(k.accel[i]);
            rows.push_back({k.frame_ids[i], k.track_id, std::move(line)});
        }
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return std::tie(a.frame_id, a.track_id) < std::tie(b.frame_id, b.track_id);
    });
    std::string out = "frame_id,track_id,class,x,y,speed_ms,speed_mph,accel_ms2\n";
    for (const auto& r : rows) out += r.line + "\n";
    write_text_file(path, out);
}

std::vector<TrackKinematics> read_params_csv(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    if (lines.empty() || lines[0] != "frame_id,track_id,class,x,y,speed_ms,speed_mph,accel_ms2") {
        throw Error(ErrorCode::MalformedRow, path.string() + ": bad header");
    }
    std::map<int, TrackKinematics> by_track;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(lines[i]);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        if (f.size() != 8) throw Error(ErrorCode::MalformedRow, path.string() + " row " + std::to_string(i));
        try {
            const int id = std::stoi(f[1]);
            auto& k = by_track[id];
            k.track_id = id;
            k.label = parse_class_label(f[2]);
            k.frame_ids.push_back(std::stoll(f[0]));
            k.smoothed.push_back({std::stod(f[3]), std::stod(f[4])});
            k.speed.push_back(std::stod(f[5]));
            k.accel.push_back(std::stod(f[7]));
        } catch (const std::logic_error&) {
            throw Error(ErrorCode::MalformedRow, path.string() + " row " + std::to_string(i));
        }
    }
    std::vector<TrackKinematics> out;
    for (auto& [id, k] : by_track) out.push_back(std::move(k));
    return out;
}

}  // namespace bevkit
