#include "bevkit/frames.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>
#include <string>
#include <string_view>

#include <json.hpp>

#include "bevkit/error.hpp"
#include "bevkit/io.hpp"

namespace bevkit {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        fields.push_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return fields;
}

bool parse_double(std::string_view text, double& out) {
    if (text.empty()) return false;
    if (text.front() == '+') text.remove_prefix(1);
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, out);
    return ec == std::errc{} && ptr == end && std::isfinite(out);
}

}  // namespace

std::optional<std::int64_t> frame_id_from_filename(const std::filesystem::path& path) {
    static const std::regex pattern(R"(frame_(\d+)\.csv)");
    std::smatch m;
    const std::string name = path.filename().string();
    if (!std::regex_match(name, m, pattern)) return std::nullopt;
    return std::stoll(m[1].str());
}

std::filesystem::path frame_filename(std::int64_t frame_id) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%06lld.csv", static_cast<long long>(frame_id));
    return buf;
}

Frame load_frame(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());

    Frame frame;
    if (auto id = frame_id_from_filename(path)) frame.frame_id = *id;

    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::EmptyFile, path.string());
    const auto header = split_commas(line);
    bool has_intensity = false;
    if (header.size() == 4 && header[3] == "intensity") {
        has_intensity = true;
    } else if (header.size() != 3) {
        throw Error(ErrorCode::MalformedRow, path.string() + ": bad header at row 0");
    }
    if (header[0] != "x" || header[1] != "y" || header[2] != "z") {
        throw Error(ErrorCode::MalformedRow, path.string() + ": bad header at row 0");
    }

    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto fields = split_commas(line);
        const auto bad = [&] {
            return Error(ErrorCode::MalformedRow, path.string() + ": row " + std::to_string(row));
        };
        if (fields.size() != header.size()) throw bad();
        Point3 p;
        if (!parse_double(fields[0], p.x) || !parse_double(fields[1], p.y) ||
            !parse_double(fields[2], p.z)) {
            throw bad();
        }
        if (has_intensity) {
            double intensity = 0.0;
            if (!parse_double(fields[3], intensity) || intensity < 0.0 || intensity > 1.0) throw bad();
            p.intensity = static_cast<float>(intensity);
        }
        frame.points.push_back(p);
    }
    return frame;
}

Sequence load_sequence(const std::filesystem::path& dir,
                       std::optional<std::filesystem::path> meta_path) {
    if (!std::filesystem::is_directory(dir)) {
        throw Error(ErrorCode::NoFrames, "not a directory: " + dir.string());
    }
    std::vector<std::pair<std::int64_t, std::filesystem::path>> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        if (auto id = frame_id_from_filename(entry.path())) files.emplace_back(*id, entry.path());
    }
    if (files.empty()) throw Error(ErrorCode::NoFrames, dir.string());
    std::sort(files.begin(), files.end());
    for (std::size_t i = 1; i < files.size(); ++i) {
        if (files[i].first == files[i - 1].first) {
            throw Error(ErrorCode::DuplicateFrameId,
                        files[i - 1].second.filename().string() + " and " +
                            files[i].second.filename().string());
        }
    }

    Sequence seq;
    std::vector<double> timestamps;
    if (!meta_path && std::filesystem::exists(dir / "meta.json")) meta_path = dir / "meta.json";
    if (meta_path) {
        const auto j = nlohmann::json::parse(read_text_file(*meta_path));
        for (const auto& [key, value] : j.items()) {
            if (key == "frame_rate_hz") {
                seq.meta.frame_rate_hz = value.get<double>();
            } else if (key == "frame_count") {
                seq.meta.frame_count = value.get<std::int64_t>();
            } else if (key == "timestamps") {
                timestamps = value.get<std::vector<double>>();
            } else {
                throw Error(ErrorCode::InvalidConfig, "unknown meta key '" + key + "'");
            }
        }
        if (!(seq.meta.frame_rate_hz > 0.0)) {
            throw Error(ErrorCode::InvalidConfig, "frame_rate_hz must be > 0");
        }
        if (!timestamps.empty() && timestamps.size() != files.size()) {
            throw Error(ErrorCode::InvalidConfig, "timestamps length does not match frame files");
        }
    }

    seq.frames.reserve(files.size());
    for (std::size_t i = 0; i < files.size(); ++i) {
        Frame f = load_frame(files[i].second);
        f.frame_id = files[i].first;
        f.timestamp = timestamps.empty()
                          ? static_cast<double>(f.frame_id) / seq.meta.frame_rate_hz
                          : timestamps[i];
        if (!seq.frames.empty() && f.timestamp < seq.frames.back().timestamp) {
            throw Error(ErrorCode::NonMonotoneTimestamps,
                        "frame " + std::to_string(f.frame_id));
        }
        seq.frames.push_back(std::move(f));
    }
    seq.meta.frame_count = static_cast<std::int64_t>(seq.frames.size());
    return seq;
}

void write_frame(const std::filesystem::path& path, const Frame& frame) {
    const bool has_intensity = std::any_of(frame.points.begin(), frame.points.end(),
                                           [](const Point3& p) { return p.intensity.has_value(); });
    std::string out = has_intensity ? "x,y,z,intensity\n" : "x,y,z\n";
    out.reserve(frame.points.size() * 32);
    for (const auto& p : frame.points) {
        out += format_double(p.x);
        out += ',';
        out += format_double(p.y);
        out += ',';
        out += format_double(p.z);
        if (has_intensity) {
            out += ',';
            out += format_double(p.intensity.value_or(0.0F));
        }
        out += '\n';
    }
    write_text_file(path, out);
}

void write_meta(const std::filesystem::path& path, const SequenceMeta& meta) {
    nlohmann::json j;
    j["frame_rate_hz"] = meta.frame_rate_hz;
    j["frame_count"] = meta.frame_count;
    write_text_file(path, j.dump(2) + "\n");
}

}  // namespace bevkit
