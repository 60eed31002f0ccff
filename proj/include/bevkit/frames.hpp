#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace bevkit {

/// One LiDAR return in the sensor frame. z is relative to the sensor origin,
/// not to the ground.
struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    std::optional<float> intensity;
};

struct Frame {
    std::int64_t frame_id = 0;
    double timestamp = 0.0;
    std::vector<Point3> points;
};

struct SequenceMeta {
    double frame_rate_hz = 10.0;
    std::int64_t frame_count = 0;
};

struct Sequence {
    SequenceMeta meta;
    std::vector<Frame> frames;
};

/// Parses the numeric suffix of `frame_<digits>.csv`; nullopt for any other name.
std::optional<std::int64_t> frame_id_from_filename(const std::filesystem::path& path);

/// Reads a CSV frame with mandatory header `x,y,z[,intensity]`. A header-only
/// file is a valid empty frame; a zero-byte file is `EmptyFile`.
Frame load_frame(const std::filesystem::path& path);

/// Loads every `frame_*.csv` in `dir` sorted by frame id. `meta_path` defaults
/// to `dir/meta.json` when it exists. Missing timestamps are synthesized as
/// frame_id / frame_rate_hz.
Sequence load_sequence(const std::filesystem::path& dir,
                       std::optional<std::filesystem::path> meta_path = std::nullopt);

void write_frame(const std::filesystem::path& path, const Frame& frame);
void write_meta(const std::filesystem::path& path, const SequenceMeta& meta);

std::filesystem::path frame_filename(std::int64_t frame_id);

}  // namespace bevkit
