#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "bevkit/bev.hpp"
#include "bevkit/frames.hpp"

namespace bevkit {

enum class CellState : std::uint8_t { Unknown = 0, Sampled = 1, Interpolated = 2 };

struct IdwParams {
    double power = 2.0;
    int k = 8;
    double max_radius = 10.0;  // meters
    bool operator==(const IdwParams&) const = default;
};

struct GroundParams {
    double percentile = 5.0;
    int min_samples = 3;
    IdwParams idw;
    bool operator==(const GroundParams&) const = default;
};

/// Per-cell z samples from background cells.
struct GroundSamples {
    BevConfig config;
    std::vector<std::vector<float>> cells;  // row-major, width*height
};

/// Per-cell ground elevation (sensor frame). NaN where unknown.
struct SampledGround {
    BevConfig config;
    Grid<double> z;
};

struct GroundHeightMap {
    BevConfig config;
    Grid<double> z;
    Grid<CellState> state;
    GroundParams params;
};

/// Collects the z of every point that falls in a background cell. Throws
/// DimensionMismatch when `background` does not match `cfg`.
GroundSamples accumulate_ground_samples(std::span<const Frame> frames, const BinaryGrid& background,
                                        const BevConfig& cfg);
/// Adds one frame to an existing sample set.
void add_ground_samples(GroundSamples& samples, const Frame& frame, const BinaryGrid& background);

/// q-th percentile per cell; cells with fewer than `min_samples` are unknown.
SampledGround estimate_cell_ground(const GroundSamples& samples, double q = 5.0, int min_samples = 3);

/// Fills unknown cells by inverse-distance weighting over the k nearest
/// sampled cells within max_radius. Throws NoSamples.
GroundHeightMap interpolate(const SampledGround& sampled, const IdwParams& idw = {});

/// Nearest-cell lookup; nullopt when the cell is unknown. Throws OutOfGrid.
std::optional<double> query_height(const GroundHeightMap& map, double x, double y);

/// CSV grid (one row per image row, "nan" for unknown) plus a JSON sidecar.
void write_ground_map(const std::filesystem::path& csv_path, const GroundHeightMap& map);
GroundHeightMap read_ground_map(const std::filesystem::path& csv_path);

}  // namespace bevkit
