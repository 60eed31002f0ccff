#include "bevkit/groundmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include <json.hpp>

#include "bevkit/io.hpp"
#include "bevkit/parallel.hpp"
#include "bevkit/stats.hpp"

namespace bevkit {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct SampledCell {
    int u;
    int v;
    double z;
};

// Coarse bucket index over sampled cells for ring-expanding k-NN queries.
class CellIndex {
public:
    CellIndex(std::vector<SampledCell> cells, int width, int height, int bucket)
        : cells_(std::move(cells)), bucket_(bucket),
          bw_((width + bucket - 1) / bucket), bh_((height + bucket - 1) / bucket),
          heads_(static_cast<std::size_t>(bw_) * bh_) {
        for (std::size_t i = 0; i < cells_.size(); ++i) {
            heads_[slot(cells_[i].u / bucket_, cells_[i].v / bucket_)].push_back(static_cast<int>(i));
        }
    }

    struct Neighbor {
        long d2;  // squared cell distance
        int v;
        int u;
        double z;
        auto key() const { return std::tie(d2, v, u); }
    };

    // k nearest sampled cells within max_cells (Euclidean, in cells),
    // ordered by (distance, v, u).
    std::vector<Neighbor> nearest(int u, int v, int k, double max_cells) const {
        std::vector<Neighbor> found;
        const int bu = u / bucket_;
        const int bv = v / bucket_;
        const long max_d2 = static_cast<long>(std::floor(max_cells * max_cells + 1e-9));
        const int max_ring = std::max(bw_, bh_);
        for (int r = 0; r <= max_ring; ++r) {
            const double ring_lower = r == 0 ? 0.0 : static_cast<double>((r - 1) * bucket_ + 1);
            if (ring_lower * ring_lower > static_cast<double>(max_d2)) break;
            if (static_cast<int>(found.size()) >= k) {
                std::nth_element(found.begin(), found.begin() + (k - 1), found.end(),
                                 [](const Neighbor& a, const Neighbor& b) { return a.key() < b.key(); });
                if (ring_lower * ring_lower > static_cast<double>(found[k - 1].d2)) break;
            }
            for (int by = bv - r; by <= bv + r; ++by) {
                for (int bx = bu - r; bx <= bu + r; ++bx) {
                    if (std::max(std::abs(bx - bu), std::abs(by - bv)) != r) continue;
                    if (bx < 0 || by < 0 || bx >= bw_ || by >= bh_) continue;
                    for (int idx : heads_[slot(bx, by)]) {
                        const auto& c = cells_[idx];
                        const long du = c.u - u;
                        const long dv = c.v - v;
                        const long d2 = du * du + dv * dv;
                        if (d2 <= max_d2) found.push_back({d2, c.v, c.u, c.z});
                    }
                }
            }
        }
        std::sort(found.begin(), found.end(),
                  [](const Neighbor& a, const Neighbor& b) { return a.key() < b.key(); });
        if (static_cast<int>(found.size()) > k) found.resize(static_cast<std::size_t>(k));
        return found;
    }

private:
    std::size_t slot(int bx, int by) const { return static_cast<std::size_t>(by) * bw_ + bx; }

    std::vector<SampledCell> cells_;
    int bucket_;
    int bw_;
    int bh_;
    std::vector<std::vector<int>> heads_;
};

}  // namespace

void add_ground_samples(GroundSamples& samples, const Frame& frame, const BinaryGrid& background) {
    const BevConfig& cfg = samples.config;
    if (background.width() != cfg.width() || background.height() != cfg.height()) {
        throw Error(ErrorCode::DimensionMismatch, "background grid does not match bev config");
    }
    for (const auto& p : frame.points) {
        const auto px = world_to_pixel(p.x, p.y, cfg);
        if (!px || !background(px->u, px->v)) continue;
        samples.cells[background.index(px->u, px->v)].push_back(static_cast<float>(p.z));
    }
}

GroundSamples accumulate_ground_samples(std::span<const Frame> frames, const BinaryGrid& background,
                                        const BevConfig& cfg) {
    cfg.validate();
    if (background.width() != cfg.width() || background.height() != cfg.height()) {
        throw Error(ErrorCode::DimensionMismatch, "background grid does not match bev config");
    }
    GroundSamples samples{cfg, std::vector<std::vector<float>>(
                                   static_cast<std::size_t>(cfg.width()) * cfg.height())};
    for (const auto& f : frames) add_ground_samples(samples, f, background);
    return samples;
}

SampledGround estimate_cell_ground(const GroundSamples& samples, double q, int min_samples) {
    const int w = samples.config.width();
    const int h = samples.config.height();
    SampledGround out{samples.config, Grid<double>(w, h, kNaN)};
    std::vector<double> buf;
    for (std::size_t i = 0; i < samples.cells.size(); ++i) {
        const auto& cell = samples.cells[i];
        if (static_cast<int>(cell.size()) < min_samples || cell.empty()) continue;
        buf.assign(cell.begin(), cell.end());
        out.z.data()[i] = percentile(std::move(buf), q);
        buf = {};
    }
    return out;
}

GroundHeightMap interpolate(const SampledGround& sampled, const IdwParams& idw) {
    const int w = sampled.z.width();
    const int h = sampled.z.height();
    std::vector<SampledCell> cells;
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            if (std::isfinite(sampled.z(u, v))) cells.push_back({u, v, sampled.z(u, v)});
        }
    }
    if (cells.empty()) throw Error(ErrorCode::NoSamples, "ground map has no sampled cells");

    GroundHeightMap map;
    map.config = sampled.config;
    map.params.idw = idw;
    map.z = sampled.z;
    map.state = Grid<CellState>(w, h, CellState::Unknown);
    for (const auto& c : cells) map.state(c.u, c.v) = CellState::Sampled;

    const double res = sampled.config.resolution;
    const int bucket = std::max(1, static_cast<int>(std::lround(1.0 / res)));
    const CellIndex index(std::move(cells), w, h, bucket);
    const double max_cells = idw.max_radius / res;

    parallel_for(static_cast<std::size_t>(h), [&](std::size_t row) {
        const int v = static_cast<int>(row);
        for (int u = 0; u < w; ++u) {
            if (map.state(u, v) == CellState::Sampled) continue;
            const auto nbrs = index.nearest(u, v, idw.k, max_cells);
            if (nbrs.empty()) continue;
            double wsum = 0.0;
            double zsum = 0.0;
            for (const auto& n : nbrs) {
                const double d = res * std::sqrt(static_cast<double>(n.d2));
                const double weight = 1.0 / std::pow(d, idw.power);
                wsum += weight;
                zsum += weight * n.z;
            }
            map.z(u, v) = zsum / wsum;
            map.state(u, v) = CellState::Interpolated;
        }
    });
    return map;
}

std::optional<double> query_height(const GroundHeightMap& map, double x, double y) {
    const auto px = world_to_pixel(x, y, map.config);
    if (!px) throw Error(ErrorCode::OutOfGrid, "ground query outside grid");
    if (map.state(px->u, px->v) == CellState::Unknown) return std::nullopt;
    return map.z(px->u, px->v);
}

void write_ground_map(const std::filesystem::path& csv_path, const GroundHeightMap& map) {
    std::string csv;
    for (int v = 0; v < map.z.height(); ++v) {
        for (int u = 0; u < map.z.width(); ++u) {
            if (u) csv += ',';
            if (map.state(u, v) == CellState::Unknown) {
                csv += "nan";
            } else {
                csv += format_double(map.z(u, v));
                if (map.state(u, v) == CellState::Interpolated) csv += 'i';
            }
        }
        csv += '\n';
    }
    write_text_file(csv_path, csv);

    const auto& c = map.config;
    nlohmann::json side{
        {"bev", {{"resolution", c.resolution}, {"x_min", c.x_min}, {"x_max", c.x_max},
                 {"y_min", c.y_min}, {"y_max", c.y_max}}},
        {"percentile", map.params.percentile},
        {"min_samples", map.params.min_samples},
        {"idw", {{"power", map.params.idw.power}, {"k", map.params.idw.k},
                 {"max_radius", map.params.idw.max_radius}}},
    };
    auto json_path = csv_path;
    json_path.replace_extension(".json");
    write_text_file(json_path, side.dump(2) + "\n");
}

GroundHeightMap read_ground_map(const std::filesystem::path& csv_path) {
    auto json_path = csv_path;
    json_path.replace_extension(".json");
    const auto side = nlohmann::json::parse(read_text_file(json_path));
    GroundHeightMap map;
    const auto& b = side.at("bev");
    map.config = {b.at("resolution").get<double>(), b.at("x_min").get<double>(),
                  b.at("x_max").get<double>(), b.at("y_min").get<double>(), b.at("y_max").get<double>()};
    map.params.percentile = side.at("percentile").get<double>();
    map.params.min_samples = side.at("min_samples").get<int>();
    map.params.idw = {side.at("idw").at("power").get<double>(), side.at("idw").at("k").get<int>(),
                      side.at("idw").at("max_radius").get<double>()};
    const int w = map.config.width();
    const int h = map.config.height();
    map.z = Grid<double>(w, h, kNaN);
    map.state = Grid<CellState>(w, h, CellState::Unknown);

    const auto lines = read_lines(csv_path);
    if (static_cast<int>(lines.size()) != h) throw Error(ErrorCode::Io, "ground map row count mismatch");
    for (int v = 0; v < h; ++v) {
        std::istringstream row(lines[static_cast<std::size_t>(v)]);
        std::string cell;
        int u = 0;
        while (std::getline(row, cell, ',')) {
            if (u >= w) throw Error(ErrorCode::Io, "ground map column count mismatch");
            if (cell != "nan") {
                const bool interp = !cell.empty() && cell.back() == 'i';
                if (interp) cell.pop_back();
                map.z(u, v) = std::stod(cell);
                map.state(u, v) = interp ? CellState::Interpolated : CellState::Sampled;
            }
            ++u;
        }
        if (u != w) throw Error(ErrorCode::Io, "ground map column count mismatch");
    }
    return map;
}

}  // namespace bevkit
