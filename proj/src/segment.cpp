#include "bevkit/segment.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace bevkit {

double iou(const BBox2D& a, const BBox2D& b) {
    const long iw = std::max(0, std::min(a.u_max, b.u_max) - std::max(a.u_min, b.u_min));
    const long ih = std::max(0, std::min(a.v_max, b.v_max) - std::max(a.v_min, b.v_min));
    const long inter = iw * ih;
    const long uni = a.area() + b.area() - inter;
    return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

PixelMask::PixelMask(std::vector<PixelRun> runs) : runs_(std::move(runs)) {
    std::erase_if(runs_, [](const PixelRun& r) { return r.u_end <= r.u_begin; });
    std::sort(runs_.begin(), runs_.end());
    // Merge touching or overlapping runs on the same row.
    std::vector<PixelRun> merged;
    merged.reserve(runs_.size());
    for (const auto& r : runs_) {
        if (!merged.empty() && merged.back().v == r.v && r.u_begin <= merged.back().u_end) {
            merged.back().u_end = std::max(merged.back().u_end, r.u_end);
        } else {
            merged.push_back(r);
        }
    }
    runs_ = std::move(merged);
}

PixelMask PixelMask::from_grid(const BinaryGrid& grid) {
    std::vector<PixelRun> runs;
    for (int v = 0; v < grid.height(); ++v) {
        int u = 0;
        while (u < grid.width()) {
            if (!grid(u, v)) {
                ++u;
                continue;
            }
            const int begin = u;
            while (u < grid.width() && grid(u, v)) ++u;
            runs.push_back({v, begin, u});
        }
    }
    return PixelMask(std::move(runs));
}

long PixelMask::area() const noexcept {
    long n = 0;
    for (const auto& r : runs_) n += r.u_end - r.u_begin;
    return n;
}

BBox2D PixelMask::bounds() const {
    BBox2D b{runs_.front().u_begin, runs_.front().v, runs_.front().u_end, runs_.front().v + 1};
    for (const auto& r : runs_) {
        b.u_min = std::min(b.u_min, r.u_begin);
        b.u_max = std::max(b.u_max, r.u_end);
        b.v_min = std::min(b.v_min, r.v);
        b.v_max = std::max(b.v_max, r.v + 1);
    }
    return b;
}

void PixelMask::paint(BinaryGrid& grid) const {
    for_each_pixel([&](int u, int v) {
        if (grid.contains(u, v)) grid(u, v) = 1;
    });
}

Detection make_detection(PixelMask mask, double score, std::int64_t frame_id) {
    if (mask.empty()) throw Error(ErrorCode::EmptyMask, "detection without pixels");
    Detection d;
    d.bbox = mask.bounds();
    d.score = std::clamp(score, 0.0, 1.0);
    d.mask = std::move(mask);
    d.frame_id = frame_id;
    return d;
}

std::vector<std::int64_t> encode_rle(const BinaryGrid& grid) {
    std::vector<std::int64_t> rle;
    std::uint8_t current = 0;
    std::int64_t run = 0;
    for (auto b : grid.data()) {
        const std::uint8_t bit = b ? 1 : 0;
        if (bit != current) {
            rle.push_back(run);
            run = 0;
            current = bit;
        }
        ++run;
    }
    rle.push_back(run);
    return rle;
}

BinaryGrid decode_rle(const std::vector<std::int64_t>& rle, int width, int height) {
    BinaryGrid grid(width, height);
    const auto total = static_cast<std::int64_t>(grid.size());
    std::int64_t pos = 0;
    std::uint8_t bit = 0;
    for (auto run : rle) {
        if (run < 0) throw Error(ErrorCode::ProtocolError, "negative RLE run");
        const std::int64_t end = std::min(total, pos + run);
        if (bit) std::fill(grid.data().begin() + pos, grid.data().begin() + end, 1);
        pos = end;
        bit ^= 1;
    }
    return grid;
}

std::vector<Detection> segment_components(const BinaryGrid& fg, int min_area_px,
                                          std::int64_t frame_id) {
    const int w = fg.width();
    const int h = fg.height();
    Grid<std::uint8_t> visited(w, h);
    std::vector<Detection> out;
    std::vector<std::pair<int, int>> stack;
    std::vector<PixelRun> pixels;

    for (int v0 = 0; v0 < h; ++v0) {
        for (int u0 = 0; u0 < w; ++u0) {
            if (!fg(u0, v0) || visited(u0, v0)) continue;
            pixels.clear();
            stack.assign(1, {u0, v0});
            visited(u0, v0) = 1;
            while (!stack.empty()) {
                const auto [u, v] = stack.back();
                stack.pop_back();
                pixels.push_back({v, u, u + 1});
                for (int dv = -1; dv <= 1; ++dv) {
                    for (int du = -1; du <= 1; ++du) {
                        const int nu = u + du;
                        const int nv = v + dv;
                        if ((du || dv) && fg.contains(nu, nv) && fg(nu, nv) && !visited(nu, nv)) {
                            visited(nu, nv) = 1;
                            stack.emplace_back(nu, nv);
                        }
                    }
                }
            }
            const auto area = static_cast<long>(pixels.size());
            if (area < min_area_px) continue;
            const double score = std::min(1.0, static_cast<double>(area) / (area + 16.0));
            out.push_back(make_detection(PixelMask(pixels), score, frame_id));
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) {
        return std::tie(a.bbox.v_min, a.bbox.u_min) < std::tie(b.bbox.v_min, b.bbox.u_min);
    });
    return out;
}

std::vector<Detection> nms(std::vector<Detection> dets, double iou_thresh) {
    std::stable_sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.bbox < b.bbox;
    });
    std::vector<Detection> kept;
    for (auto& d : dets) {
        const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Detection& k) {
            return iou(k.bbox, d.bbox) >= iou_thresh;
        });
        if (!suppressed) kept.push_back(std::move(d));
    }
    return kept;
}

}  // namespace bevkit
