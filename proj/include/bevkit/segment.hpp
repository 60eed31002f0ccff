#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "bevkit/grid.hpp"

namespace bevkit {

/// Pixel rectangle, inclusive min and exclusive max.
struct BBox2D {
    int u_min = 0;
    int v_min = 0;
    int u_max = 0;
    int v_max = 0;

    [[nodiscard]] int width() const noexcept { return u_max - u_min; }
    [[nodiscard]] int height() const noexcept { return v_max - v_min; }
    [[nodiscard]] long area() const noexcept { return static_cast<long>(width()) * height(); }
    [[nodiscard]] bool contains(int u, int v) const noexcept {
        return u >= u_min && u < u_max && v >= v_min && v < v_max;
    }

    auto operator<=>(const BBox2D&) const = default;
};

/// Intersection area over union area of two pixel rectangles.
double iou(const BBox2D& a, const BBox2D& b);

/// One horizontal run of set pixels, [u_begin, u_end) on row v.
struct PixelRun {
    int v = 0;
    int u_begin = 0;
    int u_end = 0;
    auto operator<=>(const PixelRun&) const = default;
};

/// Set of pixels stored as row runs in (v, u) order.
class PixelMask {
public:
    PixelMask() = default;
    explicit PixelMask(std::vector<PixelRun> runs);

    /// All set pixels of `grid`.
    static PixelMask from_grid(const BinaryGrid& grid);

    [[nodiscard]] const std::vector<PixelRun>& runs() const noexcept { return runs_; }
    [[nodiscard]] long area() const noexcept;
    [[nodiscard]] bool empty() const noexcept { return runs_.empty(); }
    /// Tight bound; undefined for an empty mask.
    [[nodiscard]] BBox2D bounds() const;

    template <typename Fn>
    void for_each_pixel(Fn&& fn) const {
        for (const auto& r : runs_) {
            for (int u = r.u_begin; u < r.u_end; ++u) fn(u, r.v);
        }
    }

    void paint(BinaryGrid& grid) const;

    bool operator==(const PixelMask&) const = default;

private:
    std::vector<PixelRun> runs_;
};

struct Detection {
    BBox2D bbox;
    double score = 0.0;
    PixelMask mask;
    std::int64_t frame_id = 0;
};

/// Makes a detection whose bbox is the tight bound of `mask`.
Detection make_detection(PixelMask mask, double score, std::int64_t frame_id);

/// Alternating 0/1 run lengths in row-major order, starting with a (possibly
/// empty) run of zeros.
std::vector<std::int64_t> encode_rle(const BinaryGrid& grid);

/// Inverse of encode_rle. Runs that extend past the grid are clipped; a
/// negative run length is a ProtocolError.
BinaryGrid decode_rle(const std::vector<std::int64_t>& rle, int width, int height);

/// 8-connected components of `fg` with area >= min_area_px, ordered by
/// (v_min, u_min). score = area / (area + 16).
std::vector<Detection> segment_components(const BinaryGrid& fg, int min_area_px = 4,
                                          std::int64_t frame_id = 0);

/// Greedy non-maximum suppression: by descending score (ties by bbox order),
/// a detection survives iff its IoU with every survivor is < iou_thresh.
std::vector<Detection> nms(std::vector<Detection> dets, double iou_thresh = 0.5);

/// Backend that turns a foreground grid into moving-object candidates.
class Segmenter {
public:
    virtual ~Segmenter() = default;
    virtual std::vector<Detection> segment(const BinaryGrid& fg, std::int64_t frame_id) = 0;
    [[nodiscard]] virtual std::string name() const = 0;
};

class ComponentSegmenter final : public Segmenter {
public:
    explicit ComponentSegmenter(int min_area_px = 4) : min_area_px_(min_area_px) {}
    std::vector<Detection> segment(const BinaryGrid& fg, std::int64_t frame_id) override {
        return segment_components(fg, min_area_px_, frame_id);
    }
    [[nodiscard]] std::string name() const override { return "components"; }

private:
    int min_area_px_;
};

}  // namespace bevkit
