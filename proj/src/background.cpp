#include "bevkit/background.hpp"

#include <string>
#include <vector>

#include "bevkit/segment.hpp"

namespace bevkit {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Uniform in [0, 1) from a counter-based hash of (seed, row, col, pixel).
double keyed_uniform(std::uint64_t seed, int i, int j, int k) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ static_cast<std::uint32_t>(i));
    h = splitmix64(h ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(j)) << 20));
    h = splitmix64(h ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(k)) << 40));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace

void PccParams::validate() const {
    if (n < 1) throw Error(ErrorCode::InvalidConfig, "pcc.n must be >= 1");
    if (!(rho > 0.0 && rho <= 1.0)) throw Error(ErrorCode::InvalidConfig, "pcc.rho must be in (0,1]");
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "pcc.alpha must be in (0,1]");
    }
    if (stride < 1) throw Error(ErrorCode::InvalidConfig, "pcc.stride must be >= 1");
}

void BackgroundAccumulator::add(const BinaryGrid& occupancy) {
    require_same_shape(hits_, occupancy, "background frame");
    for (std::size_t i = 0; i < occupancy.size(); ++i) hits_.data()[i] += occupancy.data()[i] ? 1 : 0;
    ++frames_;
}

BackgroundModel BackgroundAccumulator::finish(double tau_bg) const {
    if (frames_ < 2) {
        throw Error(ErrorCode::TooFewFrames, "need >= 2 frames, got " + std::to_string(frames_));
    }
    BackgroundModel m{Grid<double>(hits_.width(), hits_.height()),
                      BinaryGrid(hits_.width(), hits_.height()), tau_bg, frames_};
    for (std::size_t i = 0; i < hits_.size(); ++i) {
        const double f = static_cast<double>(hits_.data()[i]) / frames_;
        m.frequency.data()[i] = f;
        m.mask.data()[i] = f >= tau_bg ? 1 : 0;
    }
    return m;
}

BackgroundModel estimate_background(std::span<const BevImage> images, double tau_bg) {
    if (images.size() < 2) {
        throw Error(ErrorCode::TooFewFrames, "need >= 2 frames, got " + std::to_string(images.size()));
    }
    BackgroundAccumulator acc(images.front().width(), images.front().height());
    for (const auto& img : images) acc.add(img.occupancy);
    return acc.finish(tau_bg);
}

BinaryGrid subtract(const BinaryGrid& frame_occupancy, const BackgroundModel& bg,
                    const BinaryGrid* completed_bg) {
    const BinaryGrid& mask = completed_bg ? *completed_bg : bg.mask;
    require_same_shape(frame_occupancy, mask, "subtract");
    BinaryGrid out(frame_occupancy.width(), frame_occupancy.height());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.data()[i] = (frame_occupancy.data()[i] && !mask.data()[i]) ? 1 : 0;
    }
    return out;
}

BinaryGrid pcc(const BinaryGrid& img, const PccParams& p) {
    p.validate();
    const int w = img.width();
    const int h = img.height();
    const int n = p.n;
    if (w < 2 * n + 1 || h < 2 * n + 1) {
        throw Error(ErrorCode::GridTooSmall, std::to_string(w) + "x" + std::to_string(h) +
                                                 " grid for n=" + std::to_string(n));
    }

    // Summed-area table: sat(r, c) = occupied pixels in rows [0, r) x cols [0, c).
    std::vector<int> sat(static_cast<std::size_t>(w + 1) * (h + 1), 0);
    const auto at = [&](int r, int c) -> int& { return sat[static_cast<std::size_t>(r) * (w + 1) + c]; };
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            at(r + 1, c + 1) = at(r, c + 1) + at(r + 1, c) - at(r, c) + (img(c, r) ? 1 : 0);
        }
    }

    const double threshold = static_cast<double>(2 * n) * (2 * n) * p.rho;
    BinaryGrid out = img;
    // Window centered at row i, column j covers rows [i-n, i+n) and cols [j-n, j+n).
    for (int i = n; i < h - n; i += p.stride) {
        for (int j = n; j < w - n; j += p.stride) {
            const int density = at(i + n, j + n) - at(i - n, j + n) - at(i + n, j - n) + at(i - n, j - n);
            if (static_cast<double>(density) <= threshold) continue;
            int k = 0;
            for (int r = i - n; r < i + n; ++r) {
                for (int c = j - n; c < j + n; ++c, ++k) {
                    if (p.alpha >= 1.0 || keyed_uniform(p.seed, i, j, k) < p.alpha) out(c, r) = 1;
                }
            }
        }
    }
    return out;
}

BinaryGrid complete_background(const BackgroundModel& bg, const PccParams& p, Segmenter* segmenter) {
    BinaryGrid stage_b = pcc(bg.mask, p);
    BinaryGrid stage_c = stage_b;
    if (segmenter) {
        for (const auto& det : segmenter->segment(stage_b, -1)) det.mask.paint(stage_c);
    }
    PccParams second = p;
    second.seed = splitmix64(p.seed);
    return pcc(stage_c, second);
}

}  // namespace bevkit
