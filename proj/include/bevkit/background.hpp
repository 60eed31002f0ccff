#pragma once

#include <cstdint>
#include <span>

#include "bevkit/bev.hpp"
#include "bevkit/grid.hpp"

namespace bevkit {

class Segmenter;

/// Point Cloud Completion parameters: half window `n` (windows are 2n x 2n),
/// density ratio threshold `rho`, fill rate `alpha`.
struct PccParams {
    int n = 3;
    double rho = 0.15;
    double alpha = 0.5;
    int stride = 1;
    std::uint64_t seed = 42;

    /// Throws InvalidConfig.
    void validate() const;
    bool operator==(const PccParams&) const = default;
};

struct BackgroundModel {
    Grid<double> frequency;
    BinaryGrid mask;
    double tau_bg = 0.2;
    int frames_used = 0;
};

/// Streaming per-pixel occupancy counter, so a long sequence never has to be
/// held in memory at once.
class BackgroundAccumulator {
public:
    BackgroundAccumulator(int width, int height) : hits_(width, height) {}

    /// Throws DimensionMismatch.
    void add(const BinaryGrid& occupancy);
    /// Throws TooFewFrames when fewer than two frames were added.
    [[nodiscard]] BackgroundModel finish(double tau_bg) const;

private:
    Grid<std::uint32_t> hits_;
    int frames_ = 0;
};

BackgroundModel estimate_background(std::span<const BevImage> images, double tau_bg = 0.2);

/// frame occupancy AND NOT (completed_bg if given, else bg.mask).
BinaryGrid subtract(const BinaryGrid& frame_occupancy, const BackgroundModel& bg,
                    const BinaryGrid* completed_bg = nullptr);

/// Sliding-window densification. Window density is measured on the input;
/// pixels of each above-threshold window are switched on independently with
/// probability alpha. Draws are keyed by (seed, window, pixel) so the result
/// does not depend on scan order.
BinaryGrid pcc(const BinaryGrid& img, const PccParams& p);

/// PCC on the background mask, optionally unioned with segmenter masks found
/// on that result, then PCC again.
BinaryGrid complete_background(const BackgroundModel& bg, const PccParams& p,
                               Segmenter* segmenter = nullptr);

}  // namespace bevkit
