#include "bevkit/stats.hpp"

#include <algorithm>
#include <cmath>

#include "bevkit/error.hpp"

namespace bevkit {

double percentile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw Error(ErrorCode::Empty, "percentile of empty set");
    const double rank = std::clamp(q, 0.0, 100.0) / 100.0 * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = rank - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double percentile(std::vector<double> values, double q) {
    std::sort(values.begin(), values.end());
    return percentile_sorted(values, q);
}

double median(std::vector<double> values) { return percentile(std::move(values), 50.0); }

DescriptiveStats describe_stats(std::span<const double> values) {
    if (values.empty()) throw Error(ErrorCode::Empty, "statistics of empty set");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    DescriptiveStats s;
    s.count = sorted.size();
    double sum = 0.0;
    for (double v : sorted) sum += v;
    s.mean = sum / static_cast<double>(s.count);
    double sq = 0.0;
    for (double v : sorted) sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(s.count));
    s.min = sorted.front();
    s.p25 = percentile_sorted(sorted, 25.0);
    s.p50 = percentile_sorted(sorted, 50.0);
    s.p75 = percentile_sorted(sorted, 75.0);
    s.p90 = percentile_sorted(sorted, 90.0);
    return s;
}

}  // namespace bevkit
