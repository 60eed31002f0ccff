#pragma once

#include <span>
#include <vector>

namespace bevkit {

/// Linear interpolation between order statistics at rank (n-1)*q/100
/// (the "(k-1)/(n-1)" convention). q in [0, 100]. Throws Empty.
double percentile(std::vector<double> values, double q);
/// Same, for data that is already sorted ascending.
double percentile_sorted(std::span<const double> sorted, double q);

double median(std::vector<double> values);

struct DescriptiveStats {
    double mean = 0.0;
    double std = 0.0;  // population
    double min = 0.0;
    double p25 = 0.0;
    double p50 = 0.0;
    double p75 = 0.0;
    double p90 = 0.0;
    std::size_t count = 0;
};

/// Throws Empty.
DescriptiveStats describe_stats(std::span<const double> values);

}  // namespace bevkit
