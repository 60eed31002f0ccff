#pragma once

#include <utility>
#include <vector>

namespace bevkit {

/// Maximum-weight bipartite matching on a dense rows x cols weight matrix
/// (Kuhn-Munkres with potentials). Pairs whose weight is below `min_weight`
/// are never matched. Returns (row, col) pairs sorted by row.
std::vector<std::pair<int, int>> max_weight_matching(const std::vector<std::vector<double>>& weight,
                                                     double min_weight);

}  // namespace bevkit
