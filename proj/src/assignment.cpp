#include "bevkit/assignment.hpp"

#include <algorithm>
#include <limits>

namespace bevkit {

std::vector<std::pair<int, int>> max_weight_matching(const std::vector<std::vector<double>>& weight,
                                                     double min_weight) {
    const int rows = static_cast<int>(weight.size());
    const int cols = rows ? static_cast<int>(weight.front().size()) : 0;
    if (rows == 0 || cols == 0) return {};

    // Square cost matrix; gated-out and padding entries cost 0, so leaving a
    // row unmatched is always as good as taking a forbidden edge.
    const int dim = std::max(rows, cols);
    const auto cost = [&](int r, int c) {
        if (r >= rows || c >= cols) return 0.0;
        const double w = weight[r][c];
        return w >= min_weight ? -w : 0.0;
    };

    constexpr double kInf = std::numeric_limits<double>::infinity();
    // 1-based Hungarian algorithm (e-maxx formulation).
    std::vector<double> pot_row(dim + 1, 0.0);
    std::vector<double> pot_col(dim + 1, 0.0);
    std::vector<int> match_col(dim + 1, 0);
    std::vector<int> way(dim + 1, 0);
    for (int r = 1; r <= dim; ++r) {
        match_col[0] = r;
        int c0 = 0;
        std::vector<double> minv(dim + 1, kInf);
        std::vector<char> used(dim + 1, 0);
        do {
            used[c0] = 1;
            const int r0 = match_col[c0];
            double delta = kInf;
            int c1 = 0;
            for (int c = 1; c <= dim; ++c) {
                if (used[c]) continue;
                const double cur = cost(r0 - 1, c - 1) - pot_row[r0] - pot_col[c];
                if (cur < minv[c]) {
                    minv[c] = cur;
                    way[c] = c0;
                }
                if (minv[c] < delta) {
                    delta = minv[c];
                    c1 = c;
                }
            }
            for (int c = 0; c <= dim; ++c) {
                if (used[c]) {
                    pot_row[match_col[c]] += delta;
                    pot_col[c] -= delta;
                } else {
                    minv[c] -= delta;
                }
            }
            c0 = c1;
        } while (match_col[c0] != 0);
        do {
            const int c1 = way[c0];
            match_col[c0] = match_col[c1];
            c0 = c1;
        } while (c0 != 0);
    }

    std::vector<std::pair<int, int>> pairs;
    for (int c = 1; c <= dim; ++c) {
        const int r = match_col[c] - 1;
        const int col = c - 1;
        if (r < rows && col < cols && weight[r][col] >= min_weight) pairs.emplace_back(r, col);
    }
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

}  // namespace bevkit
