#pragma once

#include "dpgm/core/matrix.hpp"

#include <limits>
#include <stdexcept>
#include <vector>

namespace dpgm {

/// Maximum-profit perfect assignment on a square matrix.
///
/// Shortest augmenting path formulation of the Hungarian method, O(n^3), run on
/// cost = -profit. Rows are inserted in index order and ties resolve to the lowest
/// column index, so the result is deterministic for tied profits.
inline Permutation hungarian(const DenseMatrix& profit) {
    if (!profit.square()) throw std::invalid_argument("hungarian: profit matrix must be square");
    if (!profit.all_finite()) throw std::invalid_argument("hungarian: profit entries must be finite");
    const std::size_t n = profit.rows();
    if (n == 0) return {};

    constexpr double inf = std::numeric_limits<double>::infinity();
    // 1-based potentials; column 0 is the virtual source.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> match_col(n + 1, 0), way(n + 1, 0);

    for (std::size_t row = 1; row <= n; ++row) {
        match_col[0] = row;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = match_col[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = -profit(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match_col[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match_col[j0] = match_col[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    Permutation result;
    result.mapping.assign(n, 0);
    for (std::size_t j = 1; j <= n; ++j) result.mapping[match_col[j] - 1] = j - 1;
    return result;
}

inline double assignment_profit(const DenseMatrix& profit, const Permutation& perm) {
    double s = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) s += profit(i, perm[i]);
    return s;
}

} // namespace dpgm
