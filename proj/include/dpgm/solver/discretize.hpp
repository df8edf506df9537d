#pragma once

#include "dpgm/core/hungarian.hpp"
#include "dpgm/core/matrix.hpp"

#include <span>
#include <stdexcept>

namespace dpgm {

/// Hard correspondence from a soft assignment (Hungarian on X as profit).
inline Permutation discretize(const AssignmentMatrix& x) { return hungarian(x); }

inline Permutation discretize(std::span<const double> x, std::size_t n1, std::size_t n2) {
    if (x.size() != n1 * n2) throw std::invalid_argument("discretize: vector length != n1*n2");
    return hungarian(AssignmentMatrix(n1, n2, std::vector<double>(x.begin(), x.end())));
}

/// Fraction of graph-1 nodes whose predicted match equals the ground truth.
inline double accuracy(const Permutation& pred, const Permutation& gt) {
    if (pred.size() != gt.size()) throw std::invalid_argument("accuracy: permutation sizes differ");
    if (gt.size() == 0) return 1.0;
    std::size_t hit = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) hit += pred[i] == gt[i];
    return static_cast<double>(hit) / static_cast<double>(gt.size());
}

} // namespace dpgm
