#pragma once

#include "dpgm/core/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dpgm {

struct SinkhornOptions {
    std::size_t max_iters = 20;
    double tol = 1e-9;
    /// Lower clamp applied to every entry before the first pass.
    double floor = 1e-12;
};

struct SinkhornResult {
    AssignmentMatrix matrix;
    std::size_t iterations = 0;
    /// Largest |row sum - 1| or |col sum - 1| after the last pass.
    double deviation = 0.0;
};

/// Largest deviation of any row or column sum from 1.
inline double doubly_stochastic_deviation(const DenseMatrix& x) {
    double worst = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < x.cols(); ++j) s += x(i, j);
        worst = std::max(worst, std::abs(s - 1.0));
    }
    for (std::size_t j = 0; j < x.cols(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.rows(); ++i) s += x(i, j);
        worst = std::max(worst, std::abs(s - 1.0));
    }
    return worst;
}

/// Alternating row then column normalization of a square nonnegative matrix.
/// One iteration is a row pass followed by a column pass; the loop stops once the
/// residual row deviation drops below tol (columns are exact after their pass).
inline SinkhornResult sinkhorn_detailed(AssignmentMatrix x, const SinkhornOptions& opt = {}) {
    if (!x.square()) throw std::invalid_argument("sinkhorn: only square matrices are supported");
    if (!(opt.tol > 0.0)) throw std::invalid_argument("sinkhorn: tol must be positive");
    if (!(opt.floor > 0.0)) throw std::invalid_argument("sinkhorn: floor must be positive");
    for (double v : x.values()) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("sinkhorn: entries must be finite and nonnegative");
    }

    const std::size_t n = x.rows();
    for (double& v : x.values()) v = std::max(v, opt.floor);

    SinkhornResult out;
    std::vector<double> col(n);
    for (std::size_t it = 0; it < opt.max_iters; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += x(i, j);
            for (std::size_t j = 0; j < n; ++j) x(i, j) /= s;
        }
        std::fill(col.begin(), col.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) col[j] += x(i, j);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) x(i, j) /= col[j];
        out.iterations = it + 1;

        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += x(i, j);
            worst = std::max(worst, std::abs(s - 1.0));
        }
        out.deviation = worst;
        if (worst < opt.tol) break;
    }
    if (opt.max_iters == 0) out.deviation = doubly_stochastic_deviation(x);
    out.matrix = std::move(x);
    return out;
}

inline AssignmentMatrix sinkhorn(const AssignmentMatrix& x, const SinkhornOptions& opt = {}) {
    return sinkhorn_detailed(x, opt).matrix;
}

inline AssignmentMatrix sinkhorn(const AssignmentMatrix& x, std::size_t max_iters, double tol, double floor = 1e-12) {
    return sinkhorn_detailed(x, {max_iters, tol, floor}).matrix;
}

} // namespace dpgm
