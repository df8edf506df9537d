#pragma once

#include "dpgm/affinity/handcrafted.hpp"
#include "dpgm/core/hungarian.hpp"
#include "dpgm/core/sinkhorn.hpp"
#include "dpgm/core/sparse_affinity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace dpgm {

/// Spectral matching: power iteration x <- Kx / ||Kx||_2 from the uniform vector.
inline std::vector<double> spectral_match(const SparseAffinity& k, std::size_t iters = 100) {
    if (k.all_zero()) throw std::invalid_argument("spectral_match: affinity is zero");
    if (!k.nonnegative()) throw std::invalid_argument("spectral_match: affinity must be nonnegative");
    const std::size_t total = k.size();
    std::vector<double> x(total, 1.0 / std::sqrt(static_cast<double>(total)));
    for (std::size_t it = 0; it < iters; ++it) {
        auto y = spmv(k, x);
        const double norm = std::sqrt(dot(y, y));
        if (norm == 0.0) break;
        for (double& v : y) v /= norm;
        x = std::move(y);
    }
    return x;
}

struct IpfpOptions {
    std::size_t max_iters = 50;
    /// Stop once the ascent gain (Kx)^T (b - x) falls below this.
    double tol = 1e-12;
};

/// Integer projected fixed point. Each step takes the Hungarian projection b of
/// the gradient Kx, then an exact line search of x^T K x on [x, b]. Returns the
/// better (by objective) of the final iterate and the best discrete b seen, so
/// the objective never falls below objective(x0).
inline std::vector<double> ipfp(const SparseAffinity& k, std::span<const double> x0, const IpfpOptions& opt = {}) {
    if (x0.size() != k.size()) throw std::invalid_argument("ipfp: x0 length does not match affinity");
    if (k.n1() != k.n2()) throw std::invalid_argument("ipfp: square assignment required");
    for (double v : x0)
        if (!(v >= 0.0)) throw std::invalid_argument("ipfp: x0 must be nonnegative");

    const std::size_t n1 = k.n1(), n2 = k.n2(), total = k.size();
    std::vector<double> x(x0.begin(), x0.end());
    std::vector<double> best_b;
    double best_b_score = -std::numeric_limits<double>::infinity();

    for (std::size_t it = 0; it < opt.max_iters; ++it) {
        const auto grad = spmv(k, x);
        const Permutation perm = hungarian(AssignmentMatrix(n1, n2, grad));
        std::vector<double> b(total, 0.0);
        for (std::size_t i = 0; i < n1; ++i) b[match_index(i, perm[i], n2)] = 1.0;

        const double b_score = objective(k, b);
        if (b_score > best_b_score) {
            best_b_score = b_score;
            best_b = b;
        }

        std::vector<double> d(total);
        for (std::size_t p = 0; p < total; ++p) d[p] = b[p] - x[p];
        const double c = dot(grad, d);
        if (c <= opt.tol) break;
        const double curv = dot(d, spmv(k, d));
        const double r = curv >= 0.0 ? 1.0 : std::min(1.0, -c / curv);
        for (std::size_t p = 0; p < total; ++p) x[p] += r * d[p];
    }
    if (!best_b.empty() && best_b_score >= objective(k, x)) return best_b;
    return x;
}

struct RrwmOptions {
    /// Weight of the reweighted jump.
    double alpha = 0.2;
    /// Exponent applied to the max-normalized walk before Sinkhorn.
    double inflation = 30.0;
    std::size_t max_iters = 100;
    double tol = 1e-8;
    std::size_t sinkhorn_iters = 20;
};

/// Reweighted random walk matching. The walk step uses K scaled by its largest
/// row sum; the jump is Sinkhorn(exp(inflation * y / max y)) rescaled to unit
/// l1 mass; both are mixed and l1-normalized.
inline std::vector<double> rrwm(const SparseAffinity& k, const RrwmOptions& opt = {}) {
    if (!k.nonnegative()) throw std::invalid_argument("rrwm: affinity must be nonnegative");
    if (k.n1() != k.n2()) throw std::invalid_argument("rrwm: square assignment required");
    if (opt.alpha < 0.0 || opt.alpha > 1.0) throw std::invalid_argument("rrwm: alpha must lie in [0, 1]");
    const std::size_t n1 = k.n1(), n2 = k.n2(), total = k.size();

    std::vector<double> row_sum(k.unary().begin(), k.unary().end());
    for (const auto& e : k.pairs()) row_sum[e.p] += e.value;
    const double d_max = *std::max_element(row_sum.begin(), row_sum.end());
    if (d_max <= 0.0) return std::vector<double>(total, 1.0 / static_cast<double>(total));

    std::vector<double> x(total, 1.0 / static_cast<double>(total));
    for (std::size_t it = 0; it < opt.max_iters; ++it) {
        auto y = spmv(k, x);
        double mass = 0.0;
        for (double& v : y) {
            v /= d_max;
            mass += v;
        }
        if (mass <= 0.0) break;
        for (double& v : y) v /= mass;

        std::vector<double> next = y;
        if (opt.alpha > 0.0) {
            const double peak = *std::max_element(y.begin(), y.end());
            std::vector<double> jump(total);
            for (std::size_t p = 0; p < total; ++p) jump[p] = std::exp(opt.inflation * y[p] / peak);
            auto projected = sinkhorn(AssignmentMatrix(n1, n2, std::move(jump)), {opt.sinkhorn_iters, 1e-9, 1e-12});
            const double jmass = std::accumulate(projected.vec().begin(), projected.vec().end(), 0.0);
            for (std::size_t p = 0; p < total; ++p)
                next[p] = opt.alpha * projected.vec()[p] / jmass + (1.0 - opt.alpha) * y[p];
            const double nmass = std::accumulate(next.begin(), next.end(), 0.0);
            for (double& v : next) v /= nmass;
        }

        double change = 0.0;
        for (std::size_t p = 0; p < total; ++p) change += (next[p] - x[p]) * (next[p] - x[p]);
        x = std::move(next);
        if (std::sqrt(change) < opt.tol) break;
    }
    return x;
}

} // namespace dpgm
