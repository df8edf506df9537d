#pragma once

#include "dpgm/nn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dpgm::nn {

using EdgeList = std::vector<std::pair<std::size_t, std::size_t>>;

/// y = K x for an affinity given as a diagonal (N x 1) plus one symmetric value
/// per undirected edge (E x 1) on a fixed pattern.
inline Var pattern_spmv(Var diag, Var offdiag, Var x, std::shared_ptr<const EdgeList> edges) {
    Tape& t = detail::same_tape(diag, x);
    detail::same_tape(offdiag, x);
    const Mat& d = diag.value();
    const Mat& o = offdiag.value();
    const Mat& xv = x.value();
    detail::require_shape(d.cols() == 1 && xv.cols() == 1 && o.cols() == 1 && d.rows() == xv.rows() &&
                              o.rows() == static_cast<Eigen::Index>(edges->size()),
                          "pattern_spmv");
    Mat y = d.cwiseProduct(xv);
    for (std::size_t e = 0; e < edges->size(); ++e) {
        const auto [p, q] = (*edges)[e];
        const double w = o(static_cast<Eigen::Index>(e), 0);
        y(static_cast<Eigen::Index>(p), 0) += w * xv(static_cast<Eigen::Index>(q), 0);
        y(static_cast<Eigen::Index>(q), 0) += w * xv(static_cast<Eigen::Index>(p), 0);
    }
    return t.record(Op::pattern_spmv, {diag.id, offdiag.id, x.id}, std::move(y),
                    [id = diag.id, io = offdiag.id, ix = x.id, edges](Tape& tp, std::size_t self) {
                        const Mat& g = tp.grad(self);
                        const Mat& d = tp.value(id);
                        const Mat& o = tp.value(io);
                        const Mat& xv = tp.value(ix);
                        Mat gx = d.cwiseProduct(g);
                        Mat go(o.rows(), 1);
                        for (std::size_t e = 0; e < edges->size(); ++e) {
                            const auto p = static_cast<Eigen::Index>((*edges)[e].first);
                            const auto q = static_cast<Eigen::Index>((*edges)[e].second);
                            const double w = o(static_cast<Eigen::Index>(e), 0);
                            go(static_cast<Eigen::Index>(e), 0) = g(p, 0) * xv(q, 0) + g(q, 0) * xv(p, 0);
                            gx(q, 0) += w * g(p, 0);
                            gx(p, 0) += w * g(q, 0);
                        }
                        tp.accumulate(id, g.cwiseProduct(xv));
                        tp.accumulate(io, go);
                        tp.accumulate(ix, gx);
                    });
}

/// Sinkhorn on a vectorized n x n assignment (N x 1, row-major), unrolled for a
/// fixed number of row-then-column passes after clamping entries to >= floor.
inline Var sinkhorn(Var x, std::size_t n, std::size_t iters, double floor) {
    const Mat& xv = x.value();
    detail::require_shape(xv.cols() == 1 && xv.rows() == static_cast<Eigen::Index>(n * n), "sinkhorn");
    const auto ni = static_cast<Eigen::Index>(n);

    struct Pass {
        Mat row_normalized;
        Eigen::VectorXd row_sums;
        Eigen::RowVectorXd col_sums;
        Mat out;
    };
    auto passes = std::make_shared<std::vector<Pass>>();
    passes->reserve(iters);

    Mat cur = Eigen::Map<const Mat>(xv.data(), ni, ni).cwiseMax(floor);
    for (std::size_t it = 0; it < iters; ++it) {
        Pass p;
        p.row_sums = cur.rowwise().sum();
        p.row_normalized = cur.array().colwise() / p.row_sums.array();
        p.col_sums = p.row_normalized.colwise().sum();
        p.out = p.row_normalized.array().rowwise() / p.col_sums.array();
        cur = p.out;
        passes->push_back(std::move(p));
    }
    Mat out = Eigen::Map<const Mat>(cur.data(), ni * ni, 1);

    return x.tape->record(Op::sinkhorn, {x.id}, std::move(out), [ix = x.id, ni, floor, passes](Tape& tp, std::size_t self) {
        Mat g = Eigen::Map<const Mat>(tp.grad(self).data(), ni, ni);
        for (auto it = passes->rbegin(); it != passes->rend(); ++it) {
            // out = R / c (column pass)
            const Eigen::RowVectorXd gc = g.cwiseProduct(it->out).colwise().sum();
            Mat g_r = (g.rowwise() - gc).array().rowwise() / it->col_sums.array();
            // R = X / s (row pass)
            const Eigen::VectorXd gs = g_r.cwiseProduct(it->row_normalized).rowwise().sum();
            g = (g_r.colwise() - gs).array().colwise() / it->row_sums.array();
        }
        const Mat& xv = tp.value(ix);
        Mat gx = Eigen::Map<const Mat>(g.data(), ni * ni, 1);
        for (Eigen::Index k = 0; k < gx.size(); ++k)
            if (!(xv.data()[k] > floor)) gx.data()[k] = 0.0;
        tp.accumulate(ix, gx);
    });
}

struct BalancedCeOptions {
    /// Positive-label weight w.
    double positive_weight = 5.0;
    /// Predictions are clamped to [clamp, 1 - clamp] before the logs.
    double clamp = 1e-7;
};

/// L = -sum_k [ w * t_k * log x_k + (1 - w) * (1 - t_k) * log(1 - x_k) ].
inline double balanced_ce_loss(std::span<const double> x, std::span<const double> target, const BalancedCeOptions& opt = {}) {
    if (x.size() != target.size()) throw std::invalid_argument("balanced_ce_loss: length mismatch");
    const double w = opt.positive_weight;
    double loss = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double xc = std::clamp(x[k], opt.clamp, 1.0 - opt.clamp);
        loss -= w * target[k] * std::log(xc) + (1.0 - w) * (1.0 - target[k]) * std::log(1.0 - xc);
    }
    return loss;
}

inline Var balanced_ce(Var x, std::vector<double> target, const BalancedCeOptions& opt = {}) {
    const Mat& xv = x.value();
    detail::require_shape(xv.size() == static_cast<Eigen::Index>(target.size()), "balanced_ce");
    Mat out(1, 1);
    out(0, 0) = balanced_ce_loss(std::span<const double>(xv.data(), static_cast<std::size_t>(xv.size())), target, opt);
    return x.tape->record(Op::balanced_ce, {x.id}, std::move(out), [ix = x.id, target = std::move(target), opt](Tape& tp, std::size_t self) {
        const Mat& xv = tp.value(ix);
        const double g = tp.grad(self)(0, 0);
        const double w = opt.positive_weight;
        Mat gx(xv.rows(), xv.cols());
        for (Eigen::Index k = 0; k < xv.size(); ++k) {
            const double v = xv.data()[k];
            const double t = target[static_cast<std::size_t>(k)];
            if (v <= opt.clamp || v >= 1.0 - opt.clamp) {
                gx.data()[k] = 0.0;
                continue;
            }
            gx.data()[k] = g * (-w * t / v + (1.0 - w) * (1.0 - t) / (1.0 - v));
        }
        tp.accumulate(ix, gx);
    });
}

} // namespace dpgm::nn
