#pragma once

#include "dpgm/affinity/handcrafted.hpp"
#include "dpgm/core/matrix.hpp"
#include "dpgm/core/sinkhorn.hpp"
#include "dpgm/core/sparse_affinity.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpgm {

struct SolverConfig {
    /// Maximum outer iterations S.
    std::size_t max_iters = 10;
    /// Early stop threshold on ||x_{t+1} - x_t||^2.
    double stop_eta = 1e-5;
    std::size_t sinkhorn_iters = 20;
    double sinkhorn_tol = 1e-9;
    /// Denominator clamp in the x_{t+1} / x_t refinement ratio.
    double ratio_floor = 1e-12;
    /// Lower clamp on the initial assignment.
    double init_floor = 1e-12;
    /// When false every refinement ratio is forced to 1 and the loop reduces to
    /// Sinkhorn-projected power iteration.
    bool refine_affinity = true;

    void validate() const {
        if (max_iters < 1) throw std::invalid_argument("SolverConfig: max_iters must be >= 1");
        if (!(stop_eta > 0.0)) throw std::invalid_argument("SolverConfig: stop_eta must be positive");
        if (!(sinkhorn_tol > 0.0)) throw std::invalid_argument("SolverConfig: sinkhorn_tol must be positive");
        if (!(ratio_floor > 0.0) || !(init_floor > 0.0)) throw std::invalid_argument("SolverConfig: floors must be positive");
    }
};

enum class StopReason { early_stop, max_iters };

inline std::string to_string(StopReason r) { return r == StopReason::early_stop ? "early_stop" : "max_iters"; }

/// Per-iteration record. Index 0 is the (floored) initial assignment; index t is
/// the assignment after outer iteration t.
struct SolveTrace {
    std::vector<AssignmentMatrix> assignments;
    std::vector<double> binary_scores;
    /// x^T K x against the input affinity.
    std::vector<double> objectives;
    /// ||x_t - x_{t-1}||^2 for t >= 1.
    std::vector<double> step_sq_norms;
    /// Cumulative row scaling of K after each refinement: K_{t+1} = diag(scale) K_1.
    std::vector<std::vector<double>> row_scales;
    StopReason stop_reason = StopReason::max_iters;
    std::size_t iterations = 0;
};

struct SolveResult {
    AssignmentMatrix assignment;
    SolveTrace trace;
};

inline AssignmentMatrix uniform_assignment(std::size_t n1, std::size_t n2) {
    return AssignmentMatrix(n1, n2, 1.0 / static_cast<double>(n2));
}

/// Differentiable probabilistic solver.
///
/// Each outer iteration estimates match probabilities x <- K_t x, projects them
/// with Sinkhorn, and stops once successive assignments differ by less than
/// stop_eta in squared norm. Otherwise every row p of K is rescaled by
/// x_{t+1,p} / x_{t,p}, strengthening conditional probabilities of matches whose
/// probability grew. K_t is kept as diag(row_scale) * K_1, which is the same
/// operator without materialising the rescaled entries.
inline SolveResult probabilistic_solve(const SparseAffinity& k, const AssignmentMatrix& x_init, const SolverConfig& cfg = {}) {
    cfg.validate();
    if (x_init.rows() != k.n1() || x_init.cols() != k.n2())
        throw std::invalid_argument("probabilistic_solve: initial assignment shape does not match affinity");
    if (!k.nonnegative()) throw std::invalid_argument("probabilistic_solve: affinity must be nonnegative");

    const std::size_t n1 = k.n1(), n2 = k.n2(), total = k.size();
    const SinkhornOptions sk{cfg.sinkhorn_iters, cfg.sinkhorn_tol, cfg.init_floor};

    AssignmentMatrix x = x_init;
    for (double& v : x.values()) {
        if (!(v >= 0.0)) throw std::invalid_argument("probabilistic_solve: initial assignment must be nonnegative");
        v = std::max(v, cfg.init_floor);
    }

    SolveResult out;
    auto& trace = out.trace;
    auto record = [&](const AssignmentMatrix& m) {
        trace.assignments.push_back(m);
        trace.binary_scores.push_back(m.square() ? binary_score(m) : 0.0);
        trace.objectives.push_back(objective(k, m.vec()));
    };
    record(x);

    if (k.all_zero()) {
        AssignmentMatrix normalized = sinkhorn(x, sk);
        double step = 0.0;
        for (std::size_t p = 0; p < total; ++p) step += (normalized.vec()[p] - x.vec()[p]) * (normalized.vec()[p] - x.vec()[p]);
        record(normalized);
        trace.step_sq_norms.push_back(step);
        trace.stop_reason = StopReason::early_stop;
        trace.iterations = 1;
        out.assignment = std::move(normalized);
        return out;
    }

    std::vector<double> scale(total, 1.0);
    for (std::size_t t = 1; t <= cfg.max_iters; ++t) {
        auto y = spmv(k, x.vec());
        for (std::size_t p = 0; p < total; ++p) y[p] *= scale[p];
        AssignmentMatrix next = sinkhorn(AssignmentMatrix(n1, n2, std::move(y)), sk);

        double step = 0.0;
        for (std::size_t p = 0; p < total; ++p) {
            const double d = next.vec()[p] - x.vec()[p];
            step += d * d;
        }
        record(next);
        trace.step_sq_norms.push_back(step);
        trace.iterations = t;

        if (step < cfg.stop_eta) {
            trace.stop_reason = StopReason::early_stop;
            x = std::move(next);
            break;
        }
        if (cfg.refine_affinity) {
            for (std::size_t p = 0; p < total; ++p) scale[p] *= next.vec()[p] / std::max(x.vec()[p], cfg.ratio_floor);
        }
        trace.row_scales.push_back(scale);
        x = std::move(next);
        trace.stop_reason = StopReason::max_iters;
    }
    out.assignment = std::move(x);
    return out;
}

} // namespace dpgm
