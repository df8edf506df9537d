#pragma once

#include "dpgm/core/matrix.hpp"
#include "dpgm/graphs/aa_graph.hpp"
#include "dpgm/nn/predictor.hpp"
#include "dpgm/nn/solver_ops.hpp"
#include "dpgm/solver/probabilistic.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpgm::nn {

using LossConfig = BalancedCeOptions;

/// full: predictor output refined by the solver. tia: solver started from the
/// uniform assignment. wps: predictor assignment used directly, no solver.
enum class Ablation { full, tia, wps };

inline std::string to_string(Ablation a) {
    switch (a) {
    case Ablation::full: return "full";
    case Ablation::tia: return "tia";
    case Ablation::wps: return "wps";
    }
    return "?";
}

inline Ablation parse_ablation(const std::string& s) {
    if (s == "full") return Ablation::full;
    if (s == "tia") return Ablation::tia;
    if (s == "wps") return Ablation::wps;
    throw std::invalid_argument("unknown ablation '" + s + "' (expected full, tia or wps)");
}

struct TapeSolveInfo {
    std::size_t iterations = 0;
    StopReason stop_reason = StopReason::max_iters;
    std::vector<double> step_sq_norms;
};

/// Tape-recorded probabilistic solver over a learned affinity (diag + one value
/// per undirected edge). Sinkhorn runs a fixed sinkhorn_iters passes so the
/// unrolled graph is the same for nearby inputs; the early stop only truncates
/// the outer loop, and gradients flow through the executed iterations.
inline Var probabilistic_solve_on_tape(Var x_init, Var diag, Var offdiag, std::shared_ptr<const EdgeList> edges, std::size_t n,
                                       const SolverConfig& cfg, TapeSolveInfo* info = nullptr) {
    cfg.validate();
    Var x = clamp_min(x_init, cfg.init_floor);
    std::optional<Var> row_scale;
    TapeSolveInfo local;
    for (std::size_t t = 1; t <= cfg.max_iters; ++t) {
        Var y = pattern_spmv(diag, offdiag, x, edges);
        if (row_scale) y = hadamard(y, *row_scale);
        Var next = sinkhorn(y, n, cfg.sinkhorn_iters, cfg.init_floor);
        const double step = (next.value() - x.value()).squaredNorm();
        local.step_sq_norms.push_back(step);
        local.iterations = t;
        if (step < cfg.stop_eta) {
            local.stop_reason = StopReason::early_stop;
            x = next;
            break;
        }
        if (cfg.refine_affinity) {
            Var ratio = floor_div(next, x, cfg.ratio_floor);
            row_scale = row_scale ? hadamard(*row_scale, ratio) : ratio;
        }
        x = next;
        local.stop_reason = StopReason::max_iters;
    }
    if (info) *info = std::move(local);
    return x;
}

inline std::vector<double> permutation_target(const Permutation& gt, std::size_t n2) {
    return gt.to_matrix(n2).vec();
}

struct InstanceForward {
    PredictorOutput predictor;
    /// Final soft assignment (N x 1).
    Var assignment;
    std::optional<Var> loss;
    TapeSolveInfo solve;
};

/// Predictor + (ablation-dependent) solver, plus the balanced cross-entropy loss
/// when a ground truth is supplied.
inline InstanceForward forward_instance(Tape& tape, const AAGraph& aa, ParamStore& params, const PredictorConfig& pcfg,
                                        const SolverConfig& scfg, const LossConfig& lcfg, Ablation ablation,
                                        const Permutation* ground_truth = nullptr) {
    if (aa.n1 != aa.n2) throw std::invalid_argument("forward_instance: square instances only");
    InstanceForward out;
    out.predictor = predictor_forward(tape, aa, params, pcfg);
    const Decoded& d = out.predictor.decoded;
    switch (ablation) {
    case Ablation::wps:
        out.assignment = d.assignment;
        break;
    case Ablation::tia: {
        Var uniform = tape.constant(Mat::Constant(static_cast<Eigen::Index>(aa.node_count()), 1, 1.0 / static_cast<double>(aa.n2)));
        out.assignment = probabilistic_solve_on_tape(uniform, d.assignment, d.affinity, out.predictor.state.edge_list, aa.n1, scfg, &out.solve);
        break;
    }
    case Ablation::full:
        out.assignment = probabilistic_solve_on_tape(d.assignment, d.assignment, d.affinity, out.predictor.state.edge_list, aa.n1, scfg, &out.solve);
        break;
    }
    if (ground_truth) out.loss = balanced_ce(out.assignment, permutation_target(*ground_truth, aa.n2), lcfg);
    return out;
}

inline AssignmentMatrix to_assignment(const AAGraph& aa, Var x) {
    const Mat& v = x.value();
    return AssignmentMatrix(aa.n1, aa.n2, std::vector<double>(v.data(), v.data() + v.size()));
}

} // namespace dpgm::nn
