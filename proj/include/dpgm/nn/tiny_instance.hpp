#pragma once

#include "dpgm/graphs/synthesize.hpp"
#include "dpgm/nn/grad_check.hpp"
#include "dpgm/nn/pipeline.hpp"

#include <cstdint>

namespace dpgm::nn {

/// Small end-to-end setting for gradient checks: n = 3, d_V = d_E = 4, T = 2,
/// three solver iterations, positive weight 5. Weights start at twice the
/// default init: at the default scale the solver path leaves gradients near
/// 1e-9, below what central differences at step 1e-5 can resolve.
struct TinyInstance {
    GraphPair pair;
    AAGraph aa;
    PredictorConfig predictor = PredictorConfig::with_width(4, 2);
    SolverConfig solver{};
    LossConfig loss{};
    ParamStore params;

    explicit TinyInstance(std::uint64_t seed = 1, Ablation ablation = Ablation::full, double init_gain = 2.0) : ablation(ablation) {
        pair = synthesize_pair(3, 0.05, 0.3, seed);
        aa = build_aa_graph(pair.g1, pair.g2);
        solver.max_iters = 3;
        loss.positive_weight = 5.0;
        params = make_predictor_params(predictor, seed);
        for (auto& [_, p] : params) p.value *= init_gain;
    }

    LossBuilder loss_builder() const {
        return [this](Tape& tape, ParamStore& p) {
            return *forward_instance(tape, aa, p, predictor, solver, loss, ablation, &pair.ground_truth).loss;
        };
    }

    GradCheckReport check(double step = 1e-5) { return grad_check(loss_builder(), params, step); }

    Ablation ablation;
};

} // namespace dpgm::nn
