#pragma once

#include "dpgm/graphs/aa_graph.hpp"
#include "dpgm/nn/adam.hpp"
#include "dpgm/nn/pipeline.hpp"
#include "dpgm/solver/discretize.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <future>
#include <numeric>
#include <random>
#include <vector>

namespace dpgm::nn {

struct Sample {
    AAGraph aa;
    Permutation ground_truth;
};

inline Sample make_sample(const GraphPair& pair) { return {build_aa_graph(pair.g1, pair.g2), pair.ground_truth}; }

struct TrainOptions {
    std::size_t epochs = 50;
    std::size_t batch_size = 8;
    AdamOptions adam{};
    std::uint64_t seed = 0;
    /// Instances of one batch evaluated concurrently; gradients are summed in
    /// instance order so the result does not depend on this value.
    std::size_t workers = 1;
    Ablation ablation = Ablation::full;
};

struct EpochMetrics {
    std::size_t epoch = 0;
    double mean_loss = 0.0;
    double train_accuracy = 0.0;
};

struct InstanceGradient {
    double loss = 0.0;
    double accuracy = 0.0;
    std::vector<Mat> grads;
};

namespace detail {

inline InstanceGradient instance_gradient(const Sample& s, const ParamStore& params, const PredictorConfig& pcfg, const SolverConfig& scfg,
                                          const LossConfig& lcfg, Ablation ablation) {
    ParamStore local = params;
    local.zero_grad();
    Tape tape;
    auto fwd = forward_instance(tape, s.aa, local, pcfg, scfg, lcfg, ablation, &s.ground_truth);
    tape.backward(*fwd.loss);
    InstanceGradient out;
    out.loss = fwd.loss->value()(0, 0);
    out.accuracy = accuracy(discretize(to_assignment(s.aa, fwd.assignment)), s.ground_truth);
    for (auto& [_, p] : local) out.grads.push_back(std::move(p.grad));
    return out;
}

} // namespace detail

/// Mini-batch training of the predictor through the solver. Deterministic in
/// (data, configs, seed).
inline std::vector<EpochMetrics> train(ParamStore& params, const std::vector<Sample>& data, const PredictorConfig& pcfg,
                                       const SolverConfig& scfg, const LossConfig& lcfg, const TrainOptions& opt,
                                       const std::function<void(const EpochMetrics&)>& on_epoch = {}) {
    if (data.empty()) throw std::invalid_argument("train: empty dataset");
    if (opt.batch_size == 0) throw std::invalid_argument("train: batch size must be positive");
    std::mt19937_64 rng(opt.seed);
    Adam adam(opt.adam);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<EpochMetrics> curve;

    for (std::size_t epoch = 1; epoch <= opt.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0, acc_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += opt.batch_size) {
            const std::size_t stop = std::min(order.size(), start + opt.batch_size);
            std::vector<InstanceGradient> results(stop - start);
            if (opt.workers > 1) {
                for (std::size_t base = start; base < stop; base += opt.workers) {
                    std::vector<std::future<InstanceGradient>> jobs;
                    for (std::size_t k = base; k < std::min(stop, base + opt.workers); ++k)
                        jobs.push_back(std::async(std::launch::async, detail::instance_gradient, std::cref(data[order[k]]),
                                                  std::cref(params), std::cref(pcfg), std::cref(scfg), std::cref(lcfg), opt.ablation));
                    for (std::size_t k = 0; k < jobs.size(); ++k) results[base - start + k] = jobs[k].get();
                }
            } else {
                for (std::size_t k = start; k < stop; ++k)
                    results[k - start] = detail::instance_gradient(data[order[k]], params, pcfg, scfg, lcfg, opt.ablation);
            }

            params.zero_grad();
            const double inv = 1.0 / static_cast<double>(results.size());
            for (const auto& r : results) {
                std::size_t idx = 0;
                for (auto& [_, p] : params) p.grad += inv * r.grads[idx++];
                loss_sum += r.loss;
                acc_sum += r.accuracy;
            }
            adam.step(params);
        }
        EpochMetrics m{epoch, loss_sum / static_cast<double>(data.size()), acc_sum / static_cast<double>(data.size())};
        curve.push_back(m);
        if (on_epoch) on_epoch(m);
    }
    return curve;
}

struct InstanceEval {
    Permutation prediction;
    AssignmentMatrix assignment;
    double accuracy = 0.0;
    std::size_t iterations = 0;
};

/// Inference with the learned pipeline under the given ablation.
inline InstanceEval evaluate_instance(const Sample& s, ParamStore& params, const PredictorConfig& pcfg, const SolverConfig& scfg,
                                      Ablation ablation) {
    Tape tape;
    auto fwd = forward_instance(tape, s.aa, params, pcfg, scfg, LossConfig{}, ablation);
    InstanceEval out;
    out.assignment = to_assignment(s.aa, fwd.assignment);
    out.prediction = discretize(out.assignment);
    out.accuracy = accuracy(out.prediction, s.ground_truth);
    out.iterations = fwd.solve.iterations;
    return out;
}

} // namespace dpgm::nn
