#pragma once

#include "dpgm/affinity/handcrafted.hpp"
#include "dpgm/nn/pipeline.hpp"
#include "dpgm/nn/predictor.hpp"
#include "dpgm/nn/train.hpp"
#include "dpgm/solver/baselines.hpp"
#include "dpgm/solver/probabilistic.hpp"

#include <json.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpgm::bench {

inline constexpr const char* kVersion = "dpgm 0.1.0";

enum class SolverKind { dpgm, spectral, ipfp, rrwm };
enum class AffinitySource { handcrafted, learned };

inline std::string to_string(SolverKind s) {
    switch (s) {
    case SolverKind::dpgm: return "dpgm";
    case SolverKind::spectral: return "spectral";
    case SolverKind::ipfp: return "ipfp";
    case SolverKind::rrwm: return "rrwm";
    }
    return "?";
}

inline SolverKind parse_solver(const std::string& s) {
    if (s == "dpgm") return SolverKind::dpgm;
    if (s == "spectral") return SolverKind::spectral;
    if (s == "ipfp") return SolverKind::ipfp;
    if (s == "rrwm") return SolverKind::rrwm;
    throw std::invalid_argument("unknown solver '" + s + "' (expected dpgm, spectral, ipfp or rrwm)");
}

inline std::string to_string(AffinitySource a) { return a == AffinitySource::handcrafted ? "handcrafted" : "learned"; }

inline AffinitySource parse_affinity_source(const std::string& s) {
    if (s == "handcrafted") return AffinitySource::handcrafted;
    if (s == "learned") return AffinitySource::learned;
    throw std::invalid_argument("unknown affinity source '" + s + "' (expected handcrafted or learned)");
}

struct DatasetSpec {
    std::size_t n = 10;
    std::vector<double> noise_levels{0.02};
    /// Instances per noise level.
    std::size_t instances = 10;
    std::uint64_t seed = 1;
    double rotation_max = 0.2;
    double translation_max = 0.05;
    std::size_t outliers = 0;
    /// When set, pairs are read from this dataset file instead of generated.
    std::string path;
};

struct ExperimentConfig {
    DatasetSpec dataset{};
    SolverKind solver = SolverKind::dpgm;
    AffinitySource affinity = AffinitySource::handcrafted;
    nn::Ablation ablation = nn::Ablation::full;
    SolverConfig solver_cfg{};
    AffinityConfig affinity_cfg{};
    nn::PredictorConfig predictor = nn::PredictorConfig::with_width(32, 5);
    nn::LossConfig loss{};
    nn::TrainOptions train{};
    std::size_t train_instances = 500;
    std::size_t test_instances = 100;
    std::uint64_t param_seed = 7;
    std::string checkpoint_path;
    std::string rows_path;
    std::string summary_path;
    /// Learning curve CSV written by training.
    std::string curve_path;
    std::size_t workers = 1;

    void validate() const {
        if (dataset.path.empty() && dataset.n < 3) throw std::invalid_argument("config: dataset n must be >= 3");
        if (dataset.path.empty() && dataset.noise_levels.empty()) throw std::invalid_argument("config: at least one noise level required");
        if (workers == 0) throw std::invalid_argument("config: workers must be >= 1");
        solver_cfg.validate();
        affinity_cfg.validate();
        predictor.validate();
    }
};

inline nlohmann::json to_json(const ExperimentConfig& c) {
    const auto& d = c.dataset;
    const auto& s = c.solver_cfg;
    const auto& p = c.predictor;
    return {
        {"dataset",
         {{"n", d.n},
          {"noise_levels", d.noise_levels},
          {"instances", d.instances},
          {"seed", d.seed},
          {"rotation_max", d.rotation_max},
          {"translation_max", d.translation_max},
          {"outliers", d.outliers},
          {"path", d.path}}},
        {"solver", to_string(c.solver)},
        {"affinity", to_string(c.affinity)},
        {"ablation", nn::to_string(c.ablation)},
        {"solver_config",
         {{"max_iters", s.max_iters},
          {"stop_eta", s.stop_eta},
          {"sinkhorn_iters", s.sinkhorn_iters},
          {"sinkhorn_tol", s.sinkhorn_tol},
          {"ratio_floor", s.ratio_floor},
          {"refine_affinity", s.refine_affinity}}},
        {"affinity_config",
         {{"sigma_len", c.affinity_cfg.sigma_len}, {"sigma_ang", c.affinity_cfg.sigma_ang}, {"unary_weight", c.affinity_cfg.unary_weight}}},
        {"predictor", {{"node_dim", p.node_dim}, {"edge_dim", p.edge_dim}, {"iterations", p.iterations}}},
        {"loss", {{"positive_weight", c.loss.positive_weight}}},
        {"train",
         {{"epochs", c.train.epochs},
          {"batch_size", c.train.batch_size},
          {"learning_rate", c.train.adam.learning_rate},
          {"seed", c.train.seed},
          {"train_instances", c.train_instances},
          {"test_instances", c.test_instances},
          {"param_seed", c.param_seed}}},
        {"checkpoint", c.checkpoint_path},
        {"workers", c.workers},
    };
}

} // namespace dpgm::bench
