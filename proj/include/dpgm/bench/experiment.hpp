#pragma once

#include "dpgm/bench/config.hpp"
#include "dpgm/core/sinkhorn.hpp"
#include "dpgm/graphs/serialization.hpp"
#include "dpgm/graphs/synthesize.hpp"
#include "dpgm/nn/checkpoint.hpp"
#include "dpgm/solver/discretize.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <future>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace dpgm::bench {

struct Instance {
    std::size_t index = 0;
    GraphPair pair;
};

/// Seeds dataset.seed + k for k = 0 .. levels * instances - 1, level-major.
inline std::vector<Instance> generate_instances(const DatasetSpec& d) {
    std::vector<Instance> out;
    if (!d.path.empty()) {
        auto pairs = load_dataset(d.path);
        for (std::size_t k = 0; k < pairs.size(); ++k) out.push_back({k, std::move(pairs[k])});
        return out;
    }
    SynthesisOptions opt;
    opt.translation_max = d.translation_max;
    opt.outliers = d.outliers;
    std::size_t k = 0;
    for (double sigma : d.noise_levels)
        for (std::size_t j = 0; j < d.instances; ++j, ++k)
            out.push_back({k, synthesize_pair(d.n, sigma, d.rotation_max, d.seed + k, opt)});
    return out;
}

struct InstanceRow {
    std::size_t instance = 0;
    std::uint64_t seed = 0;
    double noise_sigma = 0.0;
    std::size_t n = 0;
    double accuracy = 0.0;
    /// x^T K x of the discrete prediction under the affinity the solver saw.
    double objective = 0.0;
    /// Binary score of the Sinkhorn-normalized final soft assignment.
    double binary_score = 0.0;
    std::size_t iterations = 0;
    /// Excluded from the emitted rows so they stay reproducible.
    double wall_seconds = 0.0;
};

struct Stat {
    double mean = 0.0;
    double std = 0.0;
};

/// Mean and population standard deviation.
inline Stat summarize(const std::vector<double>& v) {
    Stat s;
    if (v.empty()) return s;
    for (double x : v) s.mean += x;
    s.mean /= static_cast<double>(v.size());
    for (double x : v) s.std += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(s.std / static_cast<double>(v.size()));
    return s;
}

struct RunReport {
    std::vector<InstanceRow> rows;
    Stat accuracy, objective, binary_score, iterations;
    /// Mean accuracy per noise level, keyed by sigma.
    std::map<double, double> accuracy_by_noise;
    nlohmann::json config;
    std::string version = kVersion;

    void aggregate() {
        std::vector<double> a, o, b, it;
        std::map<double, std::vector<double>> by_noise;
        for (const auto& r : rows) {
            a.push_back(r.accuracy);
            o.push_back(r.objective);
            b.push_back(r.binary_score);
            it.push_back(static_cast<double>(r.iterations));
            by_noise[r.noise_sigma].push_back(r.accuracy);
        }
        accuracy = summarize(a);
        objective = summarize(o);
        binary_score = summarize(b);
        iterations = summarize(it);
        accuracy_by_noise.clear();
        for (const auto& [sigma, v] : by_noise) accuracy_by_noise[sigma] = summarize(v).mean;
    }
};

inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline constexpr const char* kRowHeader = "instance,seed,noise_sigma,n,accuracy,objective,binary_score,iterations";

inline std::string rows_csv(const RunReport& r) {
    std::ostringstream os;
    os << kRowHeader << '\n';
    for (const auto& row : r.rows) {
        os << row.instance << ',' << row.seed << ',' << format_real(row.noise_sigma) << ',' << row.n << ',' << format_real(row.accuracy)
           << ',' << format_real(row.objective) << ',' << format_real(row.binary_score) << ',' << row.iterations << '\n';
    }
    return os.str();
}

/// Parses rows emitted by rows_csv.
inline std::vector<InstanceRow> parse_rows_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    std::getline(is, line);
    if (line != kRowHeader) throw std::runtime_error("rows: unexpected header");
    std::vector<InstanceRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string f;
        std::vector<std::string> fields;
        while (std::getline(ls, f, ',')) fields.push_back(f);
        if (fields.size() != 8) throw std::runtime_error("rows: expected 8 fields");
        InstanceRow r;
        r.instance = std::stoull(fields[0]);
        r.seed = std::stoull(fields[1]);
        r.noise_sigma = std::stod(fields[2]);
        r.n = std::stoull(fields[3]);
        r.accuracy = std::stod(fields[4]);
        r.objective = std::stod(fields[5]);
        r.binary_score = std::stod(fields[6]);
        r.iterations = std::stoull(fields[7]);
        rows.push_back(r);
    }
    return rows;
}

inline nlohmann::json summary_json(const RunReport& r) {
    auto stat = [](const Stat& s) { return nlohmann::json{{"mean", s.mean}, {"std", s.std}}; };
    nlohmann::json by_noise = nlohmann::json::array();
    for (const auto& [sigma, acc] : r.accuracy_by_noise) by_noise.push_back({{"noise_sigma", sigma}, {"mean_accuracy", acc}});
    std::vector<double> wall;
    for (const auto& row : r.rows) wall.push_back(row.wall_seconds);
    return {
        {"schema", "dpgm.run_report"},
        {"version", r.version},
        {"instances", r.rows.size()},
        {"accuracy", stat(r.accuracy)},
        {"objective", stat(r.objective)},
        {"binary_score", stat(r.binary_score)},
        {"iterations", stat(r.iterations)},
        {"accuracy_by_noise", by_noise},
        {"config", r.config},
        {"timing", {{"mean_wall_seconds", summarize(wall).mean}, {"per_instance_wall_seconds", wall}}},
    };
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << text;
}

/// Fresh predictor parameters laid out for the given config.
inline nn::ParamStore predictor_params(const ExperimentConfig& cfg) { return nn::make_predictor_params(cfg.predictor, cfg.param_seed); }

/// Parameters from cfg.checkpoint_path; throws when the path is empty.
inline nn::ParamStore load_predictor(const ExperimentConfig& cfg) {
    if (cfg.checkpoint_path.empty()) throw std::invalid_argument("config: learned affinities require a checkpoint path");
    nn::ParamStore params = predictor_params(cfg);
    nn::load_checkpoint(cfg.checkpoint_path, params);
    return params;
}

/// Runs the configured pipeline on one instance. Wall time covers affinity
/// construction and solving, not dataset generation.
inline InstanceRow run_instance(const Instance& inst, const ExperimentConfig& cfg, const nn::ParamStore* trained) {
    const auto& pair = inst.pair;
    const std::size_t n = pair.g1.size();
    const auto start = std::chrono::steady_clock::now();

    SparseAffinity k;
    AssignmentMatrix soft;
    std::size_t iterations = 0;

    if (cfg.affinity == AffinitySource::learned) {
        nn::ParamStore params = *trained;
        const AAGraph aa = build_aa_graph(pair.g1, pair.g2);
        nn::Tape tape;
        if (cfg.solver == SolverKind::dpgm) {
            auto fwd = nn::forward_instance(tape, aa, params, cfg.predictor, cfg.solver_cfg, cfg.loss, cfg.ablation);
            k = nn::to_affinity(aa, fwd.predictor.decoded);
            soft = nn::to_assignment(aa, fwd.assignment);
            iterations = fwd.solve.iterations;
        } else {
            auto out = nn::predictor_forward(tape, aa, params, cfg.predictor);
            k = nn::to_affinity(aa, out.decoded);
        }
    } else {
        k = assemble_affinity(pair.g1, pair.g2, cfg.affinity_cfg);
        if (cfg.solver == SolverKind::dpgm) {
            if (cfg.ablation == nn::Ablation::wps) {
                soft = uniform_assignment(n, n);
            } else {
                auto res = probabilistic_solve(k, uniform_assignment(n, n), cfg.solver_cfg);
                soft = std::move(res.assignment);
                iterations = res.trace.iterations;
            }
        }
    }

    switch (cfg.solver) {
    case SolverKind::dpgm: break;
    case SolverKind::spectral: soft = AssignmentMatrix(n, n, spectral_match(k, 100)); break;
    case SolverKind::ipfp: soft = AssignmentMatrix(n, n, ipfp(k, uniform_assignment(n, n).vec())); break;
    case SolverKind::rrwm: soft = AssignmentMatrix(n, n, rrwm(k)); break;
    }

    const Permutation pred = discretize(soft);
    InstanceRow row;
    row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    row.instance = inst.index;
    row.seed = pair.meta.seed;
    row.noise_sigma = pair.meta.noise_sigma;
    row.n = n;
    row.accuracy = accuracy(pred, pair.ground_truth);
    row.objective = objective(k, pred);
    row.binary_score = binary_score(sinkhorn(soft, {cfg.solver_cfg.sinkhorn_iters, cfg.solver_cfg.sinkhorn_tol, 1e-12}));
    row.iterations = iterations;
    return row;
}

/// Evaluates every instance (in parallel up to cfg.workers) and assembles the
/// report in instance order.
inline RunReport run_on_instances(const std::vector<Instance>& instances, const ExperimentConfig& cfg, const nn::ParamStore* trained) {
    RunReport report;
    report.config = to_json(cfg);
    report.rows.resize(instances.size());
    if (cfg.workers <= 1) {
        for (std::size_t k = 0; k < instances.size(); ++k) report.rows[k] = run_instance(instances[k], cfg, trained);
    } else {
        for (std::size_t base = 0; base < instances.size(); base += cfg.workers) {
            std::vector<std::future<InstanceRow>> jobs;
            for (std::size_t k = base; k < std::min(instances.size(), base + cfg.workers); ++k)
                jobs.push_back(std::async(std::launch::async, run_instance, std::cref(instances[k]), std::cref(cfg), trained));
            for (std::size_t k = 0; k < jobs.size(); ++k) report.rows[base + k] = jobs[k].get();
        }
    }
    report.aggregate();
    return report;
}

inline void emit(const RunReport& report, const ExperimentConfig& cfg) {
    if (!cfg.rows_path.empty()) write_text(cfg.rows_path, rows_csv(report));
    if (!cfg.summary_path.empty()) write_text(cfg.summary_path, summary_json(report).dump(2) + "\n");
}

/// Generates (or loads) the dataset, runs the selected pipeline and writes the
/// configured outputs.
inline RunReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    std::optional<nn::ParamStore> trained;
    if (cfg.affinity == AffinitySource::learned) trained = load_predictor(cfg);
    const auto instances = generate_instances(cfg.dataset);
    RunReport report = run_on_instances(instances, cfg, trained ? &*trained : nullptr);
    emit(report, cfg);
    return report;
}

struct ComparisonRow {
    SolverKind solver;
    AffinitySource affinity;
    std::map<double, double> accuracy_by_noise;
    double mean_accuracy = 0.0;
};

struct ComparisonTable {
    std::vector<double> noise_levels;
    std::vector<ComparisonRow> rows;
};

/// One row per (solver, affinity source) over the same instances.
inline ComparisonTable compare_solvers(const std::vector<ExperimentConfig>& configs, const std::vector<Instance>& instances) {
    ComparisonTable table;
    std::map<std::string, nn::ParamStore> checkpoints;
    for (const auto& inst : instances) {
        const double s = inst.pair.meta.noise_sigma;
        if (std::find(table.noise_levels.begin(), table.noise_levels.end(), s) == table.noise_levels.end()) table.noise_levels.push_back(s);
    }
    std::sort(table.noise_levels.begin(), table.noise_levels.end());
    for (const auto& cfg : configs) {
        cfg.validate();
        if (cfg.affinity == AffinitySource::learned && cfg.checkpoint_path.empty())
            throw std::invalid_argument("config: learned affinities require a checkpoint path");
    }
    for (const auto& cfg : configs) {
        const nn::ParamStore* trained = nullptr;
        if (cfg.affinity == AffinitySource::learned) {
            auto it = checkpoints.find(cfg.checkpoint_path);
            if (it == checkpoints.end()) it = checkpoints.emplace(cfg.checkpoint_path, load_predictor(cfg)).first;
            trained = &it->second;
        }
        const RunReport r = run_on_instances(instances, cfg, trained);
        table.rows.push_back({cfg.solver, cfg.affinity, r.accuracy_by_noise, r.accuracy.mean});
    }
    return table;
}

inline std::string comparison_csv(const ComparisonTable& t) {
    std::ostringstream os;
    os << "solver,affinity";
    for (double s : t.noise_levels) {
        char label[40];
        std::snprintf(label, sizeof label, "%g", s);
        os << ",acc_sigma_" << label;
    }
    os << ",mean_accuracy\n";
    for (const auto& r : t.rows) {
        os << to_string(r.solver) << ',' << to_string(r.affinity);
        for (double s : t.noise_levels) {
            auto it = r.accuracy_by_noise.find(s);
            os << ',' << format_real(it == r.accuracy_by_noise.end() ? 0.0 : it->second);
        }
        os << ',' << format_real(r.mean_accuracy) << '\n';
    }
    return os.str();
}

/// Offset separating test seeds from training seeds.
inline constexpr std::uint64_t kTestSeedOffset = 1'000'000;

/// Training split: cfg.train_instances per noise level from seeds
/// dataset.seed + k. Test split: cfg.test_instances per noise level from
/// dataset.seed + kTestSeedOffset + k.
inline std::vector<Instance> training_split(const ExperimentConfig& cfg) {
    DatasetSpec d = cfg.dataset;
    d.path.clear();
    d.instances = cfg.train_instances;
    return generate_instances(d);
}

inline std::vector<Instance> test_split(const ExperimentConfig& cfg) {
    DatasetSpec d = cfg.dataset;
    d.path.clear();
    d.instances = cfg.test_instances;
    d.seed += kTestSeedOffset;
    return generate_instances(d);
}

inline std::string curve_csv(const std::vector<nn::EpochMetrics>& curve) {
    std::ostringstream os;
    os << "epoch,mean_loss,train_accuracy\n";
    for (const auto& m : curve) os << m.epoch << ',' << format_real(m.mean_loss) << ',' << format_real(m.train_accuracy) << '\n';
    return os.str();
}

struct TrainReport {
    nn::ParamStore params;
    std::vector<nn::EpochMetrics> curve;
    /// Learned pipeline under cfg.ablation on the test split.
    RunReport test;
};

/// Trains the predictor on the training split, evaluates on the test split and
/// writes the checkpoint, learning curve, rows and summary where configured.
inline TrainReport train_and_eval(const ExperimentConfig& cfg, const std::function<void(const nn::EpochMetrics&)>& on_epoch = {}) {
    cfg.validate();
    if (cfg.train_instances * std::max<std::size_t>(1, cfg.dataset.noise_levels.size()) > kTestSeedOffset)
        throw std::invalid_argument("config: training split would overlap the test seed range");
    std::vector<nn::Sample> data;
    for (const auto& inst : training_split(cfg)) data.push_back(nn::make_sample(inst.pair));

    TrainReport out;
    out.params = predictor_params(cfg);
    nn::TrainOptions opt = cfg.train;
    opt.ablation = cfg.ablation;
    out.curve = nn::train(out.params, data, cfg.predictor, cfg.solver_cfg, cfg.loss, opt, on_epoch);

    ExperimentConfig eval = cfg;
    eval.affinity = AffinitySource::learned;
    out.test = run_on_instances(test_split(cfg), eval, &out.params);
    if (!cfg.checkpoint_path.empty()) nn::save_checkpoint(cfg.checkpoint_path, out.params, {{"config", to_json(cfg)}});
    if (!cfg.curve_path.empty()) write_text(cfg.curve_path, curve_csv(out.curve));
    emit(out.test, cfg);
    return out;
}

} // namespace dpgm::bench
