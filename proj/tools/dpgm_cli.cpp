#include "dpgm/bench/experiment.hpp"
#include "dpgm/nn/tiny_instance.hpp"
#include "dpgm/solver/trace_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

using namespace dpgm;
using namespace dpgm::bench;

namespace {

struct Flags {
    ExperimentConfig cfg;
    std::string solver = "dpgm";
    std::string affinity = "handcrafted";
    std::string ablation = "full";
    std::size_t width = 32;
    std::size_t predictor_iterations = 5;
    bool no_refine = false;

    ExperimentConfig resolve() const {
        ExperimentConfig c = cfg;
        c.solver = parse_solver(solver);
        c.affinity = parse_affinity_source(affinity);
        c.ablation = nn::parse_ablation(ablation);
        c.predictor = nn::PredictorConfig::with_width(width, predictor_iterations);
        c.solver_cfg.refine_affinity = !no_refine;
        c.train.workers = c.workers;
        c.validate();
        return c;
    }
};

void add_experiment_flags(CLI::App& app, Flags& f) {
    auto& c = f.cfg;
    app.add_option("--n", c.dataset.n, "Nodes per graph")->capture_default_str();
    app.add_option("--noise", c.dataset.noise_levels, "Keypoint noise levels (sigma)")->capture_default_str();
    app.add_option("--instances", c.dataset.instances, "Instances per noise level")->capture_default_str();
    app.add_option("--seed", c.dataset.seed, "Dataset seed")->capture_default_str();
    app.add_option("--rotation-max", c.dataset.rotation_max, "Maximum rotation (radians)")->capture_default_str();
    app.add_option("--translation-max", c.dataset.translation_max, "Maximum translation per axis")->capture_default_str();
    app.add_option("--outliers", c.dataset.outliers, "Outlier points added to each graph")->capture_default_str();
    app.add_option("--dataset", c.dataset.path, "Read pairs from a dataset file instead of generating them");

    app.add_option("--solver", f.solver, "dpgm, spectral, ipfp or rrwm")->capture_default_str();
    app.add_option("--affinity", f.affinity, "handcrafted or learned")->capture_default_str();
    app.add_option("--ablation", f.ablation, "full, tia or wps")->capture_default_str();

    app.add_option("--max-iters", c.solver_cfg.max_iters, "Solver iterations S")->capture_default_str();
    app.add_option("--stop-eta", c.solver_cfg.stop_eta, "Early-stop threshold on the squared step")->capture_default_str();
    app.add_option("--sinkhorn-iters", c.solver_cfg.sinkhorn_iters)->capture_default_str();
    app.add_option("--sinkhorn-tol", c.solver_cfg.sinkhorn_tol)->capture_default_str();
    app.add_flag("--no-refine", f.no_refine, "Keep the affinity fixed across solver iterations");

    app.add_option("--sigma-len", c.affinity_cfg.sigma_len)->capture_default_str();
    app.add_option("--sigma-ang", c.affinity_cfg.sigma_ang)->capture_default_str();
    app.add_option("--unary-weight", c.affinity_cfg.unary_weight)->capture_default_str();

    app.add_option("--width", f.width, "Latent widths d_V = d_E and MLP hidden width")->capture_default_str();
    app.add_option("--predictor-iterations", f.predictor_iterations, "AA-updating iterations T")->capture_default_str();
    app.add_option("--positive-weight", c.loss.positive_weight, "Cross-entropy weight on positive entries")->capture_default_str();
    app.add_option("--epochs", c.train.epochs)->capture_default_str();
    app.add_option("--batch", c.train.batch_size)->capture_default_str();
    app.add_option("--lr", c.train.adam.learning_rate)->capture_default_str();
    app.add_option("--train-seed", c.train.seed, "Seed for batch shuffling")->capture_default_str();
    app.add_option("--train-instances", c.train_instances, "Training pairs per noise level")->capture_default_str();
    app.add_option("--test-instances", c.test_instances, "Test pairs per noise level")->capture_default_str();
    app.add_option("--param-seed", c.param_seed, "Seed for predictor initialization")->capture_default_str();

    app.add_option("--checkpoint", c.checkpoint_path, "Predictor checkpoint (written by train, read for learned affinities)");
    app.add_option("--rows", c.rows_path, "Per-instance rows (CSV)");
    app.add_option("--summary", c.summary_path, "Aggregate summary (JSON)");
    app.add_option("--curve", c.curve_path, "Learning curve (CSV)");
    app.add_option("--workers", c.workers, "Instances evaluated concurrently")->capture_default_str();
}

void print_summary(const RunReport& r) {
    std::printf("instances %zu  accuracy %.4f +- %.4f  binary score %.4f  iterations %.2f\n", r.rows.size(), r.accuracy.mean,
                r.accuracy.std, r.binary_score.mean, r.iterations.mean);
    for (const auto& [sigma, acc] : r.accuracy_by_noise) std::printf("  sigma %-8g accuracy %.4f\n", sigma, acc);
}

void output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-")
        std::cout << text;
    else
        write_text(path, text);
}

nlohmann::json solve_one(const ExperimentConfig& cfg, std::size_t index) {
    const auto instances = generate_instances(cfg.dataset);
    if (index >= instances.size()) throw std::invalid_argument("solve: instance index out of range");
    const Instance& inst = instances[index];
    const GraphPair& pair = inst.pair;
    const std::size_t n = pair.g1.size();

    SparseAffinity k;
    AssignmentMatrix x_init = uniform_assignment(n, n);
    std::optional<AssignmentMatrix> predicted;
    if (cfg.affinity == AffinitySource::learned) {
        nn::ParamStore params = load_predictor(cfg);
        const AAGraph aa = build_aa_graph(pair.g1, pair.g2);
        nn::Tape tape;
        auto out = nn::predictor_forward(tape, aa, params, cfg.predictor);
        k = nn::to_affinity(aa, out.decoded);
        predicted = nn::to_assignment(aa, out.decoded);
        if (cfg.ablation == nn::Ablation::full) x_init = *predicted;
    } else {
        k = assemble_affinity(pair.g1, pair.g2, cfg.affinity_cfg);
    }

    nlohmann::json j;
    AssignmentMatrix soft;
    if (cfg.solver == SolverKind::dpgm && cfg.ablation == nn::Ablation::wps) {
        soft = predicted ? *predicted : x_init;
    } else if (cfg.solver == SolverKind::dpgm) {
        auto res = probabilistic_solve(k, x_init, cfg.solver_cfg);
        j["trace"] = to_json(res.trace);
        soft = std::move(res.assignment);
    } else if (cfg.solver == SolverKind::spectral) {
        soft = AssignmentMatrix(n, n, spectral_match(k));
    } else if (cfg.solver == SolverKind::ipfp) {
        soft = AssignmentMatrix(n, n, ipfp(k, uniform_assignment(n, n).vec()));
    } else {
        soft = AssignmentMatrix(n, n, rrwm(k));
    }
    const Permutation pred = discretize(soft);
    j["schema"] = "dpgm.solve";
    j["version"] = kVersion;
    j["instance"] = inst.index;
    j["seed"] = pair.meta.seed;
    j["solver"] = to_string(cfg.solver);
    j["affinity"] = to_string(cfg.affinity);
    j["ablation"] = nn::to_string(cfg.ablation);
    j["prediction"] = pred.mapping;
    j["ground_truth"] = pair.ground_truth.mapping;
    j["accuracy"] = accuracy(pred, pair.ground_truth);
    j["objective"] = objective(k, pred);
    return j;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Differentiable probabilistic graph matching: data generation, solvers, training and benchmarks"};
    app.set_version_flag("--version", kVersion);
    app.set_config("--config", "", "TOML file supplying any of the flags; flags given on the command line win");
    app.fallthrough();
    app.require_subcommand(1);
    Flags flags;
    add_experiment_flags(app, flags);

    auto* gen = app.add_subcommand("gen", "Generate a dataset file");
    std::string gen_out;
    gen->add_option("--out", gen_out, "Dataset file to write")->required();

    auto* solve = app.add_subcommand("solve", "Solve one instance and dump the solver trace");
    std::size_t solve_index = 0;
    std::string trace_path;
    solve->add_option("--instance", solve_index, "Instance index within the dataset")->capture_default_str();
    solve->add_option("--trace", trace_path, "Where to write the trace JSON (default stdout)");

    auto* bench = app.add_subcommand("bench", "Run one solver / affinity / ablation over a dataset");
    auto* train = app.add_subcommand("train", "Train the predictor and evaluate it on a held-out split");

    auto* compare = app.add_subcommand("compare", "Accuracy table over solvers and affinity sources");
    std::vector<std::string> solvers{"dpgm", "spectral", "ipfp", "rrwm"};
    std::vector<std::string> affinities{"handcrafted"};
    std::string table_path;
    compare->add_option("--solvers", solvers)->delimiter(',')->capture_default_str();
    compare->add_option("--affinities", affinities)->delimiter(',')->capture_default_str();
    compare->add_option("--table", table_path, "Where to write the table CSV (default stdout)");

    auto* gradcheck = app.add_subcommand("gradcheck", "Compare backward gradients with central differences on a tiny instance");
    double gc_step = 1e-5;
    std::uint64_t gc_seed = 1;
    gradcheck->add_option("--step", gc_step)->capture_default_str();
    gradcheck->add_option("--instance-seed", gc_seed)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        const ExperimentConfig cfg = flags.resolve();
        if (gen->parsed()) {
            std::vector<GraphPair> pairs;
            for (auto& inst : generate_instances(cfg.dataset)) pairs.push_back(std::move(inst.pair));
            save_dataset(gen_out, pairs);
            std::printf("wrote %zu pairs to %s\n", pairs.size(), gen_out.c_str());
        } else if (solve->parsed()) {
            output(trace_path, solve_one(cfg, solve_index).dump(2) + "\n");
        } else if (bench->parsed()) {
            const RunReport r = run_experiment(cfg);
            print_summary(r);
        } else if (train->parsed()) {
            const auto out = train_and_eval(cfg, [](const nn::EpochMetrics& m) {
                std::fprintf(stderr, "epoch %3zu  loss %.5f  train accuracy %.4f\n", m.epoch, m.mean_loss, m.train_accuracy);
            });
            print_summary(out.test);
        } else if (compare->parsed()) {
            std::vector<ExperimentConfig> set;
            for (const auto& a : affinities)
                for (const auto& s : solvers) {
                    ExperimentConfig c = cfg;
                    c.affinity = parse_affinity_source(a);
                    c.solver = parse_solver(s);
                    set.push_back(c);
                }
            output(table_path, comparison_csv(compare_solvers(set, generate_instances(cfg.dataset))));
        } else if (gradcheck->parsed()) {
            nn::TinyInstance tiny(gc_seed, cfg.ablation);
            const auto r = tiny.check(gc_step);
            const nlohmann::json j{{"max_relative_error", r.max_relative_error}, {"worst_parameter", r.worst_parameter},
                                   {"worst_index", r.worst_index}, {"analytic", r.analytic}, {"numeric", r.numeric},
                                   {"checked", r.checked}, {"ablation", nn::to_string(cfg.ablation)}, {"step", gc_step}};
            std::cout << j.dump(2) << '\n';
            return r.max_relative_error < 1e-4 ? 0 : 2;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
