// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Set DPGM_ACCEPT_SKIP_TRAINING=1 to skip the training-dependent criteria.

#include "dpgm/bench/experiment.hpp"
#include "dpgm/graphs/delaunay.hpp"
#include "dpgm/nn/tiny_instance.hpp"
#include "dpgm/solver/discretize.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

using namespace dpgm;
using namespace dpgm::bench;
namespace fs = std::filesystem;

namespace {

int failures = 0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void report(const std::string& name, bool ok, const std::string& detail) {
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

void sinkhorn_invariant() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        DenseMatrix x(8, 8);
        for (double& v : x.values()) v = u(rng);
        worst = std::max(worst, doubly_stochastic_deviation(sinkhorn(x, {1000, 1e-9, 1e-12})));
    }
    const double secs = seconds_since(t0);
    report("sinkhorn_doubly_stochastic", worst <= 1e-6 && secs < 1.0, fmt("max |sum-1| = %.3g (<= 1e-6), %.3f s (< 1 s)", worst, secs));
}

struct OracleCase {
    SparseAffinity k;
    Permutation best;
};

// Exhaustive argmax of x^T K x over permutations; empty if the runner-up is
// within `margin` (relative) of the best.
std::optional<Permutation> unique_argmax(const SparseAffinity& k, std::size_t n, double margin) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = -1.0, second = -1.0;
    Permutation arg;
    do {
        const double v = objective(k, Permutation{perm});
        if (v > best) {
            second = best;
            best = v;
            arg = Permutation{perm};
        } else if (v > second) {
            second = v;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (best <= 0.0 || second > (1.0 - margin) * best) return std::nullopt;
    return arg;
}

void qap_oracle() {
    const auto t0 = Clock::now();
    std::vector<OracleCase> cases;
    std::uint64_t seed = 1;
    while (cases.size() < 200) {
        const std::size_t n = 3 + (seed % 2);
        const double sigma = 0.02 + 0.02 * static_cast<double>(seed % 4);
        auto pair = synthesize_pair(n, sigma, 3.14159, seed);
        ++seed;
        auto k = assemble_affinity(pair.g1, pair.g2);
        if (auto best = unique_argmax(k, n, 0.05)) cases.push_back({std::move(k), *best});
    }
    std::size_t hit_dpgm = 0, hit_spec = 0, hit_ipfp = 0, hit_rrwm = 0;
    for (const auto& c : cases) {
        const std::size_t n = c.k.n1();
        const auto uni = uniform_assignment(n, n);
        hit_dpgm += discretize(probabilistic_solve(c.k, uni).assignment) == c.best;
        hit_spec += discretize(spectral_match(c.k), n, n) == c.best;
        hit_ipfp += discretize(ipfp(c.k, uni.vec()), n, n) == c.best;
        hit_rrwm += discretize(rrwm(c.k), n, n) == c.best;
    }
    const double secs = seconds_since(t0);
    auto rate = [&](std::size_t h) { return static_cast<double>(h) / static_cast<double>(cases.size()); };
    const bool ok = rate(hit_dpgm) >= 0.95 && rate(hit_spec) >= 0.80 && rate(hit_ipfp) >= 0.80 && rate(hit_rrwm) >= 0.80 && secs < 10.0;
    report("qap_bruteforce_oracle", ok,
           fmt("dpgm %.3f (>= 0.95), spectral %.3f, ipfp %.3f, rrwm %.3f (>= 0.80) over %zu instances (%llu drawn), %.2f s (< 10 s)",
               rate(hit_dpgm), rate(hit_spec), rate(hit_ipfp), rate(hit_rrwm), cases.size(), static_cast<unsigned long long>(seed - 1), secs));
}

void binary_score_convergence() {
    const auto t0 = Clock::now();
    SolverConfig cfg;
    cfg.max_iters = 10;
    cfg.stop_eta = 1e-5;
    std::size_t high_final = 0, steps = 0, nondecreasing = 0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        const auto pair = synthesize_pair(10, 0.02, 0.2, 500 + s);
        const auto k = assemble_affinity(pair.g1, pair.g2);
        const auto trace = probabilistic_solve(k, uniform_assignment(10, 10), cfg).trace;
        const auto& b = trace.binary_scores;
        high_final += b.back() >= 0.95;
        for (std::size_t t = 1; t < b.size(); ++t, ++steps) nondecreasing += b[t] >= b[t - 1];
    }
    const double secs = seconds_since(t0);
    const double frac_final = static_cast<double>(high_final) / 50.0;
    const double frac_mono = static_cast<double>(nondecreasing) / static_cast<double>(steps);
    report("binary_score_convergence", frac_final >= 0.90 && frac_mono >= 0.90 && secs < 5.0,
           fmt("final >= 0.95 on %.2f of pairs (>= 0.90), non-decreasing on %.3f of %zu steps (>= 0.90), %.2f s (< 5 s)", frac_final, frac_mono,
               steps, secs));
}

void gradient_fidelity() {
    const auto t0 = Clock::now();
    nn::TinyInstance tiny;
    const auto r = tiny.check(1e-5);
    const double secs = seconds_since(t0);
    report("gradient_fidelity", r.max_relative_error < 1e-4 && secs < 30.0,
           fmt("max relative error %.3g (< 1e-4) over %zu scalars, worst %s[%zu], %.2f s (< 30 s)", r.max_relative_error, r.checked,
               r.worst_parameter.c_str(), r.worst_index, secs));
}

ExperimentConfig training_config() {
    ExperimentConfig cfg;
    cfg.dataset.n = 8;
    cfg.dataset.noise_levels = {0.03};
    cfg.dataset.seed = 1;
    cfg.train_instances = 500;
    cfg.test_instances = 100;
    cfg.predictor = nn::PredictorConfig::with_width(32, 5);
    cfg.train.epochs = 50;
    cfg.train.batch_size = 8;
    cfg.train.workers = 1;
    cfg.affinity = AffinitySource::learned;
    return cfg;
}

void learned_criteria() {
    const auto cfg = training_config();
    const auto t0 = Clock::now();
    const auto trained = train_and_eval(cfg, [](const nn::EpochMetrics& m) {
        std::fprintf(stderr, "epoch %zu loss %.4f train_acc %.4f\n", m.epoch, m.mean_loss, m.train_accuracy);
    });
    const double secs = seconds_since(t0);
    const auto test = test_split(cfg);
    const auto untrained_params = predictor_params(cfg);
    const double untrained = run_on_instances(test, cfg, &untrained_params).accuracy.mean;
    const double full = trained.test.accuracy.mean;
    report("end_to_end_learning", full >= 0.90 && secs < 900.0,
           fmt("test accuracy %.4f (>= 0.90), untrained %.4f, train+eval %.1f s (< 900 s)", full, untrained, secs));

    auto with_ablation = [&](nn::Ablation a) {
        ExperimentConfig c = cfg;
        c.ablation = a;
        return run_on_instances(test, c, &trained.params).accuracy.mean;
    };
    const double tia = with_ablation(nn::Ablation::tia), wps = with_ablation(nn::Ablation::wps);
    report("ablation_ordering", full >= tia && full >= wps, fmt("full %.4f >= tia %.4f and wps %.4f", full, tia, wps));

    const fs::path ckpt = fs::temp_directory_path() / "dpgm_acceptance_ckpt.json";
    nn::save_checkpoint(ckpt.string(), trained.params);
    std::vector<ExperimentConfig> configs;
    for (auto s : {SolverKind::dpgm, SolverKind::spectral, SolverKind::ipfp, SolverKind::rrwm}) {
        ExperimentConfig c = cfg;
        c.solver = s;
        c.checkpoint_path = ckpt.string();
        configs.push_back(c);
    }
    const auto table = compare_solvers(configs, test);
    fs::remove(ckpt);
    const double dp = table.rows[0].mean_accuracy;
    bool ok = true;
    std::string detail = fmt("dpgm %.4f vs", dp);
    for (std::size_t r = 1; r < table.rows.size(); ++r) {
        ok = ok && dp >= table.rows[r].mean_accuracy;
        detail += fmt(" %s %.4f", to_string(table.rows[r].solver).c_str(), table.rows[r].mean_accuracy);
    }
    report("learned_solver_comparison", ok, detail);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void cli_determinism() {
    const fs::path dir = fs::temp_directory_path() / "dpgm_acceptance_cli";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto path = [&](const std::string& f) { return (dir / f).string(); };
    auto run = [&](const std::string& args, const std::string& out) {
        const std::string cmd = std::string(DPGM_CLI_PATH) + " " + args + " > " + path(out) + " 2> /dev/null";
        return std::system(cmd.c_str());
    };
    const std::string data = "--n 6 --instances 3 --noise 0.02 0.05 --seed 11 ";
    const std::string tiny_model = "--width 8 --predictor-iterations 2 --train-instances 8 --test-instances 3 --epochs 2 ";
    // Each subcommand maps a run tag to its arguments and the file compared
    // across runs; stdout always goes to <name>_<tag>.out.
    struct Sub {
        std::string name;
        std::function<std::string(const std::string&)> args;
        std::function<std::string(const std::string&)> output;
    };
    auto stdout_of = [&](const std::string& name) { return [&, name](const std::string& t) { return path(name + "_" + t + ".out"); }; };
    const std::vector<Sub> subs{
        {"gen", [&](const std::string& t) { return data + "gen --out " + path("gen_" + t); }, [&](const std::string& t) { return path("gen_" + t); }},
        {"solve", [&](const std::string& t) { return "--dataset " + path("fixed.json") + " solve --instance 2 --trace " + path("solve_" + t); },
         [&](const std::string& t) { return path("solve_" + t); }},
        {"bench", [&](const std::string& t) { return data + "--rows " + path("bench_" + t) + " bench"; }, [&](const std::string& t) { return path("bench_" + t); }},
        {"train", [&](const std::string& t) { return data + tiny_model + "--rows " + path("train_" + t) + " --checkpoint " + path("ckpt_" + t) + " train"; },
         [&](const std::string& t) { return path("train_" + t); }},
        {"compare",
         [&](const std::string&) { return data + tiny_model + "--checkpoint " + path("ckpt_a") + " compare --solvers dpgm rrwm --affinities handcrafted learned"; },
         stdout_of("compare")},
        {"gradcheck", [&](const std::string&) { return std::string("gradcheck"); }, stdout_of("gradcheck")},
    };
    run(data + "gen --out " + path("fixed.json"), "setup.out");
    for (const auto& sub : subs) {
        const int ra = run(sub.args("a"), sub.name + "_a.out"), rb = run(sub.args("b"), sub.name + "_b.out");
        const std::string fa = slurp(sub.output("a")), fb = slurp(sub.output("b"));
        const bool ok = ra == 0 && rb == 0 && !fa.empty() && fa == fb;
        report("cli_determinism_" + sub.name, ok, fmt("exit %d/%d, %zu bytes, identical=%s", ra, rb, fa.size(), fa == fb ? "yes" : "no"));
    }
    fs::remove_all(dir);
}

void scale_smoke() {
    const auto pair = synthesize_pair(50, 0.02, 0.2, 99);
    const auto t0 = Clock::now();
    const auto k = assemble_affinity(pair.g1, pair.g2);
    const auto r = probabilistic_solve(k, uniform_assignment(50, 50));
    const double acc = accuracy(discretize(r.assignment), pair.ground_truth);
    const double secs = seconds_since(t0);
    report("scale_n50", secs < 1.0, fmt("N = 2500, %zu nonzero pairs, affinity + solve %.3f s (< 1 s), accuracy %.3f", k.pairs().size(), secs, acc));
}

} // namespace

int main() {
    sinkhorn_invariant();
    qap_oracle();
    binary_score_convergence();
    gradient_fidelity();
    scale_smoke();
    cli_determinism();
    const char* skip = std::getenv("DPGM_ACCEPT_SKIP_TRAINING");
    if (skip && std::string(skip) == "1")
        std::printf("SKIP end_to_end_learning, ablation_ordering, learned_solver_comparison\n");
    else
        learned_criteria();
    std::printf("%d failure(s)\n", failures);
    return failures == 0 ? 0 : 1;
}
