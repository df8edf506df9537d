#pragma once

#include "dpgm/core/matrix.hpp"
#include "dpgm/core/sparse_affinity.hpp"
#include "dpgm/graphs/aa_graph.hpp"
#include "dpgm/graphs/synthesize.hpp"
#include "dpgm/nn/mlp.hpp"
#include "dpgm/nn/solver_ops.hpp"

#include <cstdint>
#include <memory>
#include <random>
#include <stdexcept>
#include <vector>

namespace dpgm::nn {

/// Hidden-layer widths of the six MLPs.
struct MlpHidden {
    std::vector<std::size_t> rho_v{32};
    std::vector<std::size_t> rho_e{32};
    std::vector<std::size_t> tau{32};
    std::vector<std::size_t> kappa{32};
    std::vector<std::size_t> phi_n{32};
    std::vector<std::size_t> phi_e{32};

    static MlpHidden uniform(std::size_t width) {
        return {{width}, {width}, {width}, {width}, {width}, {width}};
    }
};

struct PredictorConfig {
    /// Latent node width d_V.
    std::size_t node_dim = 32;
    /// Latent edge width d_E.
    std::size_t edge_dim = 32;
    /// AA-updating iterations T; layer weights are shared across iterations.
    std::size_t iterations = 5;
    MlpHidden hidden{};
    std::size_t node_input_dim = 2 * kDescriptorDim;
    std::size_t edge_input_dim = AAGraph::kEdgeDim;

    /// d_V = d_E = width with every MLP using one hidden layer of that width.
    static PredictorConfig with_width(std::size_t width, std::size_t iterations = 5) {
        PredictorConfig c;
        c.node_dim = c.edge_dim = width;
        c.iterations = iterations;
        c.hidden = MlpHidden::uniform(width);
        return c;
    }

    void validate() const {
        if (node_dim < 1 || edge_dim < 1) throw std::invalid_argument("PredictorConfig: latent widths must be >= 1");
        if (iterations < 1) throw std::invalid_argument("PredictorConfig: iterations must be >= 1");
    }

    static std::vector<std::size_t> stack(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
        std::vector<std::size_t> w{in};
        w.insert(w.end(), hidden.begin(), hidden.end());
        w.push_back(out);
        return w;
    }

    Mlp rho_v() const { return {"rho_v", stack(node_input_dim, hidden.rho_v, node_dim)}; }
    Mlp rho_e() const { return {"rho_e", stack(edge_input_dim, hidden.rho_e, edge_dim)}; }
    Mlp tau() const { return {"tau", stack(edge_dim + node_dim, hidden.tau, edge_dim)}; }
    Mlp kappa() const { return {"kappa", stack(edge_dim + node_dim, hidden.kappa, node_dim)}; }
    Mlp phi_n() const { return {"phi_n", stack(node_dim, hidden.phi_n, 1)}; }
    Mlp phi_e() const { return {"phi_e", stack(edge_dim, hidden.phi_e, 1)}; }
};

/// Fresh predictor parameters, uniform fan-in initialization.
inline ParamStore make_predictor_params(const PredictorConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    std::mt19937_64 rng(seed);
    ParamStore store;
    for (const Mlp& m : {cfg.rho_v(), cfg.rho_e(), cfg.tau(), cfg.kappa(), cfg.phi_n(), cfg.phi_e()})
        m.register_params(store, rng);
    init_uniform_fan_in(store.add("M1", cfg.node_dim, cfg.node_dim), cfg.node_dim, rng);
    init_uniform_fan_in(store.add("M2", cfg.node_dim, cfg.node_dim), cfg.node_dim, rng);
    return store;
}

/// Latent AA-graph: one row per candidate match and one row per undirected edge.
struct LatentState {
    Var nodes;
    Var edges;
    std::shared_ptr<const EdgeList> edge_list;
    std::vector<std::size_t> edge_src;
    std::vector<std::size_t> edge_dst;
    std::size_t node_count = 0;
};

inline Mat row_major_block(const std::vector<double>& flat, std::size_t rows, std::size_t cols) {
    if (flat.size() != rows * cols) throw std::invalid_argument("row_major_block: size mismatch");
    return Eigen::Map<const Mat>(flat.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

/// Maps raw AA-graph attributes into the latent spaces with rho_v and rho_e.
inline LatentState encode(Tape& tape, const AAGraph& aa, ParamStore& params, const PredictorConfig& cfg) {
    if (aa.node_dim != cfg.node_input_dim) throw std::invalid_argument("encode: node attribute width mismatch");
    LatentState s;
    s.node_count = aa.node_count();
    s.edge_list = std::make_shared<const EdgeList>(aa.edges);
    for (auto [p, q] : aa.edges) {
        s.edge_src.push_back(p);
        s.edge_dst.push_back(q);
    }
    s.nodes = cfg.rho_v().forward(params, tape.constant(row_major_block(aa.node_attrs, aa.node_count(), aa.node_dim)));
    if (aa.edge_count() > 0)
        s.edges = cfg.rho_e().forward(params, tape.constant(row_major_block(aa.edge_attrs, aa.edge_count(), AAGraph::kEdgeDim)));
    else
        s.edges = tape.constant(Mat::Zero(0, static_cast<Eigen::Index>(cfg.edge_dim)));
    return s;
}

/// Edge update: e <- tau([e; e_bar]) with e_bar the direction-averaged
/// (M1 v_p) * (M2 v_q), so both orientations of an undirected edge agree.
inline Var affinity_update(const LatentState& s, ParamStore& params, const PredictorConfig& cfg) {
    if (s.edge_src.empty()) return s.edges;
    Tape& tape = *s.nodes.tape;
    const Var m1v = matmul(s.nodes, tape.param(params, "M1"));
    const Var m2v = matmul(s.nodes, tape.param(params, "M2"));
    const Var forward = hadamard(gather_rows(m1v, s.edge_src), gather_rows(m2v, s.edge_dst));
    const Var reverse = hadamard(gather_rows(m1v, s.edge_dst), gather_rows(m2v, s.edge_src));
    const Var e_bar = scale(add(forward, reverse), 0.5);
    return cfg.tau().forward(params, concat_cols(s.edges, e_bar));
}

/// Node update: v <- kappa([sum of incident edge attributes; v]).
inline Var assignment_update(const LatentState& s, ParamStore& params, const PredictorConfig& cfg) {
    Tape& tape = *s.nodes.tape;
    Var aggregate = tape.constant(Mat::Zero(static_cast<Eigen::Index>(s.node_count), static_cast<Eigen::Index>(cfg.edge_dim)));
    if (!s.edge_src.empty())
        aggregate = add(scatter_add_rows(s.edges, s.edge_src, s.node_count), scatter_add_rows(s.edges, s.edge_dst, s.node_count));
    return cfg.kappa().forward(params, concat_cols(aggregate, s.nodes));
}

struct Decoded {
    /// Initial assignment probabilities, N x 1 in (0, 1).
    Var assignment;
    /// Pair affinities, E x 1 in (0, 1), one per undirected AA-edge.
    Var affinity;
};

inline Decoded decode(const LatentState& s, ParamStore& params, const PredictorConfig& cfg) {
    Decoded d;
    d.assignment = sigmoid(cfg.phi_n().forward(params, s.nodes));
    if (!s.edge_src.empty())
        d.affinity = sigmoid(cfg.phi_e().forward(params, s.edges));
    else
        d.affinity = s.nodes.tape->constant(Mat::Zero(0, 1));
    return d;
}

struct PredictorOutput {
    Decoded decoded;
    LatentState state;
};

/// Encode, T alternations of affinity and assignment updates, decode.
inline PredictorOutput predictor_forward(Tape& tape, const AAGraph& aa, ParamStore& params, const PredictorConfig& cfg) {
    cfg.validate();
    LatentState s = encode(tape, aa, params, cfg);
    for (std::size_t t = 0; t < cfg.iterations; ++t) {
        s.edges = affinity_update(s, params, cfg);
        s.nodes = assignment_update(s, params, cfg);
    }
    Decoded d = decode(s, params, cfg);
    return {d, std::move(s)};
}

/// Decoded assignment as an n1 x n2 matrix.
inline AssignmentMatrix to_assignment(const AAGraph& aa, const Decoded& d) {
    const Mat& x = d.assignment.value();
    return AssignmentMatrix(aa.n1, aa.n2, std::vector<double>(x.data(), x.data() + x.size()));
}

/// Learned affinity: decoded pair values on the AA-edge pattern, symmetric, with
/// the decoded assignment scores reused as the unary diagonal.
inline SparseAffinity to_affinity(const AAGraph& aa, const Decoded& d) {
    const Mat& x = d.assignment.value();
    const Mat& k = d.affinity.value();
    std::vector<AffinityEntry> pairs;
    pairs.reserve(2 * aa.edge_count());
    for (std::size_t e = 0; e < aa.edge_count(); ++e) {
        const double v = k(static_cast<Eigen::Index>(e), 0);
        pairs.push_back({aa.edges[e].first, aa.edges[e].second, v});
        pairs.push_back({aa.edges[e].second, aa.edges[e].first, v});
    }
    return SparseAffinity(aa.n1, aa.n2, std::vector<double>(x.data(), x.data() + x.size()), std::move(pairs));
}

} // namespace dpgm::nn
