#pragma once

#include "dpgm/core/sparse_affinity.hpp"
#include "dpgm/graphs/aa_graph.hpp"
#include "dpgm/graphs/attributed_graph.hpp"

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>

namespace dpgm {

struct AffinityConfig {
    double sigma_len = 0.1;
    double sigma_ang = 0.5;
    double unary_weight = 0.5;

    void validate() const {
        if (!(sigma_len > 0.0) || !(sigma_ang > 0.0)) throw std::invalid_argument("AffinityConfig: bandwidths must be positive");
        if (unary_weight < 0.0 || unary_weight > 1.0) throw std::invalid_argument("AffinityConfig: unary_weight must lie in [0, 1]");
    }
};

/// Undirected orientation of segment a-b in [0, pi).
inline double segment_orientation(Point2 a, Point2 b) {
    double t = std::atan2(b.y - a.y, b.x - a.x);
    if (t < 0.0) t += std::numbers::pi;
    if (t >= std::numbers::pi) t -= std::numbers::pi;
    return t;
}

/// Smallest difference between two undirected orientations, in [0, pi/2].
inline double orientation_gap(double t1, double t2) {
    double d = std::fmod(std::abs(t1 - t2), std::numbers::pi);
    return std::min(d, std::numbers::pi - d);
}

/// Geometric agreement of edge (u1, v1) in graph 1 with edge (u2, v2) in graph 2.
inline double edge_agreement(Point2 u1, Point2 v1, Point2 u2, Point2 v2, const AffinityConfig& cfg) {
    const double dlen = std::abs(distance(u1, v1) - distance(u2, v2));
    const double dang = orientation_gap(segment_orientation(u1, v1), segment_orientation(u2, v2));
    return std::exp(-(dlen * dlen) / (cfg.sigma_len * cfg.sigma_len)) *
           std::exp(-(dang * dang) / (cfg.sigma_ang * cfg.sigma_ang));
}

/// Handcrafted affinity: descriptor similarity on the diagonal, Gaussian
/// length/orientation agreement on joint edges, zero elsewhere.
inline SparseAffinity assemble_affinity(const AttributedGraph& g1, const AttributedGraph& g2, const AffinityConfig& cfg = {}) {
    cfg.validate();
    g1.validate();
    g2.validate();
    if (g1.size() == 0 || g2.size() == 0) throw std::invalid_argument("assemble_affinity: empty graph");
    if (g1.feature_dim() != g2.feature_dim()) throw std::invalid_argument("assemble_affinity: feature dimensions differ");

    const std::size_t n1 = g1.size(), n2 = g2.size();
    std::vector<double> unary(n1 * n2);
    for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t a = 0; a < n2; ++a)
            unary[match_index(i, a, n2)] = cfg.unary_weight * std::exp(-0.5 * squared_distance(g1.features[i], g2.features[a]));

    std::vector<AffinityEntry> pairs;
    for (const auto& e : joint_edges(g1, g2)) {
        const double d = edge_agreement(g1.points[e.i], g1.points[e.j], g2.points[e.a], g2.points[e.b], cfg);
        pairs.push_back({e.p, e.q, d});
        pairs.push_back({e.q, e.p, d});
    }
    return SparseAffinity(n1, n2, std::move(unary), std::move(pairs));
}

/// Quadratic assignment objective x^T K x.
inline double objective(const SparseAffinity& k, std::span<const double> x) {
    const auto y = spmv(k, x);
    return dot(x, y);
}

inline double objective(const SparseAffinity& k, const Permutation& perm) {
    return objective(k, perm.to_matrix(k.n2()).vec());
}

} // namespace dpgm
