#pragma once

#include "dpgm/graphs/attributed_graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace dpgm {

/// A pair of graph edges (i, j) in graph 1 and (a, b) in graph 2 seen as the
/// association-graph edge between candidate matches p = (i, a) and q = (j, b).
struct JointEdge {
    std::size_t i, j, a, b;
    std::size_t p, q;
};

/// Every joint edge with p < q, sorted by (p, q). Each undirected edge pair
/// {i, j} x {a, b} contributes (ia, jb) and (ib, ja).
inline std::vector<JointEdge> joint_edges(const AttributedGraph& g1, const AttributedGraph& g2) {
    const std::size_t n2 = g2.size();
    const auto e1 = g1.adjacency.edges();
    const auto e2 = g2.adjacency.edges();
    std::vector<JointEdge> out;
    out.reserve(2 * e1.size() * e2.size());
    for (auto [i, j] : e1) {
        for (auto [a, b] : e2) {
            // i < j, so the graph-1 endpoint i always owns the smaller match index
            out.push_back({i, j, a, b, match_index(i, a, n2), match_index(j, b, n2)});
            out.push_back({i, j, b, a, match_index(i, b, n2), match_index(j, a, n2)});
        }
    }
    std::sort(out.begin(), out.end(),
              [](const JointEdge& x, const JointEdge& y) { return std::tie(x.p, x.q) < std::tie(y.p, y.q); });
    return out;
}

/// Association graph over candidate matches.
struct AAGraph {
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    std::size_t node_dim = 0;
    /// Row-major (n1*n2) x node_dim; row p holds [f_i; f_a].
    std::vector<double> node_attrs;
    /// Undirected edges (p, q) with p < q.
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    /// Row-major edges.size() x kEdgeDim; row holds [p_i; p_j; p_a; p_b].
    std::vector<double> edge_attrs;

    static constexpr std::size_t kEdgeDim = 8;

    std::size_t node_count() const { return n1 * n2; }
    std::size_t edge_count() const { return edges.size(); }
};

inline AAGraph build_aa_graph(const AttributedGraph& g1, const AttributedGraph& g2) {
    g1.validate();
    g2.validate();
    if (g1.feature_dim() != g2.feature_dim())
        throw std::invalid_argument("build_aa_graph: feature dimensions differ between graphs");

    AAGraph aa;
    aa.n1 = g1.size();
    aa.n2 = g2.size();
    const std::size_t df = g1.feature_dim();
    aa.node_dim = 2 * df;
    aa.node_attrs.reserve(aa.node_count() * aa.node_dim);
    for (std::size_t i = 0; i < aa.n1; ++i) {
        for (std::size_t a = 0; a < aa.n2; ++a) {
            aa.node_attrs.insert(aa.node_attrs.end(), g1.features[i].begin(), g1.features[i].end());
            aa.node_attrs.insert(aa.node_attrs.end(), g2.features[a].begin(), g2.features[a].end());
        }
    }

    const auto joint = joint_edges(g1, g2);
    aa.edges.reserve(joint.size());
    aa.edge_attrs.reserve(joint.size() * AAGraph::kEdgeDim);
    for (const auto& e : joint) {
        aa.edges.emplace_back(e.p, e.q);
        for (Point2 pt : {g1.points[e.i], g1.points[e.j], g2.points[e.a], g2.points[e.b]}) {
            aa.edge_attrs.push_back(pt.x);
            aa.edge_attrs.push_back(pt.y);
        }
    }
    return aa;
}

} // namespace dpgm
