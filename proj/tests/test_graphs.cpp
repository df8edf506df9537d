#include "dpgm/graphs/aa_graph.hpp"
#include "dpgm/graphs/delaunay.hpp"
#include "dpgm/graphs/serialization.hpp"
#include "dpgm/graphs/synthesize.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <set>

using namespace dpgm;

namespace {

using EdgeSet = std::set<std::pair<std::size_t, std::size_t>>;

EdgeSet edge_set(const Adjacency& a) {
    const auto e = a.edges();
    return {e.begin(), e.end()};
}

// Brute-force Delaunay graph: a triangle belongs to the triangulation when its
// circumcircle holds no other point. Valid for points in general position.
EdgeSet brute_force_delaunay(const std::vector<Point2>& pts) {
    EdgeSet out;
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            for (std::size_t k = j + 1; k < n; ++k) {
                const auto [ax, ay] = pts[i];
                const auto [bx, by] = pts[j];
                const auto [cx, cy] = pts[k];
                const double d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
                if (std::abs(d) < 1e-14) continue;
                const double a2 = ax * ax + ay * ay, b2 = bx * bx + by * by, c2 = cx * cx + cy * cy;
                const double ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d;
                const double uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d;
                const double r2 = (ax - ux) * (ax - ux) + (ay - uy) * (ay - uy);
                bool empty = true;
                for (std::size_t m = 0; m < n && empty; ++m) {
                    if (m == i || m == j || m == k) continue;
                    const double dx = pts[m].x - ux, dy = pts[m].y - uy;
                    if (dx * dx + dy * dy < r2) empty = false;
                }
                if (empty) out.insert({i, j}), out.insert({i, k}), out.insert({j, k});
            }
    return out;
}

AttributedGraph tiny_graph(std::vector<Point2> pts, std::vector<std::pair<std::size_t, std::size_t>> edges, std::size_t dim = 2) {
    AttributedGraph g;
    const std::size_t n = pts.size();
    g.points = std::move(pts);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> f(dim);
        for (std::size_t d = 0; d < dim; ++d) f[d] = 10.0 * static_cast<double>(i) + static_cast<double>(d);
        g.features.push_back(f);
    }
    g.adjacency = Adjacency::from_edges(n, edges);
    return g;
}

} // namespace

TEST(Delaunay, TriangleIsComplete) {
    const std::vector<Point2> pts{{0, 0}, {1, 0}, {0.3, 0.8}};
    const auto r = delaunay_adjacency(pts);
    EXPECT_FALSE(r.fallback);
    EXPECT_EQ(r.adjacency, Adjacency::complete(3));
}

TEST(Delaunay, SquareHasHullPlusOneDiagonal) {
    const std::vector<Point2> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    const auto r = delaunay_adjacency(pts);
    EXPECT_FALSE(r.fallback);
    EXPECT_EQ(r.adjacency.edge_count(), 5u);
    for (auto [i, j] : std::vector<std::pair<int, int>>{{0, 1}, {1, 2}, {2, 3}, {0, 3}}) EXPECT_TRUE(r.adjacency(i, j));
    EXPECT_NE(r.adjacency(0, 2), r.adjacency(1, 3));
}

TEST(Delaunay, CollinearFallsBack) {
    const std::vector<Point2> pts{{0, 0}, {0.5, 0.5}, {1, 1}};
    const auto r = delaunay_adjacency(pts);
    EXPECT_TRUE(r.fallback);
    EXPECT_EQ(r.adjacency, Adjacency::complete(3));
}

TEST(Delaunay, TooFewPointsFallBack) {
    const std::vector<Point2> pts{{0, 0}, {1, 0}};
    const auto r = delaunay_adjacency(pts);
    EXPECT_TRUE(r.fallback);
    EXPECT_EQ(r.adjacency.edge_count(), 1u);
}

TEST(Delaunay, MatchesEmptyCircumcircleOracle) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t n : {4, 5, 8, 12, 20, 30}) {
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<Point2> pts(n);
            for (auto& p : pts) p = {u(rng), u(rng)};
            const auto r = delaunay_adjacency(pts);
            ASSERT_FALSE(r.fallback);
            EXPECT_TRUE(r.adjacency.connected());
            EXPECT_EQ(edge_set(r.adjacency), brute_force_delaunay(pts)) << "n=" << n << " trial=" << trial;
        }
    }
}

TEST(Synthesize, IdentityTransformCopiesPoints) {
    SynthesisOptions opt;
    opt.translation_max = 0.0;
    opt.shuffle = false;
    const auto pair = synthesize_pair(9, 0.0, 0.0, 42, opt);
    EXPECT_EQ(pair.g1.points, pair.g2.points);
    EXPECT_EQ(pair.ground_truth, Permutation::identity(9));
    EXPECT_EQ(pair.g1.adjacency, pair.g2.adjacency);
    EXPECT_EQ(pair.g1.features, pair.g2.features);
}

TEST(Synthesize, DeterministicInSeed) {
    const auto a = synthesize_pair(12, 0.03, 0.5, 99);
    const auto b = synthesize_pair(12, 0.03, 0.5, 99);
    EXPECT_EQ(a, b);
    const auto c = synthesize_pair(12, 0.03, 0.5, 100);
    EXPECT_NE(a.g1.points, c.g1.points);
}

TEST(Synthesize, ValidGroundTruthAndShapes) {
    const auto pair = synthesize_pair(10, 0.02, 0.2, 7);
    EXPECT_TRUE(pair.ground_truth.valid(10));
    EXPECT_EQ(pair.g1.size(), 10u);
    EXPECT_EQ(pair.g2.size(), 10u);
    EXPECT_EQ(pair.g1.feature_dim(), kDescriptorDim);
    EXPECT_NO_THROW(pair.g1.validate());
    EXPECT_TRUE(pair.g1.adjacency.connected());
    EXPECT_TRUE(pair.g2.adjacency.connected());
}

TEST(Synthesize, ZeroNoiseRecoveredByRigidTransform) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto pair = synthesize_pair(12, 0.0, 0.8, seed);
        const double c = std::cos(pair.meta.rotation), s = std::sin(pair.meta.rotation);
        for (std::size_t i = 0; i < 12; ++i) {
            const double x = pair.g1.points[i].x - 0.5, y = pair.g1.points[i].y - 0.5;
            const Point2 mapped{c * x - s * y + 0.5 + pair.meta.translation.x, s * x + c * y + 0.5 + pair.meta.translation.y};
            std::size_t nearest = 0;
            for (std::size_t a = 1; a < 12; ++a)
                if (distance(mapped, pair.g2.points[a]) < distance(mapped, pair.g2.points[nearest])) nearest = a;
            EXPECT_EQ(nearest, pair.ground_truth.mapping[i]);
        }
    }
}

TEST(Synthesize, OutliersExtendBothGraphs) {
    SynthesisOptions opt;
    opt.outliers = 3;
    const auto pair = synthesize_pair(6, 0.01, 0.1, 5, opt);
    EXPECT_EQ(pair.g1.size(), 9u);
    EXPECT_EQ(pair.g2.size(), 9u);
    EXPECT_TRUE(pair.ground_truth.valid(9));
}

TEST(Synthesize, RejectsTooFewNodes) { EXPECT_THROW(synthesize_pair(2, 0.0, 0.0, 1), std::invalid_argument); }

TEST(Descriptors, InvariantToRigidMotionAndScale) {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Point2> pts(15);
    for (auto& p : pts) p = {u(rng), u(rng)};
    const double c = std::cos(1.1), s = std::sin(1.1);
    std::vector<Point2> moved;
    for (auto p : pts) moved.push_back({2.5 * (c * p.x - s * p.y) + 3.0, 2.5 * (s * p.x + c * p.y) - 1.0});
    const auto a = make_keypoint_graph(pts);
    const auto b = make_keypoint_graph(moved);
    ASSERT_EQ(a.adjacency, b.adjacency);
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t d = 0; d < kDescriptorDim; ++d) EXPECT_NEAR(a.features[i][d], b.features[i][d], 1e-9);
}

TEST(AAGraph, CompleteTrianglesGiveEighteenEdges) {
    const auto g = tiny_graph({{0, 0}, {1, 0}, {0, 1}}, {{0, 1}, {0, 2}, {1, 2}});
    const auto aa = build_aa_graph(g, g);
    EXPECT_EQ(aa.node_count(), 9u);
    EXPECT_EQ(aa.edge_count(), 18u);
}

TEST(AAGraph, NoEdgesInGraphOne) {
    const auto g1 = tiny_graph({{0, 0}, {1, 0}, {0, 1}}, {});
    const auto g2 = tiny_graph({{0, 0}, {1, 0}, {0, 1}}, {{0, 1}, {1, 2}});
    EXPECT_EQ(build_aa_graph(g1, g2).edge_count(), 0u);
}

TEST(AAGraph, SingleEdgePair) {
    const auto g1 = tiny_graph({{0, 0}, {1, 0}}, {{0, 1}});
    const auto g2 = tiny_graph({{0, 2}, {3, 0}}, {{0, 1}});
    const auto aa = build_aa_graph(g1, g2);
    // (1a, 2b) -> (0, 3); (1b, 2a) -> (1, 2)
    ASSERT_EQ(aa.edges, (std::vector<std::pair<std::size_t, std::size_t>>{{0, 3}, {1, 2}}));
    EXPECT_EQ(std::vector<double>(aa.edge_attrs.begin(), aa.edge_attrs.begin() + 8), (std::vector<double>{0, 0, 1, 0, 0, 2, 3, 0}));
    EXPECT_EQ(std::vector<double>(aa.edge_attrs.begin() + 8, aa.edge_attrs.end()), (std::vector<double>{0, 0, 1, 0, 3, 0, 0, 2}));
}

TEST(AAGraph, NodeAttributesConcatenateFeatures) {
    const auto g1 = tiny_graph({{0, 0}, {1, 0}, {0, 1}}, {{0, 1}}, 3);
    const auto g2 = tiny_graph({{0, 0}, {1, 0}}, {{0, 1}}, 3);
    const auto aa = build_aa_graph(g1, g2);
    EXPECT_EQ(aa.node_dim, 6u);
    const std::size_t p = match_index(2, 1, 2);
    const std::vector<double> row(aa.node_attrs.begin() + p * 6, aa.node_attrs.begin() + (p + 1) * 6);
    EXPECT_EQ(row, (std::vector<double>{20, 21, 22, 10, 11, 12}));
}

TEST(AAGraph, MatchesDoubleLoopOracle) {
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        const std::size_t n = 3 + seed % 6;
        const auto pair = synthesize_pair(n, 0.02, 0.3, seed);
        const auto aa = build_aa_graph(pair.g1, pair.g2);
        std::vector<std::pair<std::size_t, std::size_t>> expected;
        for (std::size_t p = 0; p < n * n; ++p)
            for (std::size_t q = p + 1; q < n * n; ++q) {
                const std::size_t i = p / n, a = p % n, j = q / n, b = q % n;
                if (i != j && a != b && pair.g1.adjacency(i, j) && pair.g2.adjacency(a, b)) expected.emplace_back(p, q);
            }
        EXPECT_EQ(aa.edges, expected);
        EXPECT_EQ(aa.edge_count(), 2 * pair.g1.adjacency.edge_count() * pair.g2.adjacency.edge_count());
    }
}

TEST(AAGraph, FeatureDimensionMismatchThrows) {
    const auto g1 = tiny_graph({{0, 0}, {1, 0}}, {{0, 1}}, 2);
    const auto g2 = tiny_graph({{0, 0}, {1, 0}}, {{0, 1}}, 3);
    EXPECT_THROW(build_aa_graph(g1, g2), std::invalid_argument);
}

TEST(Serialization, PairRoundTrip) {
    const auto pair = synthesize_pair(8, 0.02, 0.3, 4);
    const auto back = graph_pair_from_json(nlohmann::json::parse(to_json(pair).dump()));
    EXPECT_EQ(back, pair);
}

TEST(Serialization, DatasetFileRoundTrip) {
    std::vector<GraphPair> pairs;
    for (std::uint64_t s = 1; s <= 3; ++s) pairs.push_back(synthesize_pair(6, 0.01, 0.2, s));
    const auto path = (std::filesystem::temp_directory_path() / "dpgm_dataset_roundtrip.json").string();
    save_dataset(path, pairs);
    EXPECT_EQ(load_dataset(path), pairs);
    std::filesystem::remove(path);
}

TEST(Serialization, RejectsInvalidGroundTruth) {
    auto j = to_json(synthesize_pair(5, 0.0, 0.0, 1));
    j["ground_truth"] = {0, 0, 1, 2, 3};
    EXPECT_THROW(graph_pair_from_json(j), std::runtime_error);
    j["schema"] = "something.else";
    EXPECT_THROW(graph_pair_from_json(j), std::runtime_error);
}
