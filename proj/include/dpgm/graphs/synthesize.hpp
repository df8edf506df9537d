#pragma once

#include "dpgm/graphs/attributed_graph.hpp"
#include "dpgm/graphs/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

namespace dpgm {

/// Width of the per-node geometric descriptor.
inline constexpr std::size_t kDescriptorDim = 8;

/// Shape-context style descriptor over the graph neighbors of each node: a soft
/// 2 (radial) x 4 (angular) histogram of neighbor offsets. Angles are measured from
/// the node's mean neighbor direction; the radial split is the graph's mean
/// log edge length. Each histogram sums to 1 (0 for isolated nodes).
inline std::vector<std::vector<double>> geometric_descriptors(const std::vector<Point2>& points, const Adjacency& adj) {
    const std::size_t n = points.size();
    std::vector<std::vector<double>> out(n, std::vector<double>(kDescriptorDim, 0.0));

    double log_sum = 0.0;
    std::size_t log_count = 0;
    for (auto [i, j] : adj.edges()) {
        const double d = distance(points[i], points[j]);
        if (d > 0.0) {
            log_sum += std::log(d);
            ++log_count;
        }
    }
    const double log_mid = log_count ? log_sum / static_cast<double>(log_count) : 0.0;
    constexpr double radial_width = 0.25;
    constexpr double sector = std::numbers::pi / 2.0;

    for (std::size_t i = 0; i < n; ++i) {
        const auto nbrs = adj.neighbors(i);
        if (nbrs.empty()) continue;
        double mx = 0.0, my = 0.0;
        for (auto j : nbrs) {
            const double dx = points[j].x - points[i].x, dy = points[j].y - points[i].y;
            const double r = std::hypot(dx, dy);
            if (r > 0.0) {
                mx += dx / r;
                my += dy / r;
            }
        }
        const double ref = (std::hypot(mx, my) > 1e-12) ? std::atan2(my, mx) : 0.0;

        auto& hist = out[i];
        for (auto j : nbrs) {
            const double dx = points[j].x - points[i].x, dy = points[j].y - points[i].y;
            const double r = std::max(std::hypot(dx, dy), 1e-12);
            double angle = std::atan2(dy, dx) - ref;
            angle = std::fmod(angle, 2.0 * std::numbers::pi);
            if (angle < 0.0) angle += 2.0 * std::numbers::pi;

            // linear interpolation between the two nearest sector centres
            const double pos = angle / sector;
            const auto lo = static_cast<std::size_t>(std::floor(pos)) % 4;
            const auto hi = (lo + 1) % 4;
            const double frac = pos - std::floor(pos);

            const double near = 1.0 / (1.0 + std::exp((std::log(r) - log_mid) / radial_width));
            const double far = 1.0 - near;
            hist[lo] += near * (1.0 - frac);
            hist[hi] += near * frac;
            hist[4 + lo] += far * (1.0 - frac);
            hist[4 + hi] += far * frac;
        }
        for (double& h : hist) h /= static_cast<double>(nbrs.size());
    }
    return out;
}

/// Builds an attributed graph on the given points: Delaunay topology plus
/// geometric descriptors. Reports whether the topology fell back to complete.
inline AttributedGraph make_keypoint_graph(std::vector<Point2> points, bool* fallback = nullptr) {
    auto tri = delaunay_adjacency(points);
    if (fallback) *fallback = tri.fallback;
    AttributedGraph g;
    g.features = geometric_descriptors(points, tri.adjacency);
    g.points = std::move(points);
    g.adjacency = std::move(tri.adjacency);
    return g;
}

struct SynthesisOptions {
    /// Uniform translation range per axis.
    double translation_max = 0.05;
    /// When false graph-2 keeps graph-1's node order.
    bool shuffle = true;
    /// Extra uniformly placed nodes appended to each graph before shuffling;
    /// they are paired with each other in index order in the ground truth.
    std::size_t outliers = 0;
};

/// Synthetic keypoint-matching instance. Graph-1 points are uniform in the unit
/// square; graph-2 is a rotated (about the square's centre), translated and
/// noise-perturbed copy whose node order is shuffled. ground_truth[i] is the
/// graph-2 index of graph-1 node i. Deterministic in (arguments, seed).
inline GraphPair synthesize_pair(std::size_t n, double noise_sigma, double rotation_max, std::uint64_t seed,
                                 const SynthesisOptions& opt = {}) {
    if (n < 3) throw std::invalid_argument("synthesize_pair: need at least 3 nodes");
    if (noise_sigma < 0.0 || rotation_max < 0.0 || opt.translation_max < 0.0)
        throw std::invalid_argument("synthesize_pair: negative noise or transform range");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t total = n + opt.outliers;

    std::vector<Point2> p1(total);
    for (auto& p : p1) p = {unit(rng), unit(rng)};

    const double theta = rotation_max > 0.0 ? std::uniform_real_distribution<double>(-rotation_max, rotation_max)(rng) : 0.0;
    Point2 shift{};
    if (opt.translation_max > 0.0) {
        std::uniform_real_distribution<double> t(-opt.translation_max, opt.translation_max);
        shift.x = t(rng);
        shift.y = t(rng);
    }
    std::normal_distribution<double> noise(0.0, 1.0);
    const double c = std::cos(theta), s = std::sin(theta);

    std::vector<Point2> q(total);
    for (std::size_t i = 0; i < n; ++i) {
        if (theta == 0.0) {
            q[i] = {p1[i].x + shift.x, p1[i].y + shift.y};
        } else {
            const double x = p1[i].x - 0.5, y = p1[i].y - 0.5;
            q[i].x = c * x - s * y + 0.5 + shift.x;
            q[i].y = s * x + c * y + 0.5 + shift.y;
        }
        if (noise_sigma > 0.0) {
            q[i].x += noise_sigma * noise(rng);
            q[i].y += noise_sigma * noise(rng);
        }
    }
    for (std::size_t i = n; i < total; ++i) q[i] = {unit(rng), unit(rng)};

    Permutation gt = Permutation::identity(total);
    if (opt.shuffle) std::shuffle(gt.mapping.begin(), gt.mapping.end(), rng);

    std::vector<Point2> p2(total);
    for (std::size_t i = 0; i < total; ++i) p2[gt[i]] = q[i];

    GraphPair pair;
    bool fb1 = false, fb2 = false;
    pair.g1 = make_keypoint_graph(std::move(p1), &fb1);
    pair.g2 = make_keypoint_graph(std::move(p2), &fb2);
    pair.ground_truth = std::move(gt);
    pair.meta.n = n;
    pair.meta.noise_sigma = noise_sigma;
    pair.meta.rotation_max = rotation_max;
    pair.meta.translation_max = opt.translation_max;
    pair.meta.seed = seed;
    pair.meta.outliers = opt.outliers;
    pair.meta.rotation = theta;
    pair.meta.translation = shift;
    pair.meta.degenerate_topology = fb1 || fb2;
    return pair;
}

} // namespace dpgm
