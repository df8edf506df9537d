#pragma once

#include "dpgm/core/matrix.hpp"

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dpgm {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point2&) const = default;
};

inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Symmetric boolean adjacency without self-loops.
class Adjacency {
public:
    Adjacency() = default;
    explicit Adjacency(std::size_t n) : n_(n), bits_(n * n, 0) {}

    static Adjacency complete(std::size_t n) {
        Adjacency a(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) a.connect(i, j);
        return a;
    }

    static Adjacency from_edges(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
        Adjacency a(n);
        for (auto [i, j] : edges) a.connect(i, j);
        return a;
    }

    std::size_t size() const { return n_; }

    bool operator()(std::size_t i, std::size_t j) const { return bits_[i * n_ + j] != 0; }

    void connect(std::size_t i, std::size_t j) {
        if (i >= n_ || j >= n_) throw std::out_of_range("Adjacency: node index");
        if (i == j) throw std::invalid_argument("Adjacency: self-loop");
        bits_[i * n_ + j] = 1;
        bits_[j * n_ + i] = 1;
    }

    /// Undirected edges (i < j) in lexicographic order.
    std::vector<std::pair<std::size_t, std::size_t>> edges() const {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = i + 1; j < n_; ++j)
                if ((*this)(i, j)) out.emplace_back(i, j);
        return out;
    }

    std::size_t edge_count() const {
        std::size_t c = 0;
        for (auto b : bits_) c += b;
        return c / 2;
    }

    std::vector<std::size_t> neighbors(std::size_t i) const {
        std::vector<std::size_t> out;
        for (std::size_t j = 0; j < n_; ++j)
            if ((*this)(i, j)) out.push_back(j);
        return out;
    }

    bool connected() const {
        if (n_ == 0) return true;
        std::vector<bool> seen(n_, false);
        std::vector<std::size_t> stack{0};
        seen[0] = true;
        std::size_t count = 1;
        while (!stack.empty()) {
            const auto i = stack.back();
            stack.pop_back();
            for (std::size_t j = 0; j < n_; ++j) {
                if ((*this)(i, j) && !seen[j]) {
                    seen[j] = true;
                    ++count;
                    stack.push_back(j);
                }
            }
        }
        return count == n_;
    }

    bool operator==(const Adjacency&) const = default;

private:
    std::size_t n_ = 0;
    std::vector<std::uint8_t> bits_;
};

struct AttributedGraph {
    std::vector<Point2> points;
    std::vector<std::vector<double>> features;
    Adjacency adjacency;

    std::size_t size() const { return points.size(); }
    std::size_t feature_dim() const { return features.empty() ? 0 : features.front().size(); }

    void validate() const {
        if (features.size() != points.size())
            throw std::invalid_argument("AttributedGraph: one feature vector per node required");
        if (adjacency.size() != points.size())
            throw std::invalid_argument("AttributedGraph: adjacency size mismatch");
        for (const auto& f : features)
            if (f.size() != feature_dim()) throw std::invalid_argument("AttributedGraph: ragged features");
    }

    bool operator==(const AttributedGraph&) const = default;
};

struct PairMeta {
    std::size_t n = 0;
    double noise_sigma = 0.0;
    double rotation_max = 0.0;
    double translation_max = 0.0;
    std::uint64_t seed = 0;
    std::size_t outliers = 0;
    /// Realized transform.
    double rotation = 0.0;
    Point2 translation{};
    /// Set when either side fell back to a complete graph.
    bool degenerate_topology = false;

    bool operator==(const PairMeta&) const = default;
};

struct GraphPair {
    AttributedGraph g1;
    AttributedGraph g2;
    Permutation ground_truth;
    PairMeta meta;

    bool operator==(const GraphPair&) const = default;
};

} // namespace dpgm
