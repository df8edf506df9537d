#pragma once

#include "dpgm/core/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace dpgm {

struct AffinityEntry {
    std::size_t p = 0;
    std::size_t q = 0;
    double value = 0.0;

    bool operator==(const AffinityEntry&) const = default;
};

/// N x N affinity operator (N = n1 * n2): unary diagonal plus sparse off-diagonal
/// pair entries. Pair entries are stored in both directions, sorted by (p, q).
class SparseAffinity {
public:
    SparseAffinity() = default;
    SparseAffinity(std::size_t n1, std::size_t n2)
        : n1_(n1), n2_(n2), unary_(n1 * n2, 0.0) {}
    SparseAffinity(std::size_t n1, std::size_t n2, std::vector<double> unary, std::vector<AffinityEntry> pairs)
        : n1_(n1), n2_(n2), unary_(std::move(unary)), pairs_(std::move(pairs)) {
        if (unary_.size() != n1_ * n2_)
            throw std::invalid_argument("SparseAffinity: unary length != n1*n2");
        for (const auto& e : pairs_) {
            if (e.p == e.q) throw std::invalid_argument("SparseAffinity: pair on diagonal");
            if (e.p >= size() || e.q >= size()) throw std::out_of_range("SparseAffinity: pair index");
        }
        sort_pairs();
    }

    std::size_t n1() const { return n1_; }
    std::size_t n2() const { return n2_; }
    std::size_t size() const { return n1_ * n2_; }

    std::span<const double> unary() const { return unary_; }
    std::span<double> unary() { return unary_; }
    std::span<const AffinityEntry> pairs() const { return pairs_; }

    /// Adds value at (p, q) and (q, p).
    void add_symmetric(std::size_t p, std::size_t q, double value) {
        if (p == q) throw std::invalid_argument("SparseAffinity: pair on diagonal");
        if (p >= size() || q >= size()) throw std::out_of_range("SparseAffinity: pair index");
        pairs_.push_back({p, q, value});
        pairs_.push_back({q, p, value});
    }

    void sort_pairs() {
        std::sort(pairs_.begin(), pairs_.end(), [](const AffinityEntry& a, const AffinityEntry& b) {
            return std::tie(a.p, a.q) < std::tie(b.p, b.q);
        });
    }

    bool nonnegative() const {
        return std::all_of(unary_.begin(), unary_.end(), [](double v) { return v >= 0.0; }) &&
               std::all_of(pairs_.begin(), pairs_.end(), [](const AffinityEntry& e) { return e.value >= 0.0; });
    }

    /// Every (p, q, v) has a (q, p, v) partner. Requires sorted pairs.
    bool symmetric() const {
        for (const auto& e : pairs_) {
            auto it = std::lower_bound(pairs_.begin(), pairs_.end(), std::pair{e.q, e.p},
                                       [](const AffinityEntry& a, const std::pair<std::size_t, std::size_t>& key) {
                                           return std::tie(a.p, a.q) < std::tie(key.first, key.second);
                                       });
            if (it == pairs_.end() || it->p != e.q || it->q != e.p || it->value != e.value) return false;
        }
        return true;
    }

    bool all_zero() const {
        return std::all_of(unary_.begin(), unary_.end(), [](double v) { return v == 0.0; }) &&
               std::all_of(pairs_.begin(), pairs_.end(), [](const AffinityEntry& e) { return e.value == 0.0; });
    }

    DenseMatrix densify() const {
        DenseMatrix k(size(), size());
        for (std::size_t p = 0; p < size(); ++p) k(p, p) = unary_[p];
        for (const auto& e : pairs_) k(e.p, e.q) += e.value;
        return k;
    }

    bool operator==(const SparseAffinity&) const = default;

private:
    std::size_t n1_ = 0;
    std::size_t n2_ = 0;
    std::vector<double> unary_;
    std::vector<AffinityEntry> pairs_;
};

/// y = K x.
inline std::vector<double> spmv(const SparseAffinity& k, std::span<const double> x) {
    if (x.size() != k.size()) throw std::invalid_argument("spmv: vector length does not match affinity size");
    std::vector<double> y(x.size());
    const auto unary = k.unary();
    for (std::size_t p = 0; p < x.size(); ++p) y[p] = unary[p] * x[p];
    for (const auto& e : k.pairs()) y[e.p] += e.value * x[e.q];
    return y;
}

} // namespace dpgm
