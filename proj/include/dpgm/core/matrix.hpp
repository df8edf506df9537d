#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpgm {

/// Row-major dense matrix of doubles.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
        : rows_(rows), cols_(cols), values_(std::move(values)) {
        if (values_.size() != rows_ * cols_)
            throw std::invalid_argument("DenseMatrix: values length != rows*cols");
    }
    DenseMatrix(std::initializer_list<std::initializer_list<double>> init) {
        rows_ = init.size();
        cols_ = rows_ ? init.begin()->size() : 0;
        values_.reserve(rows_ * cols_);
        for (const auto& row : init) {
            if (row.size() != cols_)
                throw std::invalid_argument("DenseMatrix: ragged initializer");
            values_.insert(values_.end(), row.begin(), row.end());
        }
    }

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    /// Vectorized view; element (i, a) sits at i * cols + a.
    const std::vector<double>& vec() const { return values_; }

    DenseMatrix transposed() const {
        DenseMatrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    bool all_finite() const {
        return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
    }

    bool operator==(const DenseMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

/// Soft correspondence between n1 graph-1 nodes (rows) and n2 graph-2 nodes (columns).
using AssignmentMatrix = DenseMatrix;

/// mapping[i] is the graph-2 node matched to graph-1 node i.
struct Permutation {
    std::vector<std::size_t> mapping;

    std::size_t size() const { return mapping.size(); }
    std::size_t operator[](std::size_t i) const { return mapping[i]; }

    static Permutation identity(std::size_t n) {
        Permutation p;
        p.mapping.resize(n);
        std::iota(p.mapping.begin(), p.mapping.end(), std::size_t{0});
        return p;
    }

    /// Injective into [0, n2).
    bool valid(std::size_t n2) const {
        std::vector<bool> seen(n2, false);
        for (auto a : mapping) {
            if (a >= n2 || seen[a]) return false;
            seen[a] = true;
        }
        return true;
    }

    Permutation inverse() const {
        Permutation inv;
        inv.mapping.resize(mapping.size());
        for (std::size_t i = 0; i < mapping.size(); ++i) inv.mapping[mapping[i]] = i;
        return inv;
    }

    /// 0/1 matrix with X(i, mapping[i]) = 1.
    AssignmentMatrix to_matrix(std::size_t n2) const {
        AssignmentMatrix x(mapping.size(), n2);
        for (std::size_t i = 0; i < mapping.size(); ++i) x(i, mapping[i]) = 1.0;
        return x;
    }

    bool operator==(const Permutation&) const = default;
};

/// Index of candidate match (i, a) in the vectorized assignment.
constexpr std::size_t match_index(std::size_t i, std::size_t a, std::size_t n2) { return i * n2 + a; }

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("squared_distance: length mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return s;
}

/// Sum over columns of each column's Euclidean norm.
inline double l21_norm(const DenseMatrix& x) {
    double total = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) {
        double sq = 0.0;
        for (std::size_t i = 0; i < x.rows(); ++i) sq += x(i, j) * x(i, j);
        total += std::sqrt(sq);
    }
    return total;
}

/// Discreteness of a square soft assignment: 1 for permutation matrices,
/// 1/sqrt(n) for the uniform doubly stochastic matrix.
inline double binary_score(const AssignmentMatrix& x) {
    if (!x.square()) throw std::invalid_argument("binary_score: matrix must be square");
    if (x.rows() == 0) throw std::invalid_argument("binary_score: empty matrix");
    const double n = static_cast<double>(x.rows());
    return (l21_norm(x) + l21_norm(x.transposed())) / (2.0 * n);
}

} // namespace dpgm
