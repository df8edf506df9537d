#pragma once

#include "dpgm/nn/param_store.hpp"

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dpgm::nn {

enum class Op {
    leaf,
    constant,
    matmul,
    add_bias,
    add,
    scale,
    hadamard,
    relu,
    sigmoid,
    concat_cols,
    gather_rows,
    scatter_add_rows,
    sum,
    reshape,
    clamp_min,
    floor_div,
    pattern_spmv,
    sinkhorn,
    balanced_ce,
    custom,
};

inline const char* op_name(Op op) {
    switch (op) {
    case Op::leaf: return "leaf";
    case Op::constant: return "constant";
    case Op::matmul: return "matmul";
    case Op::add_bias: return "add_bias";
    case Op::add: return "add";
    case Op::scale: return "scale";
    case Op::hadamard: return "hadamard";
    case Op::relu: return "relu";
    case Op::sigmoid: return "sigmoid";
    case Op::concat_cols: return "concat_cols";
    case Op::gather_rows: return "gather_rows";
    case Op::scatter_add_rows: return "scatter_add_rows";
    case Op::sum: return "sum";
    case Op::reshape: return "reshape";
    case Op::clamp_min: return "clamp_min";
    case Op::floor_div: return "floor_div";
    case Op::pattern_spmv: return "pattern_spmv";
    case Op::sinkhorn: return "sinkhorn";
    case Op::balanced_ce: return "balanced_ce";
    case Op::custom: return "custom";
    }
    return "?";
}

class Tape;

/// Handle to a tape node.
struct Var {
    Tape* tape = nullptr;
    std::size_t id = 0;

    const Mat& value() const;
    Eigen::Index rows() const { return value().rows(); }
    Eigen::Index cols() const { return value().cols(); }
};

/// Reverse-mode tape. Nodes are appended in evaluation order, so index order is a
/// topological order and backward is a single reverse sweep.
class Tape {
public:
    /// Propagates the node's output gradient into its inputs' gradients.
    using BackwardFn = std::function<void(Tape&, std::size_t self)>;

    struct Node {
        Op op = Op::leaf;
        std::vector<std::size_t> inputs;
        Mat value;
        Mat grad;
        BackwardFn backward;
        Parameter* param = nullptr;
    };

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Appends a node. Every non-leaf op must come with its backward rule; a
    /// missing rule is rejected here rather than during the sweep.
    Var record(Op op, std::vector<std::size_t> inputs, Mat value, BackwardFn backward) {
        const bool is_source = op == Op::leaf || op == Op::constant;
        if (!is_source && !backward)
            throw std::logic_error(std::string("Tape: no backward rule registered for op '") + op_name(op) + "'");
        for (auto in : inputs)
            if (in >= nodes_.size()) throw std::out_of_range("Tape: input node does not exist");
        nodes_.push_back({op, std::move(inputs), std::move(value), Mat{}, std::move(backward), nullptr});
        return {this, nodes_.size() - 1};
    }

    Var constant(Mat value) { return record(Op::constant, {}, std::move(value), {}); }

    /// Parameter leaf; frozen parameters become constants.
    Var param(Parameter& p) {
        if (p.frozen) return constant(p.value);
        Var v = record(Op::leaf, {}, p.value, {});
        nodes_[v.id].param = &p;
        return v;
    }
    Var param(ParamStore& store, const std::string& name) { return param(store.at(name)); }

    const Mat& value(std::size_t id) const { return nodes_.at(id).value; }
    const Mat& grad(std::size_t id) const { return nodes_.at(id).grad; }
    const Node& node(std::size_t id) const { return nodes_.at(id); }
    std::size_t size() const { return nodes_.size(); }

    void accumulate(std::size_t id, const Mat& g) {
        auto& n = nodes_[id];
        if (n.op == Op::constant) return;
        if (n.grad.size() == 0)
            n.grad = g;
        else
            n.grad += g;
    }

    /// Seeds d(root)/d(root) = 1 on a scalar node, sweeps every node once in
    /// reverse order and adds parameter-leaf gradients into their Parameter::grad.
    void backward(Var root) {
        if (root.tape != this) throw std::invalid_argument("Tape::backward: variable belongs to another tape");
        const auto& r = nodes_.at(root.id);
        if (r.value.size() != 1) throw std::invalid_argument("Tape::backward: root must be scalar");
        for (auto& n : nodes_) n.grad.resize(0, 0);
        nodes_[root.id].grad = Mat::Ones(1, 1);
        for (std::size_t k = root.id + 1; k-- > 0;) {
            auto& n = nodes_[k];
            if (n.grad.size() == 0) continue;
            if (n.backward) n.backward(*this, k);
            if (n.param) n.param->grad += n.grad;
        }
    }

private:
    std::vector<Node> nodes_;
};

inline const Mat& Var::value() const { return tape->value(id); }

namespace detail {
inline Tape& same_tape(Var a, Var b) {
    if (a.tape != b.tape) throw std::invalid_argument("nn op: operands live on different tapes");
    return *a.tape;
}
inline void require_shape(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("nn op: shape mismatch in ") + what);
}
} // namespace detail

// ---- dense ops -------------------------------------------------------------

inline Var matmul(Var a, Var b) {
    Tape& t = detail::same_tape(a, b);
    detail::require_shape(a.cols() == b.rows(), "matmul");
    return t.record(Op::matmul, {a.id, b.id}, a.value() * b.value(), [ia = a.id, ib = b.id](Tape& tp, std::size_t self) {
        const Mat& g = tp.grad(self);
        tp.accumulate(ia, g * tp.value(ib).transpose());
        tp.accumulate(ib, tp.value(ia).transpose() * g);
    });
}

/// a (m x n) + bias (1 x n) broadcast over rows.
inline Var add_bias(Var a, Var bias) {
    Tape& t = detail::same_tape(a, bias);
    detail::require_shape(bias.rows() == 1 && bias.cols() == a.cols(), "add_bias");
    Mat out = a.value();
    out.rowwise() += bias.value().row(0);
    return t.record(Op::add_bias, {a.id, bias.id}, std::move(out), [ia = a.id, ib = bias.id](Tape& tp, std::size_t self) {
        const Mat& g = tp.grad(self);
        tp.accumulate(ia, g);
        tp.accumulate(ib, g.colwise().sum());
    });
}

inline Var add(Var a, Var b) {
    Tape& t = detail::same_tape(a, b);
    detail::require_shape(a.rows() == b.rows() && a.cols() == b.cols(), "add");
    return t.record(Op::add, {a.id, b.id}, a.value() + b.value(), [ia = a.id, ib = b.id](Tape& tp, std::size_t self) {
        tp.accumulate(ia, tp.grad(self));
        tp.accumulate(ib, tp.grad(self));
    });
}

inline Var scale(Var a, double c) {
    return a.tape->record(Op::scale, {a.id}, a.value() * c, [ia = a.id, c](Tape& tp, std::size_t self) {
        tp.accumulate(ia, tp.grad(self) * c);
    });
}

inline Var hadamard(Var a, Var b) {
    Tape& t = detail::same_tape(a, b);
    detail::require_shape(a.rows() == b.rows() && a.cols() == b.cols(), "hadamard");
    return t.record(Op::hadamard, {a.id, b.id}, a.value().cwiseProduct(b.value()),
                    [ia = a.id, ib = b.id](Tape& tp, std::size_t self) {
                        const Mat& g = tp.grad(self);
                        tp.accumulate(ia, g.cwiseProduct(tp.value(ib)));
                        tp.accumulate(ib, g.cwiseProduct(tp.value(ia)));
                    });
}

inline Var relu(Var a) {
    return a.tape->record(Op::relu, {a.id}, a.value().cwiseMax(0.0), [ia = a.id](Tape& tp, std::size_t self) {
        const Mat& x = tp.value(ia);
        tp.accumulate(ia, tp.grad(self).cwiseProduct((x.array() > 0.0).cast<double>().matrix()));
    });
}

inline Var sigmoid(Var a) {
    Mat y = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
    return a.tape->record(Op::sigmoid, {a.id}, std::move(y), [ia = a.id](Tape& tp, std::size_t self) {
        const Mat& s = tp.value(self);
        tp.accumulate(ia, (tp.grad(self).array() * s.array() * (1.0 - s.array())).matrix());
    });
}

inline Var concat_cols(Var a, Var b) {
    Tape& t = detail::same_tape(a, b);
    detail::require_shape(a.rows() == b.rows(), "concat_cols");
    Mat out(a.rows(), a.cols() + b.cols());
    out << a.value(), b.value();
    return t.record(Op::concat_cols, {a.id, b.id}, std::move(out),
                    [ia = a.id, ib = b.id, ca = a.cols(), cb = b.cols()](Tape& tp, std::size_t self) {
                        const Mat& g = tp.grad(self);
                        tp.accumulate(ia, g.leftCols(ca));
                        tp.accumulate(ib, g.rightCols(cb));
                    });
}

/// Sum of all entries as a 1 x 1 node.
inline Var sum(Var a) {
    Mat out(1, 1);
    out(0, 0) = a.value().sum();
    return a.tape->record(Op::sum, {a.id}, std::move(out), [ia = a.id](Tape& tp, std::size_t self) {
        const Mat& x = tp.value(ia);
        tp.accumulate(ia, Mat::Constant(x.rows(), x.cols(), tp.grad(self)(0, 0)));
    });
}

/// Row-major reinterpretation with the same number of entries.
inline Var reshape(Var a, Eigen::Index rows, Eigen::Index cols) {
    detail::require_shape(rows * cols == a.value().size(), "reshape");
    Mat out = Eigen::Map<const Mat>(a.value().data(), rows, cols);
    return a.tape->record(Op::reshape, {a.id}, std::move(out), [ia = a.id](Tape& tp, std::size_t self) {
        const Mat& x = tp.value(ia);
        tp.accumulate(ia, Eigen::Map<const Mat>(tp.grad(self).data(), x.rows(), x.cols()));
    });
}

/// max(a, floor) elementwise; gradient passes only where a > floor.
inline Var clamp_min(Var a, double floor) {
    return a.tape->record(Op::clamp_min, {a.id}, a.value().cwiseMax(floor), [ia = a.id, floor](Tape& tp, std::size_t self) {
        const Mat& x = tp.value(ia);
        tp.accumulate(ia, tp.grad(self).cwiseProduct((x.array() > floor).cast<double>().matrix()));
    });
}

/// a / max(b, floor) elementwise.
inline Var floor_div(Var a, Var b, double floor) {
    Tape& t = detail::same_tape(a, b);
    detail::require_shape(a.rows() == b.rows() && a.cols() == b.cols(), "floor_div");
    Mat out = a.value().cwiseQuotient(b.value().cwiseMax(floor));
    return t.record(Op::floor_div, {a.id, b.id}, std::move(out), [ia = a.id, ib = b.id, floor](Tape& tp, std::size_t self) {
        const Mat& g = tp.grad(self);
        const Mat& av = tp.value(ia);
        const Mat& bv = tp.value(ib);
        const Mat den = bv.cwiseMax(floor);
        tp.accumulate(ia, g.cwiseQuotient(den));
        Mat gb(bv.rows(), bv.cols());
        for (Eigen::Index k = 0; k < bv.size(); ++k) {
            const double b = bv.data()[k];
            gb.data()[k] = b > floor ? -g.data()[k] * av.data()[k] / (b * b) : 0.0;
        }
        tp.accumulate(ib, gb);
    });
}

// ---- graph ops -------------------------------------------------------------

/// out.row(r) = a.row(index[r]).
inline Var gather_rows(Var a, std::vector<std::size_t> index) {
    const Mat& x = a.value();
    Mat out(static_cast<Eigen::Index>(index.size()), x.cols());
    for (std::size_t r = 0; r < index.size(); ++r) {
        if (index[r] >= static_cast<std::size_t>(x.rows())) throw std::out_of_range("gather_rows: index");
        out.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(index[r]));
    }
    return a.tape->record(Op::gather_rows, {a.id}, std::move(out), [ia = a.id, index = std::move(index)](Tape& tp, std::size_t self) {
        const Mat& g = tp.grad(self);
        Mat ga = Mat::Zero(tp.value(ia).rows(), g.cols());
        for (std::size_t r = 0; r < index.size(); ++r) ga.row(static_cast<Eigen::Index>(index[r])) += g.row(static_cast<Eigen::Index>(r));
        tp.accumulate(ia, ga);
    });
}

/// out.row(index[r]) += a.row(r), out has out_rows rows.
inline Var scatter_add_rows(Var a, std::vector<std::size_t> index, std::size_t out_rows) {
    const Mat& x = a.value();
    detail::require_shape(static_cast<std::size_t>(x.rows()) == index.size(), "scatter_add_rows");
    Mat out = Mat::Zero(static_cast<Eigen::Index>(out_rows), x.cols());
    for (std::size_t r = 0; r < index.size(); ++r) {
        if (index[r] >= out_rows) throw std::out_of_range("scatter_add_rows: index");
        out.row(static_cast<Eigen::Index>(index[r])) += x.row(static_cast<Eigen::Index>(r));
    }
    return a.tape->record(Op::scatter_add_rows, {a.id}, std::move(out), [ia = a.id, index = std::move(index)](Tape& tp, std::size_t self) {
        const Mat& g = tp.grad(self);
        Mat ga(static_cast<Eigen::Index>(index.size()), g.cols());
        for (std::size_t r = 0; r < index.size(); ++r) ga.row(static_cast<Eigen::Index>(r)) = g.row(static_cast<Eigen::Index>(index[r]));
        tp.accumulate(ia, ga);
    });
}

} // namespace dpgm::nn
