#pragma once

#include "dpgm/nn/param_store.hpp"
#include "dpgm/nn/tape.hpp"

#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpgm::nn {

/// Affine-ReLU stack with a final affine layer. Layer k owns
/// "<prefix>.l<k>.W" (in x out) and "<prefix>.l<k>.b" (1 x out); rows are samples.
struct Mlp {
    std::string prefix;
    /// Input width, hidden widths..., output width.
    std::vector<std::size_t> widths;

    std::size_t layers() const { return widths.size() - 1; }
    std::string weight_name(std::size_t k) const { return prefix + ".l" + std::to_string(k) + ".W"; }
    std::string bias_name(std::size_t k) const { return prefix + ".l" + std::to_string(k) + ".b"; }

    void register_params(ParamStore& store, std::mt19937_64& rng) const {
        if (widths.size() < 2) throw std::invalid_argument("Mlp: need at least input and output widths");
        for (std::size_t k = 0; k < layers(); ++k) {
            init_uniform_fan_in(store.add(weight_name(k), widths[k], widths[k + 1]), widths[k], rng);
            init_uniform_fan_in(store.add(bias_name(k), 1, widths[k + 1]), widths[k], rng);
        }
    }

    Var forward(ParamStore& store, Var input) const {
        if (static_cast<std::size_t>(input.cols()) != widths.front())
            throw std::invalid_argument("Mlp " + prefix + ": input width mismatch");
        Tape& tape = *input.tape;
        Var h = input;
        for (std::size_t k = 0; k < layers(); ++k) {
            Parameter& w = store.at(weight_name(k));
            if (w.rows() != widths[k] || w.cols() != widths[k + 1])
                throw std::invalid_argument("Mlp " + prefix + ": parameter shape does not match widths");
            h = add_bias(matmul(h, tape.param(w)), tape.param(store, bias_name(k)));
            if (k + 1 < layers()) h = relu(h);
        }
        return h;
    }
};

/// Tape-recorded MLP forward.
inline Var mlp_forward(const Mlp& mlp, ParamStore& store, Var input) { return mlp.forward(store, input); }

} // namespace dpgm::nn
