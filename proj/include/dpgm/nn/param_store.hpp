#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpgm::nn {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Parameter {
    Mat value;
    Mat grad;
    /// Frozen parameters enter the tape as constants; their gradient stays 0.
    bool frozen = false;

    std::size_t rows() const { return static_cast<std::size_t>(value.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(value.cols()); }
};

/// Named parameters with companion gradients. Iteration order is by name.
class ParamStore {
public:
    Parameter& add(const std::string& name, std::size_t rows, std::size_t cols) {
        if (params_.count(name)) throw std::invalid_argument("ParamStore: duplicate parameter " + name);
        Parameter p;
        p.value = Mat::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        p.grad = Mat::Zero(p.value.rows(), p.value.cols());
        return params_.emplace(name, std::move(p)).first->second;
    }

    bool contains(const std::string& name) const { return params_.count(name) != 0; }

    Parameter& at(const std::string& name) {
        auto it = params_.find(name);
        if (it == params_.end()) throw std::out_of_range("ParamStore: unknown parameter " + name);
        return it->second;
    }
    const Parameter& at(const std::string& name) const {
        auto it = params_.find(name);
        if (it == params_.end()) throw std::out_of_range("ParamStore: unknown parameter " + name);
        return it->second;
    }

    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }
    std::size_t size() const { return params_.size(); }

    std::size_t scalar_count() const {
        std::size_t n = 0;
        for (const auto& [_, p] : params_) n += static_cast<std::size_t>(p.value.size());
        return n;
    }

    void zero_grad() {
        for (auto& [_, p] : params_) p.grad.setZero();
    }

    /// Same names and shapes.
    bool same_layout(const ParamStore& other) const {
        if (params_.size() != other.params_.size()) return false;
        auto it = other.params_.begin();
        for (const auto& [name, p] : params_) {
            if (it->first != name || it->second.rows() != p.rows() || it->second.cols() != p.cols()) return false;
            ++it;
        }
        return true;
    }

private:
    std::map<std::string, Parameter> params_;
};

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)).
inline void init_uniform_fan_in(Parameter& p, std::size_t fan_in, std::mt19937_64& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1)));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index k = 0; k < p.value.size(); ++k) p.value.data()[k] = dist(rng);
}

} // namespace dpgm::nn
