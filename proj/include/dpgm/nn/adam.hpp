#pragma once

#include "dpgm/nn/param_store.hpp"

#include <cmath>
#include <map>
#include <string>

namespace dpgm::nn {

struct AdamOptions {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adaptive-moment gradient descent over a ParamStore.
class Adam {
public:
    explicit Adam(AdamOptions opt = {}) : opt_(opt) {}

    void step(ParamStore& params) {
        ++t_;
        const double c1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
        for (auto& [name, p] : params) {
            if (p.frozen) continue;
            auto& m = first_[name];
            auto& v = second_[name];
            if (m.size() == 0) {
                m = Mat::Zero(p.value.rows(), p.value.cols());
                v = Mat::Zero(p.value.rows(), p.value.cols());
            }
            m = opt_.beta1 * m + (1.0 - opt_.beta1) * p.grad;
            v = opt_.beta2 * v + (1.0 - opt_.beta2) * p.grad.cwiseProduct(p.grad);
            p.value.array() -= opt_.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + opt_.epsilon);
        }
    }

    std::size_t steps() const { return t_; }

private:
    AdamOptions opt_;
    std::size_t t_ = 0;
    std::map<std::string, Mat> first_;
    std::map<std::string, Mat> second_;
};

} // namespace dpgm::nn
