#pragma once

#include "dpgm/nn/param_store.hpp"
#include "dpgm/nn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace dpgm::nn {

struct GradCheckReport {
    double max_relative_error = 0.0;
    std::string worst_parameter;
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    std::size_t checked = 0;
};

/// Records the scalar loss on the given tape using the given parameters.
using LossBuilder = std::function<Var(Tape&, ParamStore&)>;

/// Central finite differences on every entry of every non-frozen parameter,
/// compared with the reverse-mode gradient:
/// |g_ad - g_fd| / max(1e-8, |g_ad| + |g_fd|), maximised over entries.
inline GradCheckReport grad_check(const LossBuilder& build, ParamStore& params, double step = 1e-5) {
    params.zero_grad();
    {
        Tape tape;
        tape.backward(build(tape, params));
    }
    auto eval = [&] {
        Tape tape;
        return build(tape, params).value()(0, 0);
    };

    GradCheckReport report;
    for (auto& [name, p] : params) {
        if (p.frozen) continue;
        for (Eigen::Index k = 0; k < p.value.size(); ++k) {
            double& w = p.value.data()[k];
            const double saved = w;
            w = saved + step;
            const double up = eval();
            w = saved - step;
            const double down = eval();
            w = saved;
            const double fd = (up - down) / (2.0 * step);
            const double ad = p.grad.data()[k];
            const double rel = std::abs(ad - fd) / std::max(1e-8, std::abs(ad) + std::abs(fd));
            ++report.checked;
            if (rel > report.max_relative_error || report.checked == 1) {
                report.max_relative_error = rel;
                report.worst_parameter = name;
                report.worst_index = static_cast<std::size_t>(k);
                report.analytic = ad;
                report.numeric = fd;
            }
        }
    }
    return report;
}

} // namespace dpgm::nn
