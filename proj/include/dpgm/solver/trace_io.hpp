#pragma once

#include "dpgm/solver/probabilistic.hpp"

#include <json.hpp>

namespace dpgm {

inline nlohmann::json to_json(const SolveTrace& trace) {
    nlohmann::json j;
    j["schema"] = "dpgm.solve_trace";
    j["version"] = 1;
    j["stop_reason"] = to_string(trace.stop_reason);
    j["iterations"] = trace.iterations;
    j["binary_scores"] = trace.binary_scores;
    j["objectives"] = trace.objectives;
    j["step_sq_norms"] = trace.step_sq_norms;
    auto& mats = j["assignments"] = nlohmann::json::array();
    for (const auto& m : trace.assignments)
        mats.push_back({{"rows", m.rows()}, {"cols", m.cols()}, {"values", m.vec()}});
    j["row_scales"] = trace.row_scales;
    return j;
}

} // namespace dpgm
