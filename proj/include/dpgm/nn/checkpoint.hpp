#pragma once

#include "dpgm/nn/param_store.hpp"

#include <json.hpp>

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpgm::nn {

inline constexpr const char* kCheckpointSchema = "dpgm.checkpoint";
inline constexpr int kCheckpointVersion = 1;

inline nlohmann::json checkpoint_to_json(const ParamStore& params, const nlohmann::json& extra = nlohmann::json::object()) {
    nlohmann::json j;
    j["schema"] = kCheckpointSchema;
    j["version"] = kCheckpointVersion;
    j["extra"] = extra;
    auto& arr = j["params"] = nlohmann::json::array();
    for (const auto& [name, p] : params) {
        std::vector<double> values(p.value.data(), p.value.data() + p.value.size());
        arr.push_back({{"name", name}, {"rows", p.rows()}, {"cols", p.cols()}, {"values", values}});
    }
    return j;
}

/// Loads values into an already laid-out store. Unknown names, missing names and
/// shape mismatches are rejected; the store is untouched on failure.
inline void load_checkpoint_json(const nlohmann::json& j, ParamStore& params) {
    if (j.value("schema", std::string{}) != kCheckpointSchema) throw std::runtime_error("checkpoint: unexpected schema");
    if (j.value("version", 0) != kCheckpointVersion) throw std::runtime_error("checkpoint: unsupported version");
    const auto& arr = j.at("params");
    if (arr.size() != params.size()) throw std::runtime_error("checkpoint: parameter count mismatch");

    std::vector<std::pair<Parameter*, std::vector<double>>> staged;
    for (const auto& entry : arr) {
        const auto name = entry.at("name").get<std::string>();
        if (!params.contains(name)) throw std::runtime_error("checkpoint: unknown parameter " + name);
        Parameter& p = params.at(name);
        const auto rows = entry.at("rows").get<std::size_t>();
        const auto cols = entry.at("cols").get<std::size_t>();
        if (rows != p.rows() || cols != p.cols())
            throw std::runtime_error("checkpoint: shape mismatch for " + name + " (file " + std::to_string(rows) + "x" +
                                     std::to_string(cols) + ", model " + std::to_string(p.rows()) + "x" + std::to_string(p.cols()) + ")");
        auto values = entry.at("values").get<std::vector<double>>();
        if (values.size() != rows * cols) throw std::runtime_error("checkpoint: value count mismatch for " + name);
        staged.emplace_back(&p, std::move(values));
    }
    for (auto& [p, values] : staged) std::copy(values.begin(), values.end(), p->value.data());
}

inline void save_checkpoint(const std::string& path, const ParamStore& params, const nlohmann::json& extra = nlohmann::json::object()) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << checkpoint_to_json(params, extra).dump() << '\n';
}

inline nlohmann::json read_checkpoint_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path);
    return nlohmann::json::parse(is);
}

inline void load_checkpoint(const std::string& path, ParamStore& params) { load_checkpoint_json(read_checkpoint_file(path), params); }

} // namespace dpgm::nn
