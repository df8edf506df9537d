#pragma once

#include "dpgm/graphs/attributed_graph.hpp"

#include <json.hpp>

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpgm {

inline constexpr const char* kGraphPairSchema = "dpgm.graph_pair";
inline constexpr const char* kDatasetSchema = "dpgm.dataset";
inline constexpr int kGraphPairVersion = 1;

inline nlohmann::json to_json(const AttributedGraph& g) {
    nlohmann::json j;
    auto& pts = j["points"] = nlohmann::json::array();
    for (const auto& p : g.points) pts.push_back({p.x, p.y});
    j["features"] = g.features;
    auto& edges = j["edges"] = nlohmann::json::array();
    for (auto [a, b] : g.adjacency.edges()) edges.push_back({a, b});
    return j;
}

inline AttributedGraph graph_from_json(const nlohmann::json& j) {
    AttributedGraph g;
    for (const auto& p : j.at("points")) {
        if (p.size() != 2) throw std::runtime_error("graph: point must have 2 coordinates");
        g.points.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    g.features = j.at("features").get<std::vector<std::vector<double>>>();
    g.adjacency = Adjacency(g.points.size());
    for (const auto& e : j.at("edges")) {
        if (e.size() != 2) throw std::runtime_error("graph: edge must have 2 endpoints");
        g.adjacency.connect(e[0].get<std::size_t>(), e[1].get<std::size_t>());
    }
    g.validate();
    return g;
}

inline nlohmann::json to_json(const GraphPair& pair) {
    nlohmann::json j;
    j["schema"] = kGraphPairSchema;
    j["version"] = kGraphPairVersion;
    j["g1"] = to_json(pair.g1);
    j["g2"] = to_json(pair.g2);
    j["ground_truth"] = pair.ground_truth.mapping;
    const auto& m = pair.meta;
    j["meta"] = {
        {"n", m.n},
        {"noise_sigma", m.noise_sigma},
        {"rotation_max", m.rotation_max},
        {"translation_max", m.translation_max},
        {"seed", m.seed},
        {"outliers", m.outliers},
        {"rotation", m.rotation},
        {"translation", {m.translation.x, m.translation.y}},
        {"degenerate_topology", m.degenerate_topology},
    };
    return j;
}

inline GraphPair graph_pair_from_json(const nlohmann::json& j) {
    if (j.value("schema", std::string{}) != kGraphPairSchema)
        throw std::runtime_error("graph pair: unexpected schema");
    if (j.value("version", 0) != kGraphPairVersion)
        throw std::runtime_error("graph pair: unsupported version");
    GraphPair pair;
    pair.g1 = graph_from_json(j.at("g1"));
    pair.g2 = graph_from_json(j.at("g2"));
    pair.ground_truth.mapping = j.at("ground_truth").get<std::vector<std::size_t>>();
    if (pair.ground_truth.size() != pair.g1.size() || !pair.ground_truth.valid(pair.g2.size()))
        throw std::runtime_error("graph pair: ground truth is not a valid matching");
    const auto& m = j.at("meta");
    pair.meta.n = m.at("n").get<std::size_t>();
    pair.meta.noise_sigma = m.at("noise_sigma").get<double>();
    pair.meta.rotation_max = m.at("rotation_max").get<double>();
    pair.meta.translation_max = m.value("translation_max", 0.0);
    pair.meta.seed = m.at("seed").get<std::uint64_t>();
    pair.meta.outliers = m.value("outliers", std::size_t{0});
    pair.meta.rotation = m.value("rotation", 0.0);
    if (m.contains("translation")) pair.meta.translation = {m["translation"][0].get<double>(), m["translation"][1].get<double>()};
    pair.meta.degenerate_topology = m.value("degenerate_topology", false);
    return pair;
}

inline nlohmann::json dataset_to_json(const std::vector<GraphPair>& pairs) {
    nlohmann::json j;
    j["schema"] = kDatasetSchema;
    j["version"] = kGraphPairVersion;
    auto& arr = j["pairs"] = nlohmann::json::array();
    for (const auto& p : pairs) arr.push_back(to_json(p));
    return j;
}

inline std::vector<GraphPair> dataset_from_json(const nlohmann::json& j) {
    if (j.value("schema", std::string{}) != kDatasetSchema) throw std::runtime_error("dataset: unexpected schema");
    if (j.value("version", 0) != kGraphPairVersion) throw std::runtime_error("dataset: unsupported version");
    std::vector<GraphPair> out;
    for (const auto& p : j.at("pairs")) out.push_back(graph_pair_from_json(p));
    return out;
}

inline void save_dataset(const std::string& path, const std::vector<GraphPair>& pairs) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << dataset_to_json(pairs).dump() << '\n';
}

inline std::vector<GraphPair> load_dataset(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path);
    return dataset_from_json(nlohmann::json::parse(is));
}

} // namespace dpgm
