#include "tomigo/prompts.hpp"

#include <nlohmann/json.hpp>

namespace tomigo::prompts {

std::string schema_definitions(const SchemaDef& schema) {
    std::string out;
    for (NodeRole role : kAllRoles) {
        out += std::string(role_name(role)) + ":\n";
        for (const auto& t : schema.types()) {
            if (t.role == role) out += "- " + t.key + ": " + t.description + "\n";
        }
    }
    out += "Edges point from the more granular decision to the more holistic one it supports "
           "(Stylistic -> Content -> Concepts -> Purpose). Within a role, typical edges are:";
    for (const auto& [a, b] : schema.intra_role_typical_pairs()) out += " " + a + "->" + b;
    out += ".\n";
    return out;
}

std::string graph_view(const ConceptGraph& graph) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : graph.nodes) {
        nlohmann::json jn = {{"id", n.id}, {"type", n.type_key}, {"description", n.description}};
        if (n.locked) jn["locked"] = true;
        nodes.push_back(std::move(jn));
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : graph.edges) edges.push_back({{"source", e.source}, {"target", e.target}, {"reason", e.reason}});
    return nlohmann::json{{"nodes", nodes}, {"edges", edges}}.dump(-1, ' ', false,
                                                                   nlohmann::json::error_handler_t::replace);
}

}  // namespace tomigo::prompts
