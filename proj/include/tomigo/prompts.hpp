#pragma once

#include <string>

#include "tomigo/graph.hpp"
#include "tomigo/schema.hpp"

// Shared building blocks for the engine-authored prompt templates.
namespace tomigo::prompts {

// One line per node type: "<key> (<role>): <description>".
std::string schema_definitions(const SchemaDef& schema);
// Compact JSON view of a graph as the provider sees it (ids, types, descriptions, locks, edges).
std::string graph_view(const ConceptGraph& graph);

}  // namespace tomigo::prompts
