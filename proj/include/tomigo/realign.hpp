#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "tomigo/graph.hpp"
#include "tomigo/provider.hpp"
#include "tomigo/schema.hpp"

namespace tomigo {

enum class LineageKind { GenerateNew, Update, ApplyNode };

std::string_view lineage_kind_name(LineageKind kind);

struct Lineage {
    LineageKind kind = LineageKind::GenerateNew;
    std::string parent_id;  // Update, ApplyNode
    NodeId node_id;         // ApplyNode

    friend bool operator==(const Lineage&, const Lineage&) = default;
};

struct DesignArtifact {
    std::string id;
    Image image;
    std::uint64_t graph_version = 0;
    std::set<NodeId> used_node_ids;
    Lineage lineage;
    std::int64_t created_at = 0;
};

// Image bytes are not part of the JSON form; it carries the sha256 instead.
nlohmann::json artifact_to_json(const DesignArtifact& a);
DesignArtifact artifact_from_json(const nlohmann::json& j);

struct NodeGap {
    NodeId node_id;
    std::string gap;
    std::string instruction;
};

// Identity and timestamp for a new artifact, chosen by the caller.
struct ArtifactStamp {
    std::string id;
    std::int64_t created_at = 0;
};

// A new artifact together with the graph after its nodes were marked clean.
struct GenerationResult {
    DesignArtifact artifact;
    ConceptGraph graph;
    std::string prompt;
};

// Everything except Function nodes: SubjectiveImpression first, then
// Concepts, Content, Stylistic; ties by node id.
std::vector<Node> select_visual_nodes(const ConceptGraph& graph, const SchemaDef& schema);

// Deterministic prompt; throws Error{EmptyConcept} without visual nodes.
std::string build_generation_prompt(const ConceptGraph& graph, const SchemaDef& schema);

GenerationResult generate_design(Provider& provider, const ConceptGraph& graph, const SchemaDef& schema,
                                 const std::vector<Image>& reference_images, const ArtifactStamp& stamp);

// Generates straight from the brief, bypassing the graph; for comparison demos.
DesignArtifact generate_baseline_design(Provider& provider, const std::string& design_type,
                                        const std::string& brief_text, const std::vector<Image>& reference_images,
                                        std::uint64_t graph_version, const ArtifactStamp& stamp);

struct GapAnalysis {
    std::vector<NodeGap> gaps;
    std::vector<std::string> warnings;
};

GapAnalysis gap_analysis(Provider& provider, const DesignArtifact& design, const ConceptGraph& graph,
                         const SchemaDef& schema);

// Throws Error{PreconditionFailed} for an empty gap list.
GenerationResult update_design(Provider& provider, const DesignArtifact& design, const std::vector<NodeGap>& gaps,
                               const ConceptGraph& graph, const ArtifactStamp& stamp);

// Throws Error{MissingNode} when node_id is not in the graph.
GenerationResult apply_node_to_design(Provider& provider, const DesignArtifact& design, const ConceptGraph& graph,
                                      const NodeId& node_id, const ArtifactStamp& stamp);

// `id` followed by its ancestors (parent first), ending at a GenerateNew root.
// Throws Error{IntegrityError} on a missing parent or a cycle.
std::vector<std::string> lineage_chain(const std::vector<DesignArtifact>& designs, const std::string& id);

}  // namespace tomigo
