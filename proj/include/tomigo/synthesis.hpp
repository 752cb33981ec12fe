#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tomigo/graph.hpp"
#include "tomigo/provider.hpp"
#include "tomigo/schema.hpp"

namespace tomigo {

struct DesignBrief {
    std::string design_type;
    std::string text;
};

// Indices are contiguous from 0.
using ImageSet = std::vector<Image>;

// Brief span (verbatim, as reported by the provider) -> node id.
using CoverageMap = std::map<std::string, NodeId>;

enum class ViolationKind { ImageUnrepresented, CoverageSpanNotInBrief, CoverageNodeMissing, NoProvenance };

std::string_view violation_kind_name(ViolationKind kind);

struct ConstraintViolation {
    ViolationKind kind;
    std::string detail;
    std::optional<std::size_t> image_index;
    std::string span;
    NodeId node;
};

struct ConstraintReport {
    std::vector<ConstraintViolation> violations;
    // True only when a non-empty coverage map was supplied and every entry held.
    // Brief coverage is never claimed without one.
    bool coverage_verified = false;

    bool empty() const noexcept { return violations.empty(); }
    std::vector<ViolationKind> kinds() const;
    std::string describe() const;
};

nlohmann::json constraint_report_to_json(const ConstraintReport& report);

// Case-insensitive, whitespace-normalised substring test.
bool brief_contains_span(std::string_view brief, std::string_view span);

ConstraintReport check_synthesis_constraints(const ConceptGraph& graph, const DesignBrief& brief,
                                             std::size_t image_count, const CoverageMap& coverage);

struct ImageAnalysis {
    ConceptGraph graph;
    std::vector<std::string> warnings;
};

// One provider call (plus one reformat retry) producing a per-image graph
// whose nodes all cite the image. Throws EmptyGraph / MalformedOutput / ProviderError.
ImageAnalysis analyze_image(Provider& provider, const SchemaDef& schema, const Image& image);

inline constexpr int kDefaultMaxRepairRounds = 2;

struct SynthesisResult {
    ConceptGraph graph;
    ConstraintReport report;
    CoverageMap coverage;
    int rounds = 0;     // provider calls made
    int best_round = 0; // 0-based round that produced `graph`
    std::vector<std::string> warnings;
};

// Unified graph from brief + images + per-image graphs, with bounded repair.
// Makes at most 1 + max_repair_rounds provider calls. Ids are issued from
// `ids` (advanced past the returned graph) or from n1 when null.
SynthesisResult synthesize_concept(Provider& provider, const SchemaDef& schema, const DesignBrief& brief,
                                   const ImageSet& images, const std::vector<ConceptGraph>& per_image,
                                   int max_repair_rounds = kDefaultMaxRepairRounds, NodeIdAllocator* ids = nullptr);

}  // namespace tomigo
