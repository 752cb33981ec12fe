#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "tomigo/dialogue.hpp"
#include "tomigo/provider.hpp"
#include "tomigo/realign.hpp"
#include "tomigo/store.hpp"
#include "tomigo/synthesis.hpp"

namespace tomigo {

struct ServiceOptions {
    int max_repair_rounds = kDefaultMaxRepairRounds;
    std::size_t history_window = kDefaultHistoryWindow;
    std::size_t question_budget = kDefaultQuestionBudget;
    // Number of earlier questions whose targets count as recently asked.
    std::size_t recent_question_window = 3;
    std::function<std::int64_t()> clock;  // ms since epoch; system clock when empty
};

struct PatchOutcome {
    ConceptGraph graph;
    ConflictReport conflicts;
};

struct MessageOutcome {
    GraphPatch patch;
    ConflictReport conflicts;
    std::vector<NodeId> changed_node_ids;
    std::string summary;
    std::vector<std::string> warnings;
};

struct UpdateOutcome {
    std::string design_id;  // unchanged when already aligned
    std::vector<NodeGap> gaps;
    bool aligned = false;
};

struct FullValidation {
    ValidationReport graph;
    std::vector<std::string> provenance;

    bool ok() const noexcept { return graph.ok() && provenance.empty(); }
};

// Project-level operations shared by the REST API and the CLI. Each mutating
// call holds the project's exclusive claim for its whole duration; a second
// concurrent mutation fails with ConcurrentMutation.
class Service {
public:
    Service(ProjectStore& store, Provider& provider, ServiceOptions options = {});

    std::string create_project(const DesignBrief& brief, const ImageSet& images = {},
                               std::optional<std::filesystem::path> dir = {});
    std::size_t add_image(const std::string& id, std::string bytes, std::string media_type = {});
    SynthesisResult synthesize(const std::string& id);
    std::shared_ptr<const Project> snapshot(const std::string& id) const;
    PatchOutcome patch_graph(const std::string& id, GraphPatch patch);
    MessageOutcome handle_user_message(const std::string& id, const std::string& text);
    Question next_question(const std::string& id);
    std::string generate(const std::string& id, bool baseline = false);
    UpdateOutcome update_design(const std::string& id, const std::string& design_id);
    std::string apply_node(const std::string& id, const std::string& design_id, const NodeId& node_id);
    Image design_image(const std::string& id, const std::string& design_id) const;
    SchemaDef register_type(const std::string& id, NodeTypeDef def);
    FullValidation validate(const std::string& id) const;
    std::string export_graph(const std::string& id) const;

    ProjectStore& store() noexcept { return store_; }
    Provider& provider() noexcept { return provider_; }

private:
    std::int64_t now() const;
    void push_graph(Project& p, ConceptGraph g) const;
    ArtifactStamp stamp(const Project& p) const;

    ProjectStore& store_;
    Provider& provider_;
    ServiceOptions options_;
};

}  // namespace tomigo
