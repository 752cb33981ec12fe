#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "tomigo/graph.hpp"
#include "tomigo/provider.hpp"
#include "tomigo/schema.hpp"
#include "tomigo/synthesis.hpp"

namespace tomigo {

enum class Author { User, System };

struct Message {
    Author author = Author::User;
    std::string text;
    std::int64_t timestamp = 0;  // ms since epoch
    // Node types whose nodes were edited by the patch applied for this message.
    std::vector<std::string> edited_types;

    friend bool operator==(const Message&, const Message&) = default;
};

nlohmann::json message_to_json(const Message& m);
Message message_from_json(const nlohmann::json& j);

struct Question {
    std::string text;
    std::vector<std::string> target_type_keys;

    friend bool operator==(const Question&, const Question&) = default;
};

inline constexpr std::size_t kDefaultHistoryWindow = 20;
inline constexpr std::size_t kDefaultQuestionBudget = 280;

struct Interpretation {
    GraphPatch patch;
    std::vector<std::string> warnings;
};

// Two provider stages ("interpret", then "consistency") merged into one
// unapplied patch. Edits aimed at locked nodes stay in the patch so that
// apply_patch reports them. Never proposes removals.
Interpretation interpret_message(Provider& provider, const std::vector<Message>& history, const ConceptGraph& graph,
                                 const SchemaDef& schema, const DesignBrief& brief, NodeIdAllocator& ids,
                                 std::size_t history_window = kDefaultHistoryWindow);

// Types with brief/user evidence, a locked node, or a message-driven edit.
std::set<std::string> addressed_topics(const std::vector<Message>& history, const ConceptGraph& graph);

// One holistic and one granular unaddressed key, skipping recently asked keys,
// in schema (table) order. `recently_asked` is oldest first.
std::vector<std::string> select_question_targets(const SchemaDef& schema, const std::set<std::string>& addressed,
                                                 const std::vector<std::string>& recently_asked);

Question generate_clarifying_question(Provider& provider, const DesignBrief& brief, const std::vector<Message>& history,
                                      const ConceptGraph& graph, const SchemaDef& schema,
                                      const std::vector<std::string>& targets,
                                      std::size_t char_budget = kDefaultQuestionBudget);

}  // namespace tomigo
