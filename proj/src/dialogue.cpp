#include "tomigo/dialogue.hpp"

#include <algorithm>
#include <map>

#include "tomigo/error.hpp"
#include "tomigo/prompts.hpp"

namespace tomigo {

using nlohmann::json;

json message_to_json(const Message& m) {
    json j = {{"author", m.author == Author::User ? "user" : "system"}, {"text", m.text}, {"timestamp", m.timestamp}};
    if (!m.edited_types.empty()) j["edited_types"] = m.edited_types;
    return j;
}

Message message_from_json(const json& j) {
    try {
        Message m;
        auto author = j.at("author").get<std::string>();
        if (author != "user" && author != "system") throw Error(Errc::ParseError, "unknown author '" + author + "'");
        m.author = author == "user" ? Author::User : Author::System;
        m.text = j.at("text").get<std::string>();
        m.timestamp = j.value("timestamp", std::int64_t{0});
        m.edited_types = j.value("edited_types", std::vector<std::string>{});
        return m;
    } catch (const json::exception& e) {
        throw Error(Errc::ParseError, e.what());
    }
}

namespace {

Shape update_shape() {
    return Shape::object(
        {required("edits", Shape::list(Shape::object({required("node", Shape::string()),
                                                      required("description", Shape::string())}))),
         required("additions", Shape::list(Shape::object({required("id", Shape::string()), required("type", Shape::string()),
                                                          required("description", Shape::string()),
                                                          optional_field("refinement", Shape::boolean())}))),
         optional_field("edges", Shape::list(Shape::object({required("source", Shape::string()),
                                                            required("target", Shape::string()),
                                                            required("reason", Shape::string())})))});
}

std::string history_text(const std::vector<Message>& history, std::size_t window) {
    std::string out;
    std::size_t first = history.size() > window ? history.size() - window : 0;
    for (std::size_t i = first; i < history.size(); ++i) {
        out += (history[i].author == Author::User ? "User: " : "Assistant: ") + history[i].text + "\n";
    }
    return out;
}

// Accumulates both stages' proposals into one patch.
class PatchBuilder {
public:
    PatchBuilder(const ConceptGraph& graph, const SchemaDef& schema, NodeIdAllocator& ids, Provenance cite)
        : graph_(graph), schema_(schema), ids_(ids), cite_(std::move(cite)) {}

    void absorb(const json& payload, std::vector<std::string>& warnings) {
        for (const auto& ja : payload.at("additions")) {
            std::string raw = ja.at("id").get<std::string>();
            std::string type = ja.at("type").get<std::string>();
            std::string description = ja.at("description").get<std::string>();
            bool refinement = ja.value("refinement", false);
            if (!schema_.contains(type)) {
                warnings.push_back("dropped addition '" + raw + "': unknown type '" + type + "'");
                continue;
            }
            if (description.empty()) {
                warnings.push_back("dropped addition '" + raw + "': empty description");
                continue;
            }
            if (refinement) {
                auto same = std::find_if(graph_.nodes.begin(), graph_.nodes.end(),
                                         [&](const Node& n) { return n.type_key == type; });
                if (same != graph_.nodes.end()) {
                    std::string base = edits_.count(same->id) ? edits_[same->id] : same->description;
                    edit(same->id, base + "; " + description);
                    new_ids_[raw] = same->id;
                    warnings.push_back("addition '" + raw + "' refines " + same->id + "; folded into an edit");
                    continue;
                }
            }
            Node n;
            n.id = ids_.issue();
            n.type_key = std::move(type);
            n.description = std::move(description);
            n.provenance.push_back(cite_);
            new_ids_[raw] = n.id;
            additions_.push_back(std::move(n));
        }
        for (const auto& je : payload.at("edits")) {
            std::string id = je.at("node").get<std::string>();
            std::string description = je.at("description").get<std::string>();
            if (auto it = new_ids_.find(id); it != new_ids_.end()) id = it->second;
            if (description.empty()) {
                warnings.push_back("dropped edit of '" + id + "': empty description");
                continue;
            }
            if (auto added = find_added(id)) {
                added->description = std::move(description);
            } else if (graph_.contains(id)) {
                edit(id, std::move(description));
            } else {
                warnings.push_back("dropped edit of unknown node '" + id + "'");
            }
        }
        if (payload.contains("edges") && payload.at("edges").is_array()) {
            for (const auto& je : payload.at("edges")) {
                std::string s = resolve(je.at("source").get<std::string>());
                std::string t = resolve(je.at("target").get<std::string>());
                std::string reason = je.at("reason").get<std::string>();
                if (s.empty() || t.empty() || s == t || reason.empty()) {
                    warnings.push_back("dropped edge " + je.at("source").get<std::string>() + "->" +
                                       je.at("target").get<std::string>());
                    continue;
                }
                edges_[{s, t}] = reason;
            }
        }
    }

    GraphPatch patch() const {
        GraphPatch p;
        for (const auto& n : additions_) p.ops.push_back(op::AddNode{n});
        for (const auto& id : edit_order_) p.ops.push_back(op::EditDescription{id, edits_.at(id), cite_});
        for (const auto& [key, reason] : edges_) p.ops.push_back(op::AddEdge{{key.first, key.second, reason}});
        return p;
    }

private:
    void edit(const NodeId& id, std::string description) {
        if (!edits_.count(id)) edit_order_.push_back(id);
        edits_[id] = std::move(description);
    }

    Node* find_added(const NodeId& id) {
        auto it = std::find_if(additions_.begin(), additions_.end(), [&](const Node& n) { return n.id == id; });
        return it == additions_.end() ? nullptr : &*it;
    }

    std::string resolve(const std::string& raw) {
        if (auto it = new_ids_.find(raw); it != new_ids_.end()) return it->second;
        if (graph_.contains(raw) || find_added(raw)) return raw;
        return {};
    }

    const ConceptGraph& graph_;
    const SchemaDef& schema_;
    NodeIdAllocator& ids_;
    Provenance cite_;
    std::vector<Node> additions_;
    std::vector<NodeId> edit_order_;
    std::map<NodeId, std::string> edits_;
    std::map<std::pair<NodeId, NodeId>, std::string> edges_;
    std::map<std::string, NodeId> new_ids_;
};

}  // namespace

Interpretation interpret_message(Provider& provider, const std::vector<Message>& history, const ConceptGraph& graph,
                                 const SchemaDef& schema, const DesignBrief& brief, NodeIdAllocator& ids,
                                 std::size_t history_window) {
    if (history.empty() || history.back().author != Author::User) {
        throw Error(Errc::PreconditionFailed, "the latest history entry must be a user message");
    }
    const Message& latest = history.back();
    Interpretation result;
    PatchBuilder builder(graph, schema, ids, Provenance::inferred(latest.text));

    ProviderRequest interpret;
    interpret.kind = RequestKind::TextStructured;
    interpret.stage = "interpret";
    interpret.expected_shape = update_shape();
    interpret.text(
        "You maintain a design concept graph that models what the user intends for their design.\n"
        "Node types:\n" + prompts::schema_definitions(schema) + "\nDesign type: " + brief.design_type +
        "\nBrief: " + brief.text + "\n\nConversation so far:\n" + history_text(history, history_window) +
        "\nCurrent graph:\n" + prompts::graph_view(graph) +
        "\n\nInterpret the intent behind the user's latest message and decide which nodes to edit or add so the "
        "graph reflects it. Prefer editing an existing node of the same type over adding a second node of that "
        "type; if you still add one that only refines an existing node, set \"refinement\": true. Do not remove "
        "nodes. New nodes need temporary ids and should be connected with edges.");
    ProviderResponse first = complete_structured(provider, interpret);
    result.warnings = first.warnings;
    builder.absorb(first.parsed, result.warnings);

    GraphPatch proposed = builder.patch();
    ConceptGraph preview = apply_patch(graph, proposed, &schema).graph;

    ProviderRequest consistency;
    consistency.kind = RequestKind::TextStructured;
    consistency.stage = "consistency";
    consistency.expected_shape = update_shape();
    consistency.text(
        "The design concept graph was just updated after the user said: \"" + latest.text + "\".\n"
        "Node types:\n" + prompts::schema_definitions(schema) + "\nUpdated graph:\n" + prompts::graph_view(preview) +
        "\n\nCheck the graph for inconsistencies introduced by this change and update related nodes to fix them. "
        "Return only the follow-up edits and additions (empty lists if everything is still aligned). Locked nodes "
        "are confirmed by the user. Do not remove nodes.");
    ProviderResponse second = complete_structured(provider, consistency);
    result.warnings.insert(result.warnings.end(), second.warnings.begin(), second.warnings.end());
    builder.absorb(second.parsed, result.warnings);

    result.patch = builder.patch();
    return result;
}

std::set<std::string> addressed_topics(const std::vector<Message>& history, const ConceptGraph& graph) {
    std::set<std::string> out;
    for (const auto& n : graph.nodes) {
        bool evidenced = std::any_of(n.provenance.begin(), n.provenance.end(), [](const Provenance& p) {
            return p.kind == ProvenanceKind::BriefQuote || p.kind == ProvenanceKind::UserEdit;
        });
        if (evidenced || n.locked) out.insert(n.type_key);
    }
    for (const auto& m : history) {
        if (m.author == Author::User) out.insert(m.edited_types.begin(), m.edited_types.end());
    }
    return out;
}

std::vector<std::string> select_question_targets(const SchemaDef& schema, const std::set<std::string>& addressed,
                                                 const std::vector<std::string>& recently_asked) {
    auto recent = [&](const std::string& key) {
        return std::find(recently_asked.begin(), recently_asked.end(), key) != recently_asked.end();
    };
    std::vector<std::string> unaddressed;
    std::string holistic;
    std::string granular;
    for (const auto& t : schema.types()) {
        if (addressed.count(t.key)) continue;
        unaddressed.push_back(t.key);
        if (recent(t.key)) continue;
        std::string& slot = is_holistic(t.role) ? holistic : granular;
        if (slot.empty()) slot = t.key;
    }
    std::vector<std::string> out;
    if (!holistic.empty()) out.push_back(holistic);
    if (!granular.empty()) out.push_back(granular);
    if (!out.empty()) return out;

    // Least recently asked: never-asked keys first, then earliest last ask.
    std::vector<std::string> pool = unaddressed;
    if (pool.empty()) {
        for (const auto& t : schema.types()) pool.push_back(t.key);
    }
    if (pool.empty()) return out;
    auto last_asked = [&](const std::string& key) -> long {
        for (long i = static_cast<long>(recently_asked.size()) - 1; i >= 0; --i) {
            if (recently_asked[static_cast<std::size_t>(i)] == key) return i;
        }
        return -1;
    };
    auto pick = std::min_element(pool.begin(), pool.end(), [&](const std::string& a, const std::string& b) {
        return last_asked(a) < last_asked(b);
    });
    out.push_back(*pick);
    return out;
}

Question generate_clarifying_question(Provider& provider, const DesignBrief& brief, const std::vector<Message>& history,
                                      const ConceptGraph& graph, const SchemaDef& schema,
                                      const std::vector<std::string>& targets, std::size_t char_budget) {
    if (targets.empty()) throw Error(Errc::PreconditionFailed, "question needs at least one target type");
    std::string target_lines;
    for (const auto& key : targets) {
        const NodeTypeDef* def = schema.find(key);
        if (!def) throw Error(Errc::PreconditionFailed, "unknown target type '" + key + "'");
        target_lines += "- " + key + " (" + std::string(role_name(def->role)) + "): " + def->description + "\n";
    }

    ProviderRequest req;
    req.kind = RequestKind::TextStructured;
    req.stage = "question";
    req.expected_shape = Shape::object(
        {required("text", Shape::string()), required("target_types", Shape::list(Shape::string()))});
    req.text("Ask the user one clarifying question about their design.\nDesign type: " + brief.design_type +
             "\nBrief: " + brief.text + "\n\nRecent conversation:\n" + history_text(history, kDefaultHistoryWindow) +
             "\nCurrent design concept graph:\n" + prompts::graph_view(graph) +
             "\n\nThe question should target these topics, which the user has not addressed yet:\n" + target_lines +
             "\nGuidelines: bridge between the holistic goal and the concrete visual decision; help the user think "
             "about how their communicative goals and concepts turn into visuals; keep it concise (at most " +
             std::to_string(char_budget) +
             " characters) and accessible to novices; stay open rather than leading. Echo the targeted type keys in "
             "\"target_types\".");

    StructuredOptions options;
    options.validator = [&](const json& v) -> std::optional<std::string> {
        const auto text = v.at("text").get<std::string>();
        if (text.empty()) return "text: empty question";
        if (text.size() > char_budget) return "text: longer than " + std::to_string(char_budget) + " characters";
        const auto& types = v.at("target_types");
        if (types.empty()) return "target_types: empty";
        for (const auto& t : types) {
            if (std::find(targets.begin(), targets.end(), t.get<std::string>()) == targets.end()) {
                return "target_types: '" + t.get<std::string>() + "' was not requested";
            }
        }
        return std::nullopt;
    };
    ProviderResponse resp = complete_structured(provider, req, options);
    return Question{resp.parsed.at("text").get<std::string>(),
                    resp.parsed.at("target_types").get<std::vector<std::string>>()};
}

}  // namespace tomigo
