#include "tomigo/graph.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include "tomigo/error.hpp"

namespace tomigo {

using nlohmann::json;

std::string_view provenance_kind_name(ProvenanceKind kind) {
    switch (kind) {
        case ProvenanceKind::BriefQuote: return "BriefQuote";
        case ProvenanceKind::ImageRef: return "ImageRef";
        case ProvenanceKind::UserEdit: return "UserEdit";
        case ProvenanceKind::SystemInference: return "SystemInference";
    }
    return "?";
}

ProvenanceKind parse_provenance_kind(std::string_view name) {
    for (auto k : {ProvenanceKind::BriefQuote, ProvenanceKind::ImageRef, ProvenanceKind::UserEdit,
                   ProvenanceKind::SystemInference}) {
        if (provenance_kind_name(k) == name) return k;
    }
    throw Error(Errc::ParseError, "unknown provenance kind '" + std::string(name) + "'");
}

const Node* ConceptGraph::find(std::string_view id) const noexcept {
    auto it = std::find_if(nodes.begin(), nodes.end(), [&](const Node& n) { return n.id == id; });
    return it == nodes.end() ? nullptr : &*it;
}

Node* ConceptGraph::find(std::string_view id) noexcept {
    auto it = std::find_if(nodes.begin(), nodes.end(), [&](const Node& n) { return n.id == id; });
    return it == nodes.end() ? nullptr : &*it;
}

const Edge* ConceptGraph::find_edge(std::string_view source, std::string_view target) const noexcept {
    auto it = std::find_if(edges.begin(), edges.end(),
                           [&](const Edge& e) { return e.source == source && e.target == target; });
    return it == edges.end() ? nullptr : &*it;
}

std::set<NodeId> ConceptGraph::node_ids() const {
    std::set<NodeId> ids;
    for (const auto& n : nodes) ids.insert(n.id);
    return ids;
}

std::vector<Edge> ConceptGraph::incident_edges(std::string_view id) const {
    std::vector<Edge> out;
    for (const auto& e : edges) {
        if (e.source == id || e.target == id) out.push_back(e);
    }
    return out;
}

void ConceptGraph::normalize() {
    std::stable_sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.id < b.id; });
    std::stable_sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        return std::tie(a.source, a.target) < std::tie(b.source, b.target);
    });
}

bool operator==(const ConceptGraph& a, const ConceptGraph& b) {
    if (a.version != b.version || a.nodes.size() != b.nodes.size() || a.edges.size() != b.edges.size()) return false;
    ConceptGraph x = a;
    ConceptGraph y = b;
    x.normalize();
    y.normalize();
    return x.nodes == y.nodes && x.edges == y.edges;
}

void NodeIdAllocator::observe(std::string_view id) {
    if (id.size() < 2 || id.front() != 'n') return;
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(id.data() + 1, id.data() + id.size(), value);
    if (ec == std::errc{} && ptr == id.data() + id.size() && value >= next_) next_ = value + 1;
}

void NodeIdAllocator::observe(const ConceptGraph& graph) {
    for (const auto& n : graph.nodes) observe(n.id);
}

std::string_view op_name(const PatchOp& op) {
    struct Visitor {
        std::string_view operator()(const op::AddNode&) const { return "add_node"; }
        std::string_view operator()(const op::EditDescription&) const { return "edit_description"; }
        std::string_view operator()(const op::RemoveNode&) const { return "remove_node"; }
        std::string_view operator()(const op::AddEdge&) const { return "add_edge"; }
        std::string_view operator()(const op::RemoveEdge&) const { return "remove_edge"; }
        std::string_view operator()(const op::SetLock&) const { return "set_lock"; }
    };
    return std::visit(Visitor{}, op);
}

NodeId op_subject(const PatchOp& op) {
    struct Visitor {
        NodeId operator()(const op::AddNode& o) const { return o.node.id; }
        NodeId operator()(const op::EditDescription& o) const { return o.id; }
        NodeId operator()(const op::RemoveNode& o) const { return o.id; }
        NodeId operator()(const op::AddEdge& o) const { return o.edge.source; }
        NodeId operator()(const op::RemoveEdge& o) const { return o.source; }
        NodeId operator()(const op::SetLock& o) const { return o.id; }
    };
    return std::visit(Visitor{}, op);
}

std::string_view conflict_reason_name(ConflictReason reason) {
    switch (reason) {
        case ConflictReason::LockedNode: return "LockedNode";
        case ConflictReason::MissingNode: return "MissingNode";
        case ConflictReason::DuplicateId: return "DuplicateId";
        case ConflictReason::DanglingEdge: return "DanglingEdge";
        case ConflictReason::SelfLoop: return "SelfLoop";
        case ConflictReason::MissingEdge: return "MissingEdge";
        case ConflictReason::InvalidContent: return "InvalidContent";
        case ConflictReason::UnknownType: return "UnknownType";
    }
    return "?";
}

std::vector<ConflictReason> ConflictReport::reasons() const {
    std::vector<ConflictReason> out;
    for (const auto& r : rejected) out.push_back(r.reason);
    return out;
}

namespace {

// Returns the rejection reason, or nullopt after applying the op to `g`.
class PatchApplier {
public:
    PatchApplier(ConceptGraph& g, const SchemaDef* schema) : g_(g), schema_(schema) {}

    std::optional<ConflictReason> operator()(const op::AddNode& o) {
        if (o.node.id.empty() || o.node.description.empty()) return ConflictReason::InvalidContent;
        if (g_.contains(o.node.id)) return ConflictReason::DuplicateId;
        if (schema_ && !schema_->contains(o.node.type_key)) return ConflictReason::UnknownType;
        Node n = o.node;
        n.dirty = true;
        g_.nodes.push_back(std::move(n));
        return std::nullopt;
    }

    std::optional<ConflictReason> operator()(const op::EditDescription& o) {
        Node* n = g_.find(o.id);
        if (!n) return ConflictReason::MissingNode;
        if (n->locked) return ConflictReason::LockedNode;
        if (o.description.empty()) return ConflictReason::InvalidContent;
        n->description = o.description;
        if (std::find(n->provenance.begin(), n->provenance.end(), o.provenance) == n->provenance.end()) {
            n->provenance.push_back(o.provenance);
        }
        n->dirty = true;
        return std::nullopt;
    }

    std::optional<ConflictReason> operator()(const op::RemoveNode& o) {
        const Node* n = g_.find(o.id);
        if (!n) return ConflictReason::MissingNode;
        if (n->locked) return ConflictReason::LockedNode;
        std::erase_if(g_.edges, [&](const Edge& e) { return e.source == o.id || e.target == o.id; });
        std::erase_if(g_.nodes, [&](const Node& x) { return x.id == o.id; });
        return std::nullopt;
    }

    std::optional<ConflictReason> operator()(const op::AddEdge& o) {
        if (o.edge.source == o.edge.target) return ConflictReason::SelfLoop;
        if (!g_.contains(o.edge.source) || !g_.contains(o.edge.target)) return ConflictReason::DanglingEdge;
        if (o.edge.reason.empty()) return ConflictReason::InvalidContent;
        for (auto& e : g_.edges) {
            if (e.source == o.edge.source && e.target == o.edge.target) {
                e.reason = o.edge.reason;
                return std::nullopt;
            }
        }
        g_.edges.push_back(o.edge);
        return std::nullopt;
    }

    std::optional<ConflictReason> operator()(const op::RemoveEdge& o) {
        auto removed = std::erase_if(g_.edges, [&](const Edge& e) { return e.source == o.source && e.target == o.target; });
        if (removed == 0) return ConflictReason::MissingEdge;
        return std::nullopt;
    }

    std::optional<ConflictReason> operator()(const op::SetLock& o) {
        Node* n = g_.find(o.id);
        if (!n) return ConflictReason::MissingNode;
        n->locked = o.locked;
        return std::nullopt;
    }

private:
    ConceptGraph& g_;
    const SchemaDef* schema_;
};

}  // namespace

PatchResult apply_patch(const ConceptGraph& graph, const GraphPatch& patch, const SchemaDef* schema) {
    PatchResult result{graph, {}, {}};
    PatchApplier applier(result.graph, schema);
    for (std::size_t i = 0; i < patch.ops.size(); ++i) {
        if (auto reason = std::visit(applier, patch.ops[i])) {
            result.conflicts.rejected.push_back({i, patch.ops[i], *reason});
        } else {
            result.applied.push_back(i);
        }
    }
    if (!result.applied.empty()) ++result.graph.version;
    result.graph.normalize();
    return result;
}

std::string_view issue_code_name(IssueCode code) {
    switch (code) {
        case IssueCode::DuplicateId: return "DuplicateId";
        case IssueCode::EmptyId: return "EmptyId";
        case IssueCode::DanglingEdge: return "DanglingEdge";
        case IssueCode::SelfLoop: return "SelfLoop";
        case IssueCode::DuplicateEdge: return "DuplicateEdge";
        case IssueCode::EmptyDescription: return "EmptyDescription";
        case IssueCode::EmptyReason: return "EmptyReason";
        case IssueCode::UnknownType: return "UnknownType";
        case IssueCode::AtypicalDirection: return "AtypicalDirection";
        case IssueCode::AtypicalIntraRole: return "AtypicalIntraRole";
        case IssueCode::IsolatedNode: return "IsolatedNode";
    }
    return "?";
}

std::vector<IssueCode> ValidationReport::error_codes() const {
    std::vector<IssueCode> out;
    for (const auto& e : errors) out.push_back(e.code);
    return out;
}

std::vector<IssueCode> ValidationReport::warning_codes() const {
    std::vector<IssueCode> out;
    for (const auto& w : warnings) out.push_back(w.code);
    return out;
}

namespace {

// Structural problems shared by validation and deserialization.
std::vector<ValidationIssue> structural_issues(const ConceptGraph& graph) {
    std::vector<ValidationIssue> out;
    std::map<std::string, int> seen;
    for (const auto& n : graph.nodes) {
        if (n.id.empty()) out.push_back({IssueCode::EmptyId, "node with empty id"});
        if (++seen[n.id] == 2) out.push_back({IssueCode::DuplicateId, "node id '" + n.id + "' appears more than once"});
        if (n.description.empty()) out.push_back({IssueCode::EmptyDescription, "node '" + n.id + "' has no description"});
    }
    std::set<std::pair<std::string, std::string>> pairs;
    for (const auto& e : graph.edges) {
        std::string label = "edge (" + e.source + ", " + e.target + ")";
        if (e.source == e.target) out.push_back({IssueCode::SelfLoop, label + " is a self-loop"});
        if (!seen.count(e.source) || !seen.count(e.target)) {
            out.push_back({IssueCode::DanglingEdge, label + " references a missing node"});
        }
        if (!pairs.emplace(e.source, e.target).second) out.push_back({IssueCode::DuplicateEdge, label + " is duplicated"});
        if (e.reason.empty()) out.push_back({IssueCode::EmptyReason, label + " has no reason"});
    }
    return out;
}

}  // namespace

ValidationReport validate_graph(const ConceptGraph& graph, const SchemaDef& schema) {
    ValidationReport report;
    report.errors = structural_issues(graph);
    for (const auto& n : graph.nodes) {
        if (!schema.contains(n.type_key)) {
            report.errors.push_back({IssueCode::UnknownType, "node '" + n.id + "' has unknown type '" + n.type_key + "'"});
        }
    }
    for (const auto& e : graph.edges) {
        const Node* s = graph.find(e.source);
        const Node* t = graph.find(e.target);
        if (!s || !t) continue;
        auto kind = classify_edge_typicality(schema, s->type_key, t->type_key);
        std::string label = "edge " + e.source + " (" + s->type_key + ") -> " + e.target + " (" + t->type_key + ")";
        if (kind == EdgeTypicality::AtypicalDirection) {
            report.warnings.push_back({IssueCode::AtypicalDirection, label + " points from holistic to granular"});
        } else if (kind == EdgeTypicality::AtypicalIntraRole) {
            report.warnings.push_back({IssueCode::AtypicalIntraRole, label + " is an uncommon same-role edge"});
        }
    }
    for (const auto& n : graph.nodes) {
        bool connected = std::any_of(graph.edges.begin(), graph.edges.end(),
                                     [&](const Edge& e) { return e.source == n.id || e.target == n.id; });
        if (!connected) report.warnings.push_back({IssueCode::IsolatedNode, "node '" + n.id + "' has no edges"});
    }
    return report;
}

namespace {

std::optional<std::size_t> parse_index(std::string_view text) {
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
    return value;
}

}  // namespace

std::vector<std::string> check_provenance(const ConceptGraph& graph, std::string_view brief_text,
                                          std::size_t image_count) {
    std::vector<std::string> problems;
    for (const auto& n : graph.nodes) {
        for (const auto& p : n.provenance) {
            if (p.kind == ProvenanceKind::BriefQuote && brief_text.find(p.detail) == std::string_view::npos) {
                problems.push_back("node '" + n.id + "' quotes text not in the brief: \"" + p.detail + "\"");
            }
            if (p.kind == ProvenanceKind::ImageRef) {
                auto idx = parse_index(p.detail);
                if (!idx || *idx >= image_count) {
                    problems.push_back("node '" + n.id + "' references missing image " + p.detail);
                }
            }
        }
    }
    return problems;
}

ConceptGraph mark_generated(const ConceptGraph& graph, const std::set<NodeId>& used_node_ids) {
    for (const auto& id : used_node_ids) {
        if (!graph.contains(id)) throw Error(Errc::MissingNode, "node '" + id + "' not in graph");
    }
    if (used_node_ids.empty()) return graph;
    ConceptGraph out = graph;
    for (auto& n : out.nodes) {
        if (used_node_ids.count(n.id)) n.dirty = false;
    }
    ++out.version;
    return out;
}

json graph_to_json(const ConceptGraph& graph) {
    ConceptGraph g = graph;
    g.normalize();
    json nodes = json::array();
    for (const auto& n : g.nodes) {
        json prov = json::array();
        for (const auto& p : n.provenance) prov.push_back({{"kind", provenance_kind_name(p.kind)}, {"detail", p.detail}});
        nodes.push_back({{"id", n.id},
                         {"type", n.type_key},
                         {"description", n.description},
                         {"locked", n.locked},
                         {"dirty", n.dirty},
                         {"provenance", std::move(prov)}});
    }
    json edges = json::array();
    for (const auto& e : g.edges) edges.push_back({{"source", e.source}, {"target", e.target}, {"reason", e.reason}});
    return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}, {"version", g.version}};
}

ConceptGraph graph_from_json(const json& doc) {
    ConceptGraph g;
    try {
        if (!doc.is_object()) throw Error(Errc::ParseError, "graph document must be an object");
        if (doc.contains("schema_version") && doc.at("schema_version") != kGraphSchemaVersion) {
            throw Error(Errc::ParseError, "unsupported schema_version " + doc.at("schema_version").dump());
        }
        g.version = doc.at("version").get<std::uint64_t>();
        for (const auto& jn : doc.at("nodes")) {
            Node n;
            n.id = jn.at("id").get<std::string>();
            n.type_key = jn.at("type").get<std::string>();
            n.description = jn.at("description").get<std::string>();
            n.locked = jn.value("locked", false);
            n.dirty = jn.value("dirty", true);
            if (jn.contains("provenance")) {
                for (const auto& jp : jn.at("provenance")) {
                    n.provenance.push_back({parse_provenance_kind(jp.at("kind").get<std::string>()),
                                            jp.at("detail").get<std::string>()});
                }
            }
            g.nodes.push_back(std::move(n));
        }
        for (const auto& je : doc.at("edges")) {
            g.edges.push_back({je.at("source").get<std::string>(), je.at("target").get<std::string>(),
                               je.at("reason").get<std::string>()});
        }
    } catch (const json::exception& e) {
        throw Error(Errc::ParseError, e.what());
    }
    auto issues = structural_issues(g);
    if (!issues.empty()) {
        throw Error(Errc::IntegrityError,
                    std::string(issue_code_name(issues.front().code)) + ": " + issues.front().detail);
    }
    g.normalize();
    return g;
}

std::string serialize_canonical(const ConceptGraph& graph) {
    return graph_to_json(graph).dump(-1, ' ', false, json::error_handler_t::replace) + "\n";
}

ConceptGraph deserialize(std::string_view bytes) {
    json doc;
    try {
        doc = json::parse(bytes.begin(), bytes.end());
    } catch (const json::parse_error& e) {
        throw Error(Errc::ParseError, e.what());
    }
    return graph_from_json(doc);
}

json patch_op_to_json(const PatchOp& op) {
    struct Visitor {
        json operator()(const op::AddNode& o) const {
            json prov = json::array();
            for (const auto& p : o.node.provenance) {
                prov.push_back({{"kind", provenance_kind_name(p.kind)}, {"detail", p.detail}});
            }
            return {{"op", "add_node"},
                    {"node",
                     {{"id", o.node.id},
                      {"type", o.node.type_key},
                      {"description", o.node.description},
                      {"locked", o.node.locked},
                      {"provenance", prov}}}};
        }
        json operator()(const op::EditDescription& o) const {
            return {{"op", "edit_description"},
                    {"id", o.id},
                    {"description", o.description},
                    {"provenance", {{"kind", provenance_kind_name(o.provenance.kind)}, {"detail", o.provenance.detail}}}};
        }
        json operator()(const op::RemoveNode& o) const { return {{"op", "remove_node"}, {"id", o.id}}; }
        json operator()(const op::AddEdge& o) const {
            return {{"op", "add_edge"}, {"source", o.edge.source}, {"target", o.edge.target}, {"reason", o.edge.reason}};
        }
        json operator()(const op::RemoveEdge& o) const {
            return {{"op", "remove_edge"}, {"source", o.source}, {"target", o.target}};
        }
        json operator()(const op::SetLock& o) const { return {{"op", "set_lock"}, {"id", o.id}, {"locked", o.locked}}; }
    };
    return std::visit(Visitor{}, op);
}

namespace {

Provenance provenance_from_json(const json& j, ProvenanceKind fallback) {
    if (!j.is_object()) return {fallback, {}};
    return {parse_provenance_kind(j.value("kind", std::string(provenance_kind_name(fallback)))),
            j.value("detail", std::string{})};
}

}  // namespace

PatchOp patch_op_from_json(const json& doc) {
    try {
        const std::string name = doc.at("op").get<std::string>();
        if (name == "add_node") {
            const auto& jn = doc.at("node");
            Node n;
            n.id = jn.value("id", std::string{});
            n.type_key = jn.at("type").get<std::string>();
            n.description = jn.at("description").get<std::string>();
            n.locked = jn.value("locked", false);
            if (jn.contains("provenance")) {
                for (const auto& jp : jn.at("provenance")) n.provenance.push_back(provenance_from_json(jp, ProvenanceKind::UserEdit));
            }
            return op::AddNode{std::move(n)};
        }
        if (name == "edit_description") {
            return op::EditDescription{doc.at("id").get<std::string>(), doc.at("description").get<std::string>(),
                                       provenance_from_json(doc.value("provenance", json{}), ProvenanceKind::UserEdit)};
        }
        if (name == "remove_node") return op::RemoveNode{doc.at("id").get<std::string>()};
        if (name == "add_edge") {
            return op::AddEdge{{doc.at("source").get<std::string>(), doc.at("target").get<std::string>(),
                                doc.at("reason").get<std::string>()}};
        }
        if (name == "remove_edge") {
            return op::RemoveEdge{doc.at("source").get<std::string>(), doc.at("target").get<std::string>()};
        }
        if (name == "set_lock") return op::SetLock{doc.at("id").get<std::string>(), doc.value("locked", true)};
        throw Error(Errc::ParseError, "unknown patch op '" + name + "'");
    } catch (const json::exception& e) {
        throw Error(Errc::ParseError, e.what());
    }
}

json patch_to_json(const GraphPatch& patch) {
    json ops = json::array();
    for (const auto& o : patch.ops) ops.push_back(patch_op_to_json(o));
    return {{"ops", std::move(ops)}};
}

GraphPatch patch_from_json(const json& doc) {
    if (!doc.is_object() || !doc.contains("ops") || !doc.at("ops").is_array()) {
        throw Error(Errc::ParseError, "patch document needs an \"ops\" array");
    }
    GraphPatch patch;
    for (const auto& o : doc.at("ops")) patch.ops.push_back(patch_op_from_json(o));
    return patch;
}

json conflicts_to_json(const ConflictReport& report) {
    json out = json::array();
    for (const auto& r : report.rejected) {
        out.push_back({{"index", r.index},
                       {"op", op_name(r.op)},
                       {"id", op_subject(r.op)},
                       {"reason", conflict_reason_name(r.reason)}});
    }
    return out;
}

}  // namespace tomigo
