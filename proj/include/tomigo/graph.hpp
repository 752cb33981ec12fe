#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "tomigo/schema.hpp"

namespace tomigo {

using NodeId = std::string;

enum class ProvenanceKind { BriefQuote, ImageRef, UserEdit, SystemInference };

std::string_view provenance_kind_name(ProvenanceKind kind);
ProvenanceKind parse_provenance_kind(std::string_view name);

// detail holds the verbatim brief quote, the image index (decimal), or free text.
struct Provenance {
    ProvenanceKind kind = ProvenanceKind::SystemInference;
    std::string detail;

    static Provenance brief_quote(std::string quote) { return {ProvenanceKind::BriefQuote, std::move(quote)}; }
    static Provenance image(std::size_t index) { return {ProvenanceKind::ImageRef, std::to_string(index)}; }
    static Provenance user_edit(std::string note = {}) { return {ProvenanceKind::UserEdit, std::move(note)}; }
    static Provenance inferred(std::string note) { return {ProvenanceKind::SystemInference, std::move(note)}; }

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct Node {
    NodeId id;
    std::string type_key;
    std::string description;
    bool locked = false;
    bool dirty = true;
    std::vector<Provenance> provenance;

    friend bool operator==(const Node&, const Node&) = default;
};

struct Edge {
    NodeId source;
    NodeId target;
    std::string reason;

    friend bool operator==(const Edge&, const Edge&) = default;
};

// Nodes are kept sorted by id and edges by (source, target) after every
// engine operation; equality ignores insertion order.
struct ConceptGraph {
    std::vector<Node> nodes;
    std::vector<Edge> edges;
    std::uint64_t version = 0;

    const Node* find(std::string_view id) const noexcept;
    Node* find(std::string_view id) noexcept;
    const Edge* find_edge(std::string_view source, std::string_view target) const noexcept;
    bool contains(std::string_view id) const noexcept { return find(id) != nullptr; }
    std::set<NodeId> node_ids() const;
    // Edges touching `id` in either direction.
    std::vector<Edge> incident_edges(std::string_view id) const;

    void normalize();

    friend bool operator==(const ConceptGraph& a, const ConceptGraph& b);
};

// Issues "n<k>" ids. Seeded past every id already seen so ids are never reused
// inside one graph lineage.
class NodeIdAllocator {
public:
    explicit NodeIdAllocator(std::uint64_t next = 1) : next_(next) {}

    NodeId issue() { return "n" + std::to_string(next_++); }
    void observe(std::string_view id);
    void observe(const ConceptGraph& graph);
    std::uint64_t next() const noexcept { return next_; }

private:
    std::uint64_t next_;
};

namespace op {
struct AddNode {
    Node node;
};
struct EditDescription {
    NodeId id;
    std::string description;
    Provenance provenance;
};
struct RemoveNode {
    NodeId id;
};
struct AddEdge {
    Edge edge;
};
struct RemoveEdge {
    NodeId source;
    NodeId target;
};
struct SetLock {
    NodeId id;
    bool locked = true;
};
}  // namespace op

using PatchOp = std::variant<op::AddNode, op::EditDescription, op::RemoveNode, op::AddEdge, op::RemoveEdge, op::SetLock>;

struct GraphPatch {
    std::vector<PatchOp> ops;

    bool empty() const noexcept { return ops.empty(); }
};

std::string_view op_name(const PatchOp& op);
// Node id an op touches (source for edge ops).
NodeId op_subject(const PatchOp& op);

enum class ConflictReason { LockedNode, MissingNode, DuplicateId, DanglingEdge, SelfLoop, MissingEdge, InvalidContent,
                            UnknownType };

std::string_view conflict_reason_name(ConflictReason reason);

struct RejectedOp {
    std::size_t index = 0;
    PatchOp op;
    ConflictReason reason = ConflictReason::MissingNode;
};

struct ConflictReport {
    std::vector<RejectedOp> rejected;

    bool empty() const noexcept { return rejected.empty(); }
    std::vector<ConflictReason> reasons() const;
};

struct PatchResult {
    ConceptGraph graph;
    ConflictReport conflicts;
    // Indices into patch.ops that were applied.
    std::vector<std::size_t> applied;
};

// Pure. Applies admissible ops in order and reports the rest. When a schema is
// given, AddNode with an unregistered type_key is rejected as UnknownType.
PatchResult apply_patch(const ConceptGraph& graph, const GraphPatch& patch, const SchemaDef* schema = nullptr);

enum class IssueCode {
    // errors
    DuplicateId,
    EmptyId,
    DanglingEdge,
    SelfLoop,
    DuplicateEdge,
    EmptyDescription,
    EmptyReason,
    UnknownType,
    // warnings
    AtypicalDirection,
    AtypicalIntraRole,
    IsolatedNode,
};

std::string_view issue_code_name(IssueCode code);

struct ValidationIssue {
    IssueCode code;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationIssue> errors;
    std::vector<ValidationIssue> warnings;

    bool ok() const noexcept { return errors.empty(); }
    std::vector<IssueCode> error_codes() const;
    std::vector<IssueCode> warning_codes() const;
};

ValidationReport validate_graph(const ConceptGraph& graph, const SchemaDef& schema);

// Checks provenance against project inputs: BriefQuote must be a verbatim
// substring of the brief, ImageRef must index an existing image.
std::vector<std::string> check_provenance(const ConceptGraph& graph, std::string_view brief_text,
                                          std::size_t image_count);

// Clears dirty flags of the listed nodes. Throws Error{MissingNode}.
// An empty set is a no-op (version unchanged).
ConceptGraph mark_generated(const ConceptGraph& graph, const std::set<NodeId>& used_node_ids);

nlohmann::json graph_to_json(const ConceptGraph& graph);
// Structural checks only; throws Error{ParseError} or Error{IntegrityError}.
ConceptGraph graph_from_json(const nlohmann::json& doc);

std::string serialize_canonical(const ConceptGraph& graph);
ConceptGraph deserialize(std::string_view bytes);

nlohmann::json patch_op_to_json(const PatchOp& op);
PatchOp patch_op_from_json(const nlohmann::json& doc);
nlohmann::json patch_to_json(const GraphPatch& patch);
GraphPatch patch_from_json(const nlohmann::json& doc);
nlohmann::json conflicts_to_json(const ConflictReport& report);

inline constexpr std::string_view kGraphFileExtension = ".cgraph.json";
inline constexpr std::string_view kGraphSchemaVersion = "1";

}  // namespace tomigo
