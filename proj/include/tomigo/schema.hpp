#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace tomigo {

// Node roles ordered from granular visual features up to holistic goals.
enum class NodeRole { Purpose, Concepts, Content, Stylistic };

inline constexpr std::array<NodeRole, 4> kAllRoles = {NodeRole::Purpose, NodeRole::Concepts, NodeRole::Content,
                                                      NodeRole::Stylistic};

// Stylistic=0, Content=1, Concepts=2, Purpose=3.
constexpr int role_rank(NodeRole role) {
    switch (role) {
        case NodeRole::Stylistic: return 0;
        case NodeRole::Content: return 1;
        case NodeRole::Concepts: return 2;
        case NodeRole::Purpose: return 3;
    }
    return -1;
}

constexpr bool is_holistic(NodeRole role) { return role == NodeRole::Purpose || role == NodeRole::Concepts; }

std::string_view role_name(NodeRole role);
// Throws Error{InvalidRole} for anything but the four role names.
NodeRole parse_role(std::string_view name);

struct NodeTypeDef {
    std::string key;
    NodeRole role = NodeRole::Content;
    std::string description;
    std::vector<std::string> example_phrases;
    bool builtin = false;

    friend bool operator==(const NodeTypeDef&, const NodeTypeDef&) = default;
};

enum class EdgeTypicality { Typical, AtypicalDirection, AtypicalIntraRole, UnknownType };

std::string_view typicality_name(EdgeTypicality t);

// Immutable vocabulary of node types. Builtin types keep their table order,
// custom types follow in registration order.
class SchemaDef {
public:
    SchemaDef() = default;
    SchemaDef(std::vector<NodeTypeDef> types, std::vector<std::pair<std::string, std::string>> intra_role_pairs);

    const std::vector<NodeTypeDef>& types() const noexcept { return types_; }
    const std::vector<std::pair<std::string, std::string>>& intra_role_typical_pairs() const noexcept {
        return intra_pairs_;
    }

    const NodeTypeDef* find(std::string_view key) const noexcept;
    bool contains(std::string_view key) const noexcept { return find(key) != nullptr; }
    std::optional<NodeRole> role_of(std::string_view key) const noexcept;

    friend bool operator==(const SchemaDef&, const SchemaDef&) = default;

private:
    std::vector<NodeTypeDef> types_;
    std::vector<std::pair<std::string, std::string>> intra_pairs_;
};

namespace types {
inline constexpr std::string_view SubjectiveImpression = "SubjectiveImpression";
inline constexpr std::string_view Function = "Function";
inline constexpr std::string_view ArtStyle = "ArtStyle";
inline constexpr std::string_view Narratives = "Narratives";
inline constexpr std::string_view Motifs = "Motifs";
inline constexpr std::string_view Composition = "Composition";
inline constexpr std::string_view VerbalElements = "VerbalElements";
inline constexpr std::string_view Colors = "Colors";
inline constexpr std::string_view Typography = "Typography";
inline constexpr std::string_view Textures = "Textures";
}  // namespace types

// The ten builtin node types with their table descriptions.
const SchemaDef& builtin_schema();

EdgeTypicality classify_edge_typicality(const SchemaDef& schema, std::string_view source_type,
                                        std::string_view target_type);

// Returns a new schema containing `def` (builtin forced false).
// Throws Error{DuplicateTypeKey} or Error{InvalidRole}.
SchemaDef register_custom_type(const SchemaDef& schema, NodeTypeDef def);

// {"types":[...], "intra_role_typical_pairs":[[a,b],...]}
nlohmann::json schema_to_json(const SchemaDef& schema);
std::string export_schema(const SchemaDef& schema);
// Builtins in the document are checked against the table; custom entries are registered.
SchemaDef import_schema(std::string_view text);

}  // namespace tomigo
