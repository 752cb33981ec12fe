#include "tomigo/schema.hpp"

#include <algorithm>

#include "tomigo/error.hpp"

namespace tomigo {

using nlohmann::json;

std::string_view role_name(NodeRole role) {
    switch (role) {
        case NodeRole::Purpose: return "Purpose";
        case NodeRole::Concepts: return "Concepts";
        case NodeRole::Content: return "Content";
        case NodeRole::Stylistic: return "Stylistic";
    }
    return "?";
}

NodeRole parse_role(std::string_view name) {
    for (NodeRole r : kAllRoles) {
        if (role_name(r) == name) return r;
    }
    throw Error(Errc::InvalidRole, "unknown role '" + std::string(name) + "'");
}

std::string_view typicality_name(EdgeTypicality t) {
    switch (t) {
        case EdgeTypicality::Typical: return "Typical";
        case EdgeTypicality::AtypicalDirection: return "AtypicalDirection";
        case EdgeTypicality::AtypicalIntraRole: return "AtypicalIntraRole";
        case EdgeTypicality::UnknownType: return "UnknownType";
    }
    return "?";
}

SchemaDef::SchemaDef(std::vector<NodeTypeDef> types, std::vector<std::pair<std::string, std::string>> intra_role_pairs)
    : types_(std::move(types)), intra_pairs_(std::move(intra_role_pairs)) {}

const NodeTypeDef* SchemaDef::find(std::string_view key) const noexcept {
    auto it = std::find_if(types_.begin(), types_.end(), [&](const NodeTypeDef& t) { return t.key == key; });
    return it == types_.end() ? nullptr : &*it;
}

std::optional<NodeRole> SchemaDef::role_of(std::string_view key) const noexcept {
    if (const auto* t = find(key)) return t->role;
    return std::nullopt;
}

namespace {

NodeTypeDef builtin(std::string_view key, NodeRole role, std::string description,
                    std::vector<std::string> examples) {
    return NodeTypeDef{std::string(key), role, std::move(description), std::move(examples), true};
}

SchemaDef make_builtin_schema() {
    std::vector<NodeTypeDef> t;
    t.push_back(builtin(types::SubjectiveImpression, NodeRole::Purpose,
                        "Relates to how the design is interpreted subjectively. These could be moods which describe an "
                        "emotional response, ambiance related to a social or cultural setting evoked, or character "
                        "expressed by the design.",
                        {"mood", "ambiance", "character"}));
    t.push_back(builtin(types::Function, NodeRole::Purpose,
                        "Refers to the purpose or intended outcome of the design, focusing on how it communicates, "
                        "appeals to specific audiences, and serves practical or thematic goals.",
                        {"communication goal", "target audience", "practical goal"}));
    t.push_back(builtin(types::ArtStyle, NodeRole::Concepts,
                        "A consistent artistic style or aesthetic approach that shapes how the visual elements are "
                        "interpreted and combined.",
                        {"comic book illustration", "flat vector style"}));
    t.push_back(builtin(types::Narratives, NodeRole::Concepts,
                        "Broader concepts, themes, or genres that group a design's underlying ideas, narratives, and "
                        "emotional tones. They provide a conceptual framework that guides the visual and contextual "
                        "elements.",
                        {"theme", "genre", "story"}));
    t.push_back(builtin(types::Motifs, NodeRole::Content,
                        "Visual elements within a design that serve as objects, symbols, or shapes to convey meaning, "
                        "enhance the narrative, or provide decorative details. Subcategories include the main subject "
                        "and its expression, decorative objects, and structures such as borders.",
                        {"main subject", "decorative objects", "borders"}));
    t.push_back(builtin(types::Composition, NodeRole::Content,
                        "Positioning and sizing of the visual elements, including foreground, middle-ground, and "
                        "background.",
                        {"foreground", "middle-ground", "background"}));
    t.push_back(builtin(types::VerbalElements, NodeRole::Content,
                        "Refers to the verbal contents and contains considerations of what information is displayed in "
                        "titles or other texts, as well as diction and verbal tone.",
                        {"title", "diction", "verbal tone"}));
    t.push_back(builtin(types::Colors, NodeRole::Stylistic,
                        "The palette of colors used in the design, with subcategories describing specific inspirational "
                        "features within the palette (colorfulness, contrasts, lightness, chroma) or specific "
                        "application areas (primary colors, background colors, object colors).",
                        {"colorfulness", "contrasts", "lightness", "chroma", "primary colors", "background colors",
                         "object colors"}));
    t.push_back(builtin(types::Typography, NodeRole::Stylistic,
                        "The visual and aesthetic characteristics of text in terms of font families and styling, custom "
                        "lettering, or hand-drawn styles.",
                        {"font family", "custom lettering", "hand-drawn style"}));
    t.push_back(builtin(types::Textures, NodeRole::Stylistic, "Surface qualities of motifs and backgrounds.",
                        {"surface quality"}));
    return SchemaDef(std::move(t), {{std::string(types::Colors), std::string(types::Typography)},
                                    {std::string(types::Composition), std::string(types::Motifs)}});
}

}  // namespace

const SchemaDef& builtin_schema() {
    static const SchemaDef schema = make_builtin_schema();
    return schema;
}

EdgeTypicality classify_edge_typicality(const SchemaDef& schema, std::string_view source_type,
                                        std::string_view target_type) {
    auto source = schema.role_of(source_type);
    auto target = schema.role_of(target_type);
    if (!source || !target) return EdgeTypicality::UnknownType;
    int rs = role_rank(*source);
    int rt = role_rank(*target);
    if (rs < rt) return EdgeTypicality::Typical;
    if (rs > rt) return EdgeTypicality::AtypicalDirection;
    const auto& pairs = schema.intra_role_typical_pairs();
    bool listed = std::any_of(pairs.begin(), pairs.end(),
                              [&](const auto& p) { return p.first == source_type && p.second == target_type; });
    return listed ? EdgeTypicality::Typical : EdgeTypicality::AtypicalIntraRole;
}

SchemaDef register_custom_type(const SchemaDef& schema, NodeTypeDef def) {
    if (role_rank(def.role) < 0) throw Error(Errc::InvalidRole, "custom type '" + def.key + "' has no valid role");
    if (def.key.empty()) throw Error(Errc::InvalidRequest, "custom type key must be non-empty");
    if (schema.contains(def.key)) throw Error(Errc::DuplicateTypeKey, "type '" + def.key + "' already exists");
    def.builtin = false;
    auto types = schema.types();
    types.push_back(std::move(def));
    return SchemaDef(std::move(types), schema.intra_role_typical_pairs());
}

json schema_to_json(const SchemaDef& schema) {
    json types = json::array();
    for (const auto& t : schema.types()) {
        types.push_back({{"key", t.key},
                         {"role", role_name(t.role)},
                         {"description", t.description},
                         {"examples", t.example_phrases},
                         {"builtin", t.builtin}});
    }
    json pairs = json::array();
    for (const auto& [a, b] : schema.intra_role_typical_pairs()) pairs.push_back({a, b});
    return {{"types", std::move(types)}, {"intra_role_typical_pairs", std::move(pairs)}};
}

std::string export_schema(const SchemaDef& schema) { return schema_to_json(schema).dump(2) + "\n"; }

SchemaDef import_schema(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(Errc::ParseError, e.what());
    }
    try {
        const SchemaDef& base = builtin_schema();
        SchemaDef out = base;
        for (const auto& entry : doc.at("types")) {
            NodeTypeDef def;
            def.key = entry.at("key").get<std::string>();
            def.role = parse_role(entry.at("role").get<std::string>());
            def.description = entry.value("description", std::string{});
            def.example_phrases = entry.value("examples", std::vector<std::string>{});
            bool is_builtin = entry.value("builtin", false);
            if (const auto* known = base.find(def.key)) {
                if (known->role != def.role) {
                    throw Error(Errc::IntegrityError, "builtin type '" + def.key + "' has a different role");
                }
                continue;
            }
            if (is_builtin) throw Error(Errc::IntegrityError, "'" + def.key + "' is not a builtin type");
            out = register_custom_type(out, std::move(def));
        }
        return out;
    } catch (const json::exception& e) {
        throw Error(Errc::ParseError, e.what());
    }
}

}  // namespace tomigo
