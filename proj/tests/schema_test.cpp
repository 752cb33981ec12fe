#include <gtest/gtest.h>

#include "tomigo/error.hpp"
#include "tomigo/schema.hpp"

namespace tomigo {
namespace {

TEST(Schema, BuiltinTypesInTableOrder) {
    std::vector<std::string> keys;
    for (const auto& t : builtin_schema().types()) keys.push_back(t.key);
    EXPECT_EQ(keys, (std::vector<std::string>{"SubjectiveImpression", "Function", "ArtStyle", "Narratives", "Motifs",
                                              "Composition", "VerbalElements", "Colors", "Typography", "Textures"}));
}

TEST(Schema, RolesAndRanks) {
    const SchemaDef& s = builtin_schema();
    EXPECT_EQ(s.role_of("Function"), NodeRole::Purpose);
    EXPECT_EQ(s.role_of("Narratives"), NodeRole::Concepts);
    EXPECT_EQ(s.role_of("VerbalElements"), NodeRole::Content);
    EXPECT_EQ(s.role_of("Textures"), NodeRole::Stylistic);
    EXPECT_FALSE(s.role_of("Animation").has_value());
    EXPECT_LT(role_rank(NodeRole::Stylistic), role_rank(NodeRole::Content));
    EXPECT_LT(role_rank(NodeRole::Content), role_rank(NodeRole::Concepts));
    EXPECT_LT(role_rank(NodeRole::Concepts), role_rank(NodeRole::Purpose));
    EXPECT_TRUE(is_holistic(NodeRole::Concepts));
    EXPECT_FALSE(is_holistic(NodeRole::Content));
}

TEST(Schema, BuiltinIsDeterministicAndMarkedBuiltin) {
    EXPECT_EQ(builtin_schema(), builtin_schema());
    for (const auto& t : builtin_schema().types()) {
        EXPECT_TRUE(t.builtin) << t.key;
        EXPECT_FALSE(t.description.empty()) << t.key;
    }
}

TEST(Schema, ParseRole) {
    EXPECT_EQ(parse_role("Stylistic"), NodeRole::Stylistic);
    try {
        parse_role("Mood");
        FAIL() << "expected InvalidRole";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::InvalidRole);
    }
}

TEST(Typicality, Examples) {
    const SchemaDef& s = builtin_schema();
    EXPECT_EQ(classify_edge_typicality(s, "Colors", "ArtStyle"), EdgeTypicality::Typical);
    EXPECT_EQ(classify_edge_typicality(s, "Colors", "Typography"), EdgeTypicality::Typical);
    EXPECT_EQ(classify_edge_typicality(s, "Function", "Textures"), EdgeTypicality::AtypicalDirection);
    EXPECT_EQ(classify_edge_typicality(s, "Composition", "Motifs"), EdgeTypicality::Typical);
    EXPECT_EQ(classify_edge_typicality(s, "Motifs", "Composition"), EdgeTypicality::AtypicalIntraRole);
    EXPECT_EQ(classify_edge_typicality(s, "Typography", "Colors"), EdgeTypicality::AtypicalIntraRole);
    EXPECT_EQ(classify_edge_typicality(s, "Colors", "Glitter"), EdgeTypicality::UnknownType);
}

TEST(Typicality, ExactlyOneDirectionAtypicalAcrossRoles) {
    const SchemaDef& s = builtin_schema();
    for (const auto& a : s.types()) {
        for (const auto& b : s.types()) {
            auto ab = classify_edge_typicality(s, a.key, b.key);
            auto ba = classify_edge_typicality(s, b.key, a.key);
            if (role_rank(a.role) == role_rank(b.role)) {
                EXPECT_NE(ab, EdgeTypicality::AtypicalDirection);
            } else {
                EXPECT_NE(ab == EdgeTypicality::AtypicalDirection, ba == EdgeTypicality::AtypicalDirection)
                    << a.key << " " << b.key;
            }
        }
    }
}

TEST(CustomTypes, RegisterAddsWithoutMutatingInput) {
    const SchemaDef& base = builtin_schema();
    SchemaDef extended = register_custom_type(base, {"Animation", NodeRole::Content, "Motion", {}, true});
    EXPECT_EQ(base.types().size(), 10u);
    EXPECT_EQ(extended.types().size(), 11u);
    EXPECT_FALSE(extended.find("Animation")->builtin);
    EXPECT_EQ(classify_edge_typicality(extended, "Animation", "Narratives"), EdgeTypicality::Typical);
    for (const auto& a : base.types()) {
        for (const auto& b : base.types()) {
            EXPECT_EQ(classify_edge_typicality(base, a.key, b.key), classify_edge_typicality(extended, a.key, b.key));
        }
    }
}

TEST(CustomTypes, DuplicateAndInvalid) {
    try {
        register_custom_type(builtin_schema(), {"Colors", NodeRole::Stylistic, "", {}, false});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::DuplicateTypeKey);
    }
    try {
        register_custom_type(builtin_schema(), {"Odd", static_cast<NodeRole>(42), "", {}, false});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::InvalidRole);
    }
}

TEST(SchemaJson, ExportImportRoundTrip) {
    SchemaDef extended = register_custom_type(builtin_schema(), {"Animation", NodeRole::Content, "Motion", {"loop"}, false});
    SchemaDef back = import_schema(export_schema(extended));
    EXPECT_EQ(back, extended);
}

TEST(SchemaJson, ImportRejectsChangedBuiltinRole) {
    auto doc = schema_to_json(builtin_schema());
    doc["types"][0]["role"] = "Stylistic";
    EXPECT_THROW(import_schema(doc.dump()), Error);
    EXPECT_THROW(import_schema("{not json"), Error);
}

}  // namespace
}  // namespace tomigo
