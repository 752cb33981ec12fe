#include <gtest/gtest.h>

#include "test_support.hpp"
#include "tomigo/error.hpp"
#include "tomigo/mock_provider.hpp"
#include "tomigo/synthesis.hpp"

namespace tomigo {
namespace {

using nlohmann::json;

Node cited(std::string id, std::string type, std::vector<Provenance> provenance) {
    Node n;
    n.id = std::move(id);
    n.type_key = std::move(type);
    n.description = "something";
    n.provenance = std::move(provenance);
    return n;
}

// Per-image graphs as the engine would have produced them, one per fixture image.
std::vector<ConceptGraph> analyses(Provider& provider, const ImageSet& images) {
    std::vector<ConceptGraph> out;
    for (const auto& img : images) out.push_back(analyze_image(provider, builtin_schema(), img).graph);
    return out;
}

TEST(BriefSpan, CaseAndWhitespaceInsensitive) {
    EXPECT_TRUE(brief_contains_span("A  Colorful\ncomic book", "colorful comic"));
    EXPECT_TRUE(brief_contains_span("x", "X"));
    EXPECT_FALSE(brief_contains_span("A colorful comic", "colourful"));
    EXPECT_FALSE(brief_contains_span("anything", "   "));
}

TEST(Constraints, CleanGraph) {
    ConceptGraph g;
    g.nodes = {cited("n1", "Function", {Provenance::brief_quote("poster"), Provenance::image(0)}),
               cited("n2", "Colors", {Provenance::image(1)})};
    ConstraintReport r = check_synthesis_constraints(g, {"poster", "A poster in red"}, 2, {{"poster", "n1"}});
    EXPECT_TRUE(r.empty()) << r.describe();
    EXPECT_TRUE(r.coverage_verified);
}

TEST(Constraints, EveryViolationKind) {
    ConceptGraph g;
    g.nodes = {cited("n1", "Function", {Provenance::image(0)}), cited("n2", "Colors", {})};
    ConstraintReport r = check_synthesis_constraints(g, {"poster", "A poster in red"}, 3,
                                                     {{"in blue", "n1"}, {"red", "n9"}});
    EXPECT_EQ(r.kinds(), (std::vector<ViolationKind>{ViolationKind::ImageUnrepresented,
                                                     ViolationKind::ImageUnrepresented,
                                                     ViolationKind::CoverageSpanNotInBrief,
                                                     ViolationKind::CoverageNodeMissing, ViolationKind::NoProvenance}));
    EXPECT_EQ(r.violations[0].image_index, 1u);
    EXPECT_EQ(r.violations[1].image_index, 2u);
    EXPECT_FALSE(r.coverage_verified);
    json j = constraint_report_to_json(r);
    EXPECT_EQ(j["violations"].size(), 5u);
    EXPECT_EQ(j["violations"][0]["kind"], "ImageUnrepresented");
}

TEST(Constraints, CoverageNeverClaimedWithoutMap) {
    ConceptGraph g;
    g.nodes = {cited("n1", "Function", {Provenance::brief_quote("poster")})};
    ConstraintReport r = check_synthesis_constraints(g, {"poster", "A poster"}, 0, {});
    EXPECT_TRUE(r.empty());
    EXPECT_FALSE(r.coverage_verified);
}

TEST(ImageAnalysis, EveryNodeCitesTheImage) {
    MockProvider mock(testing::magician_fixtures());
    ImageSet images = testing::magician_images();
    for (const auto& img : images) {
        ImageAnalysis a = analyze_image(mock, builtin_schema(), img);
        ASSERT_FALSE(a.graph.nodes.empty());
        for (const auto& n : a.graph.nodes) {
            EXPECT_EQ(n.provenance, std::vector<Provenance>{Provenance::image(img.index)});
        }
        EXPECT_TRUE(validate_graph(a.graph, builtin_schema()).ok());
    }
    EXPECT_EQ(mock.transcript().count_stage("image_analysis"), 5u);
    auto first = mock.transcript().entries()[0].request;
    EXPECT_EQ(first["kind"], "VisionStructured");
    EXPECT_EQ(first["parts"][1]["image"]["index"], 0);
}

TEST(ImageAnalysis, ProseWrappedPayloadParses) {
    MockProvider mock(testing::magician_fixtures());
    mock.set_cursor({{"image_analysis", 3}});
    ImageAnalysis a = analyze_image(mock, builtin_schema(), testing::magician_images()[3]);
    EXPECT_EQ(a.graph.nodes.size(), 2u);
    EXPECT_EQ(a.graph.edges.size(), 1u);
}

TEST(ImageAnalysis, DropsInvalidNodesAndRejectsEmpty) {
    FixtureSet fx;
    fx.add("image_analysis", FixtureResponse::of_text(R"({"nodes":[
            {"id":"a","type":"Glitter","description":"shiny"},
            {"id":"b","type":"Colors","description":"Red"},
            {"id":"b","type":"Motifs","description":"dup"},
            {"id":"c","type":"Motifs","description":""}],
          "edges":[{"source":"b","target":"zz","reason":"r"},{"source":"b","target":"b","reason":"r"}]})"));
    fx.add("image_analysis", FixtureResponse::of_text(R"({"nodes":[{"id":"a","type":"Glitter","description":"x"}],"edges":[]})"));
    MockProvider mock(fx);
    Image img{0, "image/png", testing::fake_png("i"), {}};
    ImageAnalysis a = analyze_image(mock, builtin_schema(), img);
    EXPECT_EQ(a.graph.nodes.size(), 1u);
    EXPECT_TRUE(a.graph.edges.empty());
    EXPECT_EQ(a.warnings.size(), 5u);
    try {
        analyze_image(mock, builtin_schema(), img);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::EmptyGraph);
    }
}

TEST(Synthesis, MagicianFirstRoundIsClean) {
    MockProvider mock(testing::magician_fixtures());
    ImageSet images = testing::magician_images();
    auto per_image = analyses(mock, images);
    SynthesisResult r = synthesize_concept(mock, builtin_schema(), testing::magician_brief(), images, per_image);
    EXPECT_TRUE(r.report.empty()) << r.report.describe();
    EXPECT_TRUE(r.report.coverage_verified);
    EXPECT_EQ(r.rounds, 1);
    EXPECT_EQ(r.graph.version, 1u);
    EXPECT_EQ(r.graph.nodes.size(), 10u);
    EXPECT_EQ(r.graph.edges.size(), 10u);
    EXPECT_TRUE(validate_graph(r.graph, builtin_schema()).ok());
    const Node* motifs = r.graph.find("n6");
    ASSERT_NE(motifs, nullptr);
    EXPECT_EQ(motifs->provenance,
              (std::vector<Provenance>{Provenance::image(0), Provenance::image(1), Provenance::image(3)}));
    EXPECT_TRUE(std::all_of(r.graph.nodes.begin(), r.graph.nodes.end(), [](const Node& n) { return n.dirty; }));
    EXPECT_EQ(r.coverage.at("colorful"), "n9");
    EXPECT_EQ(mock.transcript().count_stage("repair"), 0u);
}

TEST(Synthesis, RepairsAMissingImage) {
    FixtureSet fx = testing::magician_fixtures();
    FixtureSet over;
    over.add("synthesis", FixtureResponse::of_text(testing::without_image_evidence(testing::magician_synthesis_output(), 2, 0).dump()));
    over.add("repair", FixtureResponse::of_text(testing::magician_synthesis_output().dump()));
    fx.merge(over);
    MockProvider mock(fx);
    ImageSet images = testing::magician_images();
    auto per_image = analyses(mock, images);
    SynthesisResult r = synthesize_concept(mock, builtin_schema(), testing::magician_brief(), images, per_image);
    EXPECT_TRUE(r.report.empty());
    EXPECT_EQ(r.rounds, 2);
    EXPECT_EQ(r.best_round, 1);
    auto entries = mock.transcript().entries();
    const auto& repair = entries.back().request;
    EXPECT_EQ(repair["stage"], "repair");
    std::string last = repair["parts"].back()["text"];
    EXPECT_NE(last.find("ImageUnrepresented"), std::string::npos);
    EXPECT_NE(last.find("image 2"), std::string::npos);
}

TEST(Synthesis, GivesUpAfterBoundedRepairsWithBestEffort) {
    std::string broken = testing::without_image_evidence(testing::magician_synthesis_output(), 2, 0).dump();
    FixtureSet fx = testing::magician_fixtures();
    FixtureSet over;
    over.add("synthesis", FixtureResponse::of_text(broken));
    over.set("repair", {FixtureResponse::of_text(broken), FixtureResponse::of_text(broken),
                        FixtureResponse::of_text(testing::magician_synthesis_output().dump())});
    fx.merge(over);
    MockProvider mock(fx);
    ImageSet images = testing::magician_images();
    auto per_image = analyses(mock, images);
    SynthesisResult r = synthesize_concept(mock, builtin_schema(), testing::magician_brief(), images, per_image);
    EXPECT_EQ(r.rounds, 1 + kDefaultMaxRepairRounds);
    EXPECT_EQ(r.report.kinds(), std::vector<ViolationKind>{ViolationKind::ImageUnrepresented});
    EXPECT_EQ(r.graph.nodes.size(), 10u);
    EXPECT_EQ(mock.transcript().count_stage("repair"), 2u);
}

TEST(Synthesis, UnparseableEveryRoundFails) {
    FixtureSet fx;
    fx.add("synthesis", FixtureResponse::of_text("sorry"));
    fx.set("repair", {FixtureResponse::of_text("still no"), FixtureResponse::of_text("[]")});
    MockProvider mock(fx);
    try {
        synthesize_concept(mock, builtin_schema(), {"poster", "A poster"}, {}, {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::SynthesisFailed);
    }
    EXPECT_EQ(mock.transcript().size(), 3u);
}

TEST(Synthesis, ProviderFailureIsNotRetried) {
    FixtureSet fx;
    fx.add("synthesis", FixtureResponse::of_failure(ProviderFailure::Transport, "down"));
    MockProvider mock(fx);
    EXPECT_THROW(synthesize_concept(mock, builtin_schema(), {"poster", "A poster"}, {}, {}), ProviderError);
    EXPECT_EQ(mock.transcript().size(), 1u);
}

TEST(Synthesis, QuotesAreAnchoredAndUncitedNodesMarkedInferred) {
    FixtureSet fx;
    fx.add("synthesis", FixtureResponse::of_text(R"({
        "nodes":[{"id":"x","type":"Function","description":"Gig poster","evidence":[{"brief_quote":"JAZZ night"},{"brief_quote":"opera"}]},
                 {"id":"y","type":"Colors","description":"Warm"}],
        "edges":[{"source":"y","target":"x","reason":"Warm tones suit a night out"}],
        "coverage":{"jazz night":"x"}})"));
    MockProvider mock(fx);
    NodeIdAllocator ids(40);
    SynthesisResult r = synthesize_concept(mock, builtin_schema(), {"poster", "A poster for a jazz night"}, {}, {}, 0, &ids);
    ASSERT_NE(r.graph.find("n40"), nullptr);
    EXPECT_EQ(r.graph.find("n40")->provenance, std::vector<Provenance>{Provenance::brief_quote("jazz night")});
    EXPECT_EQ(r.graph.find("n41")->provenance.front().kind, ProvenanceKind::SystemInference);
    EXPECT_EQ(r.report.kinds(), std::vector<ViolationKind>{ViolationKind::NoProvenance});
    EXPECT_EQ(ids.issue(), "n42");
    EXPECT_EQ(r.coverage.at("jazz night"), "n40");
    EXPECT_FALSE(r.warnings.empty());
}

TEST(Synthesis, PerImageCountMustMatch) {
    MockProvider mock(FixtureSet{});
    try {
        synthesize_concept(mock, builtin_schema(), {"poster", "A poster"}, testing::magician_images(), {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::PreconditionFailed);
    }
    EXPECT_EQ(mock.transcript().size(), 0u);
}

TEST(Synthesis, DeterministicAcrossRuns) {
    auto run = [] {
        MockProvider mock(testing::magician_fixtures());
        ImageSet images = testing::magician_images();
        auto per_image = analyses(mock, images);
        auto r = synthesize_concept(mock, builtin_schema(), testing::magician_brief(), images, per_image);
        return std::make_pair(serialize_canonical(r.graph), mock.transcript().to_jsonl());
    };
    EXPECT_EQ(run(), run());
}

}  // namespace
}  // namespace tomigo
