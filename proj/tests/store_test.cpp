#include <gtest/gtest.h>

#include <fstream>

#include "test_support.hpp"
#include "tomigo/error.hpp"
#include "tomigo/store.hpp"

namespace tomigo {
namespace {

namespace fs = std::filesystem;

struct Crash : std::runtime_error {
    Crash() : std::runtime_error("simulated crash") {}
};

Project with_graph(Project p, ConceptGraph g) {
    g.version = p.graph().version + 1;
    p.graph_versions.push_back(std::move(g));
    return p;
}

TEST(Store, CreateWritesLayout) {
    testing::TempDir dir;
    ProjectStore store(dir.path());
    auto p = store.create({"poster", "A jazz night poster"}, {}, 7);
    fs::path pdir = store.directory(p->id);
    EXPECT_TRUE(fs::exists(pdir / "manifest.json"));
    EXPECT_TRUE(fs::exists(pdir / "brief.json"));
    EXPECT_TRUE(fs::exists(pdir / "history.jsonl"));
    EXPECT_TRUE(fs::exists(pdir / "graph.v0.cgraph.json"));
    EXPECT_EQ(p->graph_versions.size(), 1u);
    EXPECT_EQ(p->created_at, 7);
    EXPECT_EQ(store.ids(), std::vector<std::string>{p->id});
    for (const auto& e : fs::directory_iterator(pdir)) EXPECT_NE(e.path().extension(), ".tmp");
}

TEST(Store, EmptyBriefRejected) {
    testing::TempDir dir;
    ProjectStore store(dir.path());
    try {
        store.create({"poster", "  \n"});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::InvalidBrief);
    }
}

TEST(Store, ExplicitDirectoryNamesTheProject) {
    testing::TempDir dir;
    ProjectStore store(dir.path());
    auto p = store.create({"poster", "x"}, dir / "gig");
    EXPECT_EQ(p->id, "gig");
    EXPECT_THROW(store.create({"poster", "x"}, dir / "gig"), Error);
}

TEST(Store, CommitThenReloadRoundTrips) {
    testing::TempDir dir;
    std::string id;
    {
        ProjectStore store(dir.path());
        id = store.create({"book cover", "A magician"})->id;
        auto claim = store.claim(id);
        Project next = *store.snapshot(id);
        next.images.push_back({0, "image/png", testing::fake_png("ref"), {}});
        next.history.push_back({Author::User, "more sparkles", 3, {"Motifs"}});
        next.questions.push_back({"Which mood?", {"SubjectiveImpression"}});
        next.custom_types.push_back({"Animation", NodeRole::Content, "Motion", {}, false});
        next = with_graph(next, testing::magician_graph());
        DesignArtifact d;
        d.id = "d1";
        d.image = {0, "image/png", testing::fake_png("design"), {}};
        d.graph_version = next.graph().version;
        d.used_node_ids = {"n2"};
        next.designs.push_back(d);
        next.next_node_id = 11;
        store.commit(claim, next);
    }
    ProjectStore reopened(dir.path());
    auto p = reopened.snapshot(id);
    EXPECT_EQ(p->images.size(), 1u);
    EXPECT_EQ(p->images[0].bytes, testing::fake_png("ref"));
    EXPECT_EQ(p->history.size(), 1u);
    EXPECT_EQ(p->history[0].edited_types, std::vector<std::string>{"Motifs"});
    EXPECT_EQ(p->graph_versions.size(), 2u);
    ConceptGraph expected = testing::magician_graph();
    expected.version = 1;
    EXPECT_EQ(p->graph(), expected);
    EXPECT_EQ(p->designs.size(), 1u);
    EXPECT_EQ(p->designs[0].image.bytes, testing::fake_png("design"));
    EXPECT_EQ(p->questions.size(), 1u);
    EXPECT_EQ(p->schema().types().size(), 11u);
    EXPECT_EQ(p->next_node_id, 11u);
}

TEST(Store, ClaimsAreExclusive) {
    testing::TempDir dir;
    ProjectStore store(dir.path());
    auto id = store.create({"poster", "x"})->id;
    {
        auto claim = store.claim(id);
        try {
            store.claim(id);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), Errc::ConcurrentMutation);
        }
    }
    EXPECT_NO_THROW(store.claim(id));
    try {
        store.claim("nope");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::NotFound);
    }
}

TEST(Store, SnapshotsAreImmutableAcrossCommits) {
    testing::TempDir dir;
    ProjectStore store(dir.path());
    auto id = store.create({"poster", "x"})->id;
    auto before = store.snapshot(id);
    {
        auto claim = store.claim(id);
        store.commit(claim, with_graph(*before, testing::magician_graph()));
    }
    EXPECT_EQ(before->graph_versions.size(), 1u);
    EXPECT_EQ(store.snapshot(id)->graph_versions.size(), 2u);
}

TEST(Store, RejectsNonIncreasingVersions) {
    testing::TempDir dir;
    ProjectStore store(dir.path());
    auto id = store.create({"poster", "x"})->id;
    auto claim = store.claim(id);
    Project next = *store.snapshot(id);
    next.graph_versions.push_back(ConceptGraph{});
    try {
        store.commit(claim, next);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::IntegrityError);
    }
}

TEST(Store, CrashBeforeAnyRenameKeepsPreviousVersion) {
    testing::TempDir dir;
    std::string id;
    std::vector<fs::path> targets;
    {
        ProjectStore store(dir.path());
        id = store.create({"poster", "x"})->id;
        store.set_fault_hook([&](const fs::path& target) { targets.push_back(target); });
        auto claim = store.claim(id);
        store.commit(claim, with_graph(*store.snapshot(id), testing::magician_graph()));
    }
    ASSERT_FALSE(targets.empty());
    EXPECT_EQ(targets.back().filename(), "manifest.json");
    for (std::size_t crash_at = 0; crash_at < targets.size(); ++crash_at) {
        testing::TempDir fresh;
        ProjectStore store(fresh.path());
        auto pid = store.create({"poster", "x"})->id;
        std::size_t count = 0;
        store.set_fault_hook([&](const fs::path&) {
            if (count++ == crash_at) throw Crash();
        });
        {
            auto claim = store.claim(pid);
            EXPECT_THROW(store.commit(claim, with_graph(*store.snapshot(pid), testing::magician_graph())), Crash);
        }
        EXPECT_EQ(store.snapshot(pid)->graph_versions.size(), 1u);
        ProjectStore reopened(fresh.path());
        auto p = reopened.snapshot(pid);
        EXPECT_EQ(p->graph_versions.size(), 1u) << "crash before rename #" << crash_at;
        EXPECT_EQ(p->graph().version, 0u);
    }
}

TEST(Store, LoadErrors) {
    testing::TempDir dir;
    try {
        ProjectStore::load(dir / "missing");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::NotFound);
    }
    ProjectStore store(dir.path());
    auto id = store.create({"poster", "x"})->id;
    std::ofstream(store.directory(id) / "manifest.json") << "{ not json";
    try {
        ProjectStore::load(store.directory(id));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::StorageError);
    }
}

TEST(Store, TruncatedHistoryDetected) {
    testing::TempDir dir;
    ProjectStore store(dir.path());
    auto id = store.create({"poster", "x"})->id;
    {
        auto claim = store.claim(id);
        Project next = *store.snapshot(id);
        next.history.push_back({Author::User, "hello", 0, {}});
        store.commit(claim, next);
    }
    std::ofstream(store.directory(id) / "history.jsonl", std::ios::trunc);
    EXPECT_THROW(ProjectStore::load(store.directory(id)), Error);
}

TEST(Store, SnapshotJson) {
    testing::TempDir dir;
    ProjectStore store(dir.path());
    auto p = store.create({"poster", "A poster"});
    auto j = project_to_json(*p);
    EXPECT_EQ(j["id"], p->id);
    EXPECT_EQ(j["brief"]["text"], "A poster");
    EXPECT_EQ(j["graph_versions"], nlohmann::json::array({0}));
    EXPECT_EQ(j["graph"]["nodes"].size(), 0u);
}

TEST(Store, IdAllocatorSkipsIdsFromAllVersions) {
    Project p;
    p.graph_versions.push_back(testing::magician_graph());
    p.graph_versions.push_back(ConceptGraph{});
    EXPECT_EQ(p.id_allocator().issue(), "n11");
}

}  // namespace
}  // namespace tomigo
