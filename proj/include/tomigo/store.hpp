#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tomigo/dialogue.hpp"
#include "tomigo/graph.hpp"
#include "tomigo/realign.hpp"
#include "tomigo/schema.hpp"
#include "tomigo/synthesis.hpp"

namespace tomigo {

// Persisted session state. graph_versions is append-only and never empty.
struct Project {
    std::string id;
    DesignBrief brief;
    ImageSet images;
    std::vector<Message> history;
    std::vector<ConceptGraph> graph_versions;
    std::vector<DesignArtifact> designs;
    std::vector<Question> questions;
    std::vector<NodeTypeDef> custom_types;
    std::uint64_t next_node_id = 1;
    std::int64_t created_at = 0;

    const ConceptGraph& graph() const { return graph_versions.back(); }
    SchemaDef schema() const;
    const DesignArtifact* find_design(std::string_view design_id) const;
    // Allocator seeded past every id in every version.
    NodeIdAllocator id_allocator() const;
};

// Snapshot JSON served to clients: current graph inline, blobs by hash.
nlohmann::json project_to_json(const Project& p);

// Directory-per-project persistence:
//   manifest.json             commit point, written last
//   brief.json
//   graph.v<N>.cgraph.json
//   history.jsonl
//   images/<sha256>.<ext>, designs/<sha256>.<ext>
// Every file is written to a temporary name and renamed into place, so a
// crash leaves the previous manifest (version N-1) intact.
class ProjectStore {
public:
    // Called with the destination path right before each rename; tests throw
    // from it to simulate a crash.
    using FaultHook = std::function<void(const std::filesystem::path& target)>;

    // Registers every existing project directory under `root` unless `scan` is false.
    explicit ProjectStore(std::filesystem::path root, bool scan = true);

    // Creates a project in `dir`, or under root with a fresh id.
    std::shared_ptr<const Project> create(const DesignBrief& brief, std::optional<std::filesystem::path> dir = {},
                                          std::int64_t now = 0);
    // Loads and registers an existing project directory; returns its id.
    std::string attach(const std::filesystem::path& dir);

    // Throws Error{NotFound}.
    std::shared_ptr<const Project> snapshot(const std::string& id) const;
    std::vector<std::string> ids() const;
    std::filesystem::path directory(const std::string& id) const;

    // Exclusive per-project mutation right; released on destruction.
    class Claim {
    public:
        Claim(Claim&&) noexcept = default;
        Claim& operator=(Claim&&) noexcept = default;
        const std::string& id() const noexcept { return id_; }

    private:
        friend class ProjectStore;
        Claim(std::string id, std::unique_lock<std::mutex> lock) : id_(std::move(id)), lock_(std::move(lock)) {}
        std::string id_;
        std::unique_lock<std::mutex> lock_;
    };

    // Throws Error{ConcurrentMutation} when another claim is held.
    Claim claim(const std::string& id);
    // Persists `next` and publishes it as the current snapshot.
    void commit(const Claim& claim, Project next);

    void set_fault_hook(FaultHook hook) { fault_hook_ = std::move(hook); }

    static Project load(const std::filesystem::path& dir);

private:
    struct Entry {
        std::filesystem::path dir;
        std::mutex claim_mutex;
        mutable std::mutex current_mutex;
        std::shared_ptr<const Project> current;
    };

    Entry& entry(const std::string& id) const;
    void write_project(const std::filesystem::path& dir, const Project* previous, const Project& next);
    void write_atomic(const std::filesystem::path& target, std::string_view bytes);

    std::filesystem::path root_;
    mutable std::mutex entries_mutex_;
    std::map<std::string, std::unique_ptr<Entry>> entries_;
    FaultHook fault_hook_;
};

}  // namespace tomigo
