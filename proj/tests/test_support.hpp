#pragma once

#include <condition_variable>
#include <filesystem>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tomigo/graph.hpp"
#include "tomigo/mock_provider.hpp"
#include "tomigo/synthesis.hpp"

// Shared fixtures and generators for the unit tests and the acceptance runner.
namespace tomigo::testing {

std::filesystem::path fixtures_dir();
std::filesystem::path magician_dir();

std::string read_file(const std::filesystem::path& path);

DesignBrief magician_brief();
ImageSet magician_images();
FixtureSet magician_fixtures();
// The magician book-cover graph, read from its JSON fixture.
ConceptGraph magician_graph();
// Raw provider output of the magician synthesis fixture.
nlohmann::json magician_synthesis_output();
// Removes every evidence entry citing `image`; nodes left without evidence
// cite `fallback_image` instead.
nlohmann::json without_image_evidence(nlohmann::json output, std::size_t image, std::size_t fallback_image);

// PNG signature followed by `tag`: enough for media-type sniffing and hashing.
std::string fake_png(std::string_view tag);

// Unique directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

// Forwards to an inner provider but parks the first request of `stage` until
// release(), so tests can hold a mutation in flight deterministically.
class GatedProvider final : public Provider {
public:
    GatedProvider(Provider& inner, std::string stage) : inner_(inner), stage_(std::move(stage)) {}

    void wait_until_parked();
    void release();

protected:
    RawReply do_send(const ProviderRequest& request) override;

private:
    Provider& inner_;
    std::string stage_;
    std::mutex mutex_;
    std::condition_variable cv_;
    bool parked_ = false;
    bool released_ = false;
};

// Structurally valid graph over builtin types: unique ids, distinct
// endpoints, non-empty text, random locks, dirty flags and provenance.
ConceptGraph random_valid_graph(std::mt19937& rng, NodeIdAllocator& ids);

// Mix of admissible and inadmissible ops against `graph`.
PatchOp random_op(std::mt19937& rng, const ConceptGraph& graph, NodeIdAllocator& ids);
GraphPatch random_patch(std::mt19937& rng, const ConceptGraph& graph, NodeIdAllocator& ids, std::size_t max_ops);

}  // namespace tomigo::testing
