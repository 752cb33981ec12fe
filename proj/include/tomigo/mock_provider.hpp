#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "tomigo/error.hpp"
#include "tomigo/provider.hpp"

namespace tomigo {

struct FixtureResponse {
    enum class Kind { Text, Image, Failure };

    Kind kind = Kind::Text;
    std::string text;
    Image image;
    ProviderFailure failure = ProviderFailure::Rejected;

    static FixtureResponse of_text(std::string t) { return {Kind::Text, std::move(t), {}, {}}; }
    static FixtureResponse of_image(std::string bytes, std::string media_type = "image/png");
    static FixtureResponse of_failure(ProviderFailure f, std::string message) {
        return {Kind::Failure, std::move(message), {}, f};
    }
};

// Scripted responses keyed by stage tag, consumed in order.
//
// Directory layout: <root>/<stage>/<index>.resp.json|.resp.txt|.resp.png|.resp.jpg
// or <index>.error.json ({"kind": "Rejected", "message": "..."}). Indices per
// stage must be contiguous from 0.
class FixtureSet {
public:
    static FixtureSet load(const std::filesystem::path& root);

    FixtureSet& add(const std::string& stage, FixtureResponse response);
    FixtureSet& set(const std::string& stage, std::vector<FixtureResponse> responses);
    // Stages in `other` replace the same stages here.
    FixtureSet& merge(const FixtureSet& other);

    const std::map<std::string, std::vector<FixtureResponse>>& stages() const noexcept { return stages_; }

private:
    std::map<std::string, std::vector<FixtureResponse>> stages_;
};

// Deterministic test double: the n-th request with stage S gets response S[n].
class MockProvider final : public Provider {
public:
    using Cursor = std::map<std::string, std::size_t>;

    explicit MockProvider(FixtureSet fixtures) : fixtures_(std::move(fixtures)) {}

    Cursor cursor() const;
    void set_cursor(Cursor cursor);

protected:
    RawReply do_send(const ProviderRequest& request) override;

private:
    FixtureSet fixtures_;
    mutable std::mutex mutex_;
    Cursor cursor_;
};

}  // namespace tomigo
