#include "tomigo/mock_provider.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>

#include <nlohmann/json.hpp>

namespace tomigo {

namespace fs = std::filesystem;

FixtureResponse FixtureResponse::of_image(std::string bytes, std::string media_type) {
    FixtureResponse r;
    r.kind = Kind::Image;
    r.image.media_type = std::move(media_type);
    r.image.bytes = std::move(bytes);
    return r;
}

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::FixtureLoadError, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ProviderFailure parse_failure(const std::string& name, const fs::path& file) {
    for (auto f : {ProviderFailure::Transport, ProviderFailure::Auth, ProviderFailure::RateLimited,
                   ProviderFailure::Rejected}) {
        if (provider_failure_name(f) == name) return f;
    }
    throw Error(Errc::FixtureLoadError, file.string() + ": unknown failure kind '" + name + "'");
}

}  // namespace

FixtureSet FixtureSet::load(const fs::path& root) {
    if (!fs::is_directory(root)) throw Error(Errc::FixtureLoadError, "fixture directory not found: " + root.string());
    static const std::regex name_re(R"((\d+)\.(resp\.(json|txt|png|jpg)|error\.json))");
    FixtureSet set;
    for (const auto& stage_dir : fs::directory_iterator(root)) {
        if (!stage_dir.is_directory()) continue;
        std::map<std::size_t, FixtureResponse> indexed;
        for (const auto& file : fs::directory_iterator(stage_dir.path())) {
            const std::string name = file.path().filename().string();
            std::smatch m;
            if (!std::regex_match(name, m, name_re)) {
                throw Error(Errc::FixtureLoadError, "unexpected fixture file " + file.path().string());
            }
            std::size_t index = std::stoul(m[1].str());
            std::string content = read_file(file.path());
            FixtureResponse resp;
            if (m[2].str() == "error.json") {
                auto doc = nlohmann::json::parse(content, nullptr, false);
                if (doc.is_discarded() || !doc.is_object()) {
                    throw Error(Errc::FixtureLoadError, file.path().string() + ": not a JSON object");
                }
                resp = FixtureResponse::of_failure(parse_failure(doc.value("kind", std::string("Rejected")), file.path()),
                                  doc.value("message", std::string{}));
            } else if (m[3].str() == "png" || m[3].str() == "jpg") {
                std::string media = sniff_media_type(content);
                if (media.empty()) throw Error(Errc::FixtureLoadError, file.path().string() + ": not an image");
                resp = FixtureResponse::of_image(std::move(content), media);
            } else {
                resp = FixtureResponse::of_text(std::move(content));
            }
            if (!indexed.emplace(index, std::move(resp)).second) {
                throw Error(Errc::FixtureLoadError, "duplicate index " + std::to_string(index) + " in " +
                                                        stage_dir.path().string());
            }
        }
        std::vector<FixtureResponse> ordered;
        for (auto& [index, resp] : indexed) {
            if (index != ordered.size()) {
                throw Error(Errc::FixtureLoadError, "indices in " + stage_dir.path().string() +
                                                        " are not contiguous from 0");
            }
            ordered.push_back(std::move(resp));
        }
        set.stages_[stage_dir.path().filename().string()] = std::move(ordered);
    }
    return set;
}

FixtureSet& FixtureSet::add(const std::string& stage, FixtureResponse response) {
    stages_[stage].push_back(std::move(response));
    return *this;
}

FixtureSet& FixtureSet::set(const std::string& stage, std::vector<FixtureResponse> responses) {
    stages_[stage] = std::move(responses);
    return *this;
}

FixtureSet& FixtureSet::merge(const FixtureSet& other) {
    for (const auto& [stage, responses] : other.stages_) stages_[stage] = responses;
    return *this;
}

MockProvider::Cursor MockProvider::cursor() const {
    std::lock_guard lock(mutex_);
    return cursor_;
}

void MockProvider::set_cursor(Cursor cursor) {
    std::lock_guard lock(mutex_);
    cursor_ = std::move(cursor);
}

RawReply MockProvider::do_send(const ProviderRequest& request) {
    FixtureResponse resp;
    {
        std::lock_guard lock(mutex_);
        auto& index = cursor_[request.stage];
        auto it = fixtures_.stages().find(request.stage);
        if (it == fixtures_.stages().end() || index >= it->second.size()) {
            throw Error(Errc::MockExhausted,
                        "no scripted response #" + std::to_string(index) + " for stage '" + request.stage + "'");
        }
        resp = it->second[index++];
    }
    switch (resp.kind) {
        case FixtureResponse::Kind::Failure: throw ProviderError(resp.failure, resp.text);
        case FixtureResponse::Kind::Image: return RawReply{{}, resp.image, {}};
        case FixtureResponse::Kind::Text: break;
    }
    return RawReply{resp.text, std::nullopt, {}};
}

}  // namespace tomigo
