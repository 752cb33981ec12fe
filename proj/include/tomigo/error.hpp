#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tomigo {

// Engine error codes. The REST layer echoes these names in problem-details.
enum class Errc {
    DuplicateTypeKey,
    InvalidRole,
    MissingNode,
    ParseError,
    IntegrityError,
    ProviderError,
    MalformedOutput,
    EmptyGraph,
    SynthesisFailed,
    EmptyConcept,
    ContentRejected,
    NoPayloadFound,
    ShapeMismatch,
    MockExhausted,
    FixtureLoadError,
    ConfigError,
    StorageError,
    InvalidBrief,
    InvalidRequest,
    ConcurrentMutation,
    NotFound,
    PreconditionFailed,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& detail)
        : std::runtime_error(std::string(errc_name(code)) + ": " + detail), code_(code), detail_(detail) {}

    Errc code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    Errc code_;
    std::string detail_;
};

enum class ProviderFailure { Transport, Auth, RateLimited, Rejected };

std::string_view provider_failure_name(ProviderFailure kind);

class ProviderError : public Error {
public:
    ProviderError(ProviderFailure kind, const std::string& detail,
                  std::optional<double> retry_after_seconds = std::nullopt)
        : Error(Errc::ProviderError, std::string(provider_failure_name(kind)) + ": " + detail),
          kind_(kind),
          retry_after_(retry_after_seconds) {}

    ProviderFailure kind() const noexcept { return kind_; }
    std::optional<double> retry_after() const noexcept { return retry_after_; }

private:
    ProviderFailure kind_;
    std::optional<double> retry_after_;
};

}  // namespace tomigo
