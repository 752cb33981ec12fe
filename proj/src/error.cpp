#include "tomigo/error.hpp"

namespace tomigo {

std::string_view errc_name(Errc code) {
    switch (code) {
        case Errc::DuplicateTypeKey: return "DuplicateTypeKey";
        case Errc::InvalidRole: return "InvalidRole";
        case Errc::MissingNode: return "MissingNode";
        case Errc::ParseError: return "ParseError";
        case Errc::IntegrityError: return "IntegrityError";
        case Errc::ProviderError: return "ProviderError";
        case Errc::MalformedOutput: return "MalformedOutput";
        case Errc::EmptyGraph: return "EmptyGraph";
        case Errc::SynthesisFailed: return "SynthesisFailed";
        case Errc::EmptyConcept: return "EmptyConcept";
        case Errc::ContentRejected: return "ContentRejected";
        case Errc::NoPayloadFound: return "NoPayloadFound";
        case Errc::ShapeMismatch: return "ShapeMismatch";
        case Errc::MockExhausted: return "MockExhausted";
        case Errc::FixtureLoadError: return "FixtureLoadError";
        case Errc::ConfigError: return "ConfigError";
        case Errc::StorageError: return "StorageError";
        case Errc::InvalidBrief: return "InvalidBrief";
        case Errc::InvalidRequest: return "InvalidRequest";
        case Errc::ConcurrentMutation: return "ConcurrentMutation";
        case Errc::NotFound: return "NotFound";
        case Errc::PreconditionFailed: return "PreconditionFailed";
    }
    return "Unknown";
}

std::string_view provider_failure_name(ProviderFailure kind) {
    switch (kind) {
        case ProviderFailure::Transport: return "Transport";
        case ProviderFailure::Auth: return "Auth";
        case ProviderFailure::RateLimited: return "RateLimited";
        case ProviderFailure::Rejected: return "Rejected";
    }
    return "Unknown";
}

}  // namespace tomigo
