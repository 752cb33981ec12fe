#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace tomigo {

// A reference or design image. `bytes` is binary data held in a std::string.
struct Image {
    std::size_t index = 0;
    std::string media_type;
    std::string bytes;
    std::string uri;
};

// Detects png/jpeg/gif/webp from magic bytes; empty when unrecognised.
std::string sniff_media_type(std::string_view bytes);
std::string extension_for_media_type(std::string_view media_type);

enum class RequestKind { TextStructured, VisionStructured, ImageGeneration, ImageEdit };

std::string_view request_kind_name(RequestKind kind);

struct PromptPart {
    std::string text;
    std::optional<Image> image;

    static PromptPart of_text(std::string t) { return {std::move(t), std::nullopt}; }
    static PromptPart of_image(Image img) { return {{}, std::move(img)}; }
    bool is_image() const noexcept { return image.has_value(); }
};

// Expected-output shape descriptor: named fields with primitive or nested types.
struct Shape {
    enum class Type { Any, String, Integer, Number, Boolean, List, Object, Map };

    struct Field;

    Type type = Type::Any;
    std::vector<Field> fields;          // Object
    std::shared_ptr<const Shape> item;  // List element / Map value

    static Shape any() { return {Type::Any, {}, nullptr}; }
    static Shape string() { return {Type::String, {}, nullptr}; }
    static Shape integer() { return {Type::Integer, {}, nullptr}; }
    static Shape number() { return {Type::Number, {}, nullptr}; }
    static Shape boolean() { return {Type::Boolean, {}, nullptr}; }
    static Shape list(Shape element);
    static Shape map(Shape value);
    static Shape object(std::vector<Field> fields);

    bool empty() const noexcept { return type == Type::Any && fields.empty(); }
    nlohmann::json describe() const;
};

struct Shape::Field {
    std::string name;
    Shape shape;
    bool required = true;
};

inline Shape::Field required(std::string name, Shape s) { return {std::move(name), std::move(s), true}; }
inline Shape::Field optional_field(std::string name, Shape s) { return {std::move(name), std::move(s), false}; }

struct ProviderRequest {
    RequestKind kind = RequestKind::TextStructured;
    std::string stage;
    std::vector<PromptPart> parts;
    Shape expected_shape;

    ProviderRequest& text(std::string t) {
        parts.push_back(PromptPart::of_text(std::move(t)));
        return *this;
    }
    ProviderRequest& image(Image img) {
        parts.push_back(PromptPart::of_image(std::move(img)));
        return *this;
    }
    bool structured() const noexcept {
        return kind == RequestKind::TextStructured || kind == RequestKind::VisionStructured;
    }
    // Throws Error{InvalidRequest} when the kind/shape/part invariants fail.
    void check() const;
    // Transcript form: images are summarised by media type, size and hash.
    nlohmann::json to_json() const;
};

struct Usage {
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
};

struct ProviderResponse {
    RequestKind kind = RequestKind::TextStructured;
    std::string raw;
    nlohmann::json parsed;   // structured kinds only
    std::optional<Image> image;  // image kinds only
    Usage usage;
    std::vector<std::string> warnings;
};

struct TranscriptEntry {
    std::uint64_t sequence = 0;
    std::int64_t started_at = 0;
    std::int64_t finished_at = 0;
    nlohmann::json request;
    std::optional<std::string> response;
    std::optional<std::string> error;
};

// Append-only, internally synchronised call log.
class Transcript {
public:
    using Clock = std::function<std::int64_t()>;

    // The default clock is logical (a tick per read) so mock sessions replay byte-identically.
    explicit Transcript(Clock clock = {});

    std::int64_t now();
    void append(TranscriptEntry entry);
    std::vector<TranscriptEntry> entries() const;
    std::size_t size() const;
    std::size_t count_stage(std::string_view stage) const;
    std::string to_jsonl() const;

private:
    mutable std::mutex mutex_;
    Clock clock_;
    std::int64_t tick_ = 0;
    std::vector<TranscriptEntry> entries_;
};

// Raw result of one backend call.
struct RawReply {
    std::string text;
    std::optional<Image> image;
    Usage usage;
};

// Uniform backend interface. Every call to `send` lands in the transcript,
// including failures, once per attempt.
class Provider {
public:
    virtual ~Provider() = default;

    RawReply send(const ProviderRequest& request);
    Transcript& transcript() noexcept { return transcript_; }
    const Transcript& transcript() const noexcept { return transcript_; }

protected:
    explicit Provider(Transcript::Clock clock = {}) : transcript_(std::move(clock)) {}
    // Implementations may record extra attempts themselves and return via `record`.
    virtual RawReply do_send(const ProviderRequest& request) = 0;
    // Whether `send` records the call; HTTP records per attempt instead.
    virtual bool records_itself() const { return false; }
    void record(const ProviderRequest& request, std::int64_t started, const RawReply* reply, const std::string* error);

private:
    Transcript transcript_;
};

struct ParsedPayload {
    nlohmann::json value;
    // The exact substring the value was parsed from.
    std::string extracted;
    std::vector<std::string> warnings;
};

// Finds the first well-formed JSON value (fenced or after prose) and checks it
// against `shape`. Throws Error{NoPayloadFound} or Error{ShapeMismatch}.
ParsedPayload parse_structured_payload(std::string_view text, const Shape& shape);

// Returns a message naming the first failing path, or nullopt when valid.
std::optional<std::string> check_shape(const nlohmann::json& value, const Shape& shape,
                                       std::vector<std::string>* warnings = nullptr);

struct StructuredOptions {
    int max_attempts = 2;
    // Semantic check run after the shape check; returns an error message to trigger a retry.
    std::function<std::optional<std::string>(const nlohmann::json&)> validator;
};

// Sends a structured request, retrying once with the validation error appended.
// Throws Error{MalformedOutput} after the last attempt; ProviderError passes through.
ProviderResponse complete_structured(Provider& provider, const ProviderRequest& request,
                                     const StructuredOptions& options = {});

// Sends an image request and returns the image. A Rejected provider failure
// surfaces as Error{ContentRejected} with the provider's message.
Image complete_image(Provider& provider, const ProviderRequest& request);

std::string sha256_hex(std::string_view data);
std::string base64_encode(std::string_view data);
std::string base64_decode(std::string_view data);

}  // namespace tomigo
