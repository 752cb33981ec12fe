#include "tomigo/provider.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>

#include "tomigo/error.hpp"

namespace tomigo {

using nlohmann::json;

std::string sniff_media_type(std::string_view b) {
    if (b.size() >= 8 && b.substr(0, 8) == std::string_view("\x89PNG\r\n\x1a\n", 8)) return "image/png";
    if (b.size() >= 3 && b.substr(0, 3) == std::string_view("\xff\xd8\xff", 3)) return "image/jpeg";
    if (b.size() >= 6 && (b.substr(0, 6) == "GIF87a" || b.substr(0, 6) == "GIF89a")) return "image/gif";
    if (b.size() >= 12 && b.substr(0, 4) == "RIFF" && b.substr(8, 4) == "WEBP") return "image/webp";
    return {};
}

std::string extension_for_media_type(std::string_view media_type) {
    if (media_type == "image/png") return "png";
    if (media_type == "image/jpeg") return "jpg";
    if (media_type == "image/gif") return "gif";
    if (media_type == "image/webp") return "webp";
    return "bin";
}

std::string_view request_kind_name(RequestKind kind) {
    switch (kind) {
        case RequestKind::TextStructured: return "TextStructured";
        case RequestKind::VisionStructured: return "VisionStructured";
        case RequestKind::ImageGeneration: return "ImageGeneration";
        case RequestKind::ImageEdit: return "ImageEdit";
    }
    return "?";
}

Shape Shape::list(Shape element) { return {Type::List, {}, std::make_shared<const Shape>(std::move(element))}; }
Shape Shape::map(Shape value) { return {Type::Map, {}, std::make_shared<const Shape>(std::move(value))}; }
Shape Shape::object(std::vector<Field> fields) { return {Type::Object, std::move(fields), nullptr}; }

json Shape::describe() const {
    switch (type) {
        case Type::Any: return "any";
        case Type::String: return "string";
        case Type::Integer: return "integer";
        case Type::Number: return "number";
        case Type::Boolean: return "boolean";
        case Type::List: return json::array({item ? item->describe() : json("any")});
        case Type::Map: return {{"<key>", item ? item->describe() : json("any")}};
        case Type::Object: {
            json out = json::object();
            for (const auto& f : fields) out[f.required ? f.name : f.name + "?"] = f.shape.describe();
            return out;
        }
    }
    return "any";
}

void ProviderRequest::check() const {
    if (stage.empty()) throw Error(Errc::InvalidRequest, "request has no stage tag");
    if (structured() && expected_shape.empty()) {
        throw Error(Errc::InvalidRequest, "structured request '" + stage + "' has no expected shape");
    }
    if (!structured()) {
        bool has_text = false;
        for (const auto& p : parts) has_text = has_text || (!p.is_image() && !p.text.empty());
        if (!has_text) throw Error(Errc::InvalidRequest, "image request '" + stage + "' has no text part");
    }
}

json ProviderRequest::to_json() const {
    json jparts = json::array();
    for (const auto& p : parts) {
        if (p.is_image()) {
            jparts.push_back({{"image",
                               {{"index", p.image->index},
                                {"media_type", p.image->media_type},
                                {"bytes", p.image->bytes.size()},
                                {"sha256", sha256_hex(p.image->bytes)}}}});
        } else {
            jparts.push_back({{"text", p.text}});
        }
    }
    json out = {{"kind", request_kind_name(kind)}, {"stage", stage}, {"parts", std::move(jparts)}};
    if (structured()) out["expected_shape"] = expected_shape.describe();
    return out;
}

Transcript::Transcript(Clock clock) : clock_(std::move(clock)) {}

std::int64_t Transcript::now() {
    std::lock_guard lock(mutex_);
    return clock_ ? clock_() : tick_++;
}

void Transcript::append(TranscriptEntry entry) {
    std::lock_guard lock(mutex_);
    entry.sequence = entries_.size();
    entries_.push_back(std::move(entry));
}

std::vector<TranscriptEntry> Transcript::entries() const {
    std::lock_guard lock(mutex_);
    return entries_;
}

std::size_t Transcript::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

std::size_t Transcript::count_stage(std::string_view stage) const {
    std::lock_guard lock(mutex_);
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.request.value("stage", std::string{}) == stage ? 1 : 0;
    return n;
}

std::string Transcript::to_jsonl() const {
    std::lock_guard lock(mutex_);
    std::string out;
    for (const auto& e : entries_) {
        json line = {{"seq", e.sequence}, {"started_at", e.started_at}, {"finished_at", e.finished_at},
                     {"request", e.request}};
        if (e.response) line["response"] = *e.response;
        if (e.error) line["error"] = *e.error;
        out += line.dump(-1, ' ', false, json::error_handler_t::replace);
        out += '\n';
    }
    return out;
}

namespace {

std::string summarize_reply(const RawReply& reply) {
    if (reply.image) {
        return "<image " + reply.image->media_type + " " + std::to_string(reply.image->bytes.size()) +
               " bytes sha256=" + sha256_hex(reply.image->bytes) + ">";
    }
    return reply.text;
}

}  // namespace

void Provider::record(const ProviderRequest& request, std::int64_t started, const RawReply* reply,
                      const std::string* error) {
    TranscriptEntry entry;
    entry.started_at = started;
    entry.finished_at = transcript_.now();
    entry.request = request.to_json();
    if (reply) entry.response = summarize_reply(*reply);
    if (error) entry.error = *error;
    transcript_.append(std::move(entry));
}

RawReply Provider::send(const ProviderRequest& request) {
    request.check();
    if (records_itself()) return do_send(request);
    auto started = transcript_.now();
    try {
        RawReply reply = do_send(request);
        record(request, started, &reply, nullptr);
        return reply;
    } catch (const std::exception& e) {
        std::string message = e.what();
        record(request, started, nullptr, &message);
        throw;
    }
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// End offset (exclusive) of the bracketed value starting at `start`, string-aware.
std::optional<std::size_t> match_brackets(std::string_view text, std::size_t start) {
    std::vector<char> stack;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
        char c = text[i];
        if (in_string) {
            if (escaped) escaped = false;
            else if (c == '\\') escaped = true;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '{' || c == '[') stack.push_back(c == '{' ? '}' : ']');
        else if (c == '}' || c == ']') {
            if (stack.empty() || stack.back() != c) return std::nullopt;
            stack.pop_back();
            if (stack.empty()) return i + 1;
        }
    }
    return std::nullopt;
}

std::optional<std::pair<json, std::string>> try_parse(std::string_view candidate) {
    candidate = trim(candidate);
    if (candidate.empty()) return std::nullopt;
    json value = json::parse(candidate.begin(), candidate.end(), nullptr, false);
    if (value.is_discarded()) return std::nullopt;
    return std::make_pair(std::move(value), std::string(candidate));
}

std::optional<std::pair<json, std::string>> scan_for_value(std::string_view text) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '{' && text[i] != '[') continue;
        if (auto end = match_brackets(text, i)) {
            if (auto found = try_parse(text.substr(i, *end - i))) return found;
        }
    }
    return std::nullopt;
}

std::optional<std::pair<json, std::string>> extract_json(std::string_view text) {
    std::size_t pos = 0;
    while ((pos = text.find("```", pos)) != std::string_view::npos) {
        std::size_t body = text.find('\n', pos + 3);
        if (body == std::string_view::npos) break;
        std::size_t close = text.find("```", body + 1);
        if (close == std::string_view::npos) break;
        if (auto found = scan_for_value(text.substr(body + 1, close - body - 1))) return found;
        pos = close + 3;
    }
    return scan_for_value(text);
}

std::string_view type_label(Shape::Type t) {
    switch (t) {
        case Shape::Type::Any: return "any";
        case Shape::Type::String: return "string";
        case Shape::Type::Integer: return "integer";
        case Shape::Type::Number: return "number";
        case Shape::Type::Boolean: return "boolean";
        case Shape::Type::List: return "list";
        case Shape::Type::Object: return "object";
        case Shape::Type::Map: return "object";
    }
    return "any";
}

std::optional<std::string> check_at(const json& v, const Shape& s, const std::string& path,
                                    std::vector<std::string>* warnings) {
    auto fail = [&] { return (path.empty() ? "$" : path) + ": expected " + std::string(type_label(s.type)); };
    switch (s.type) {
        case Shape::Type::Any: return std::nullopt;
        case Shape::Type::String: return v.is_string() ? std::nullopt : std::optional(fail());
        case Shape::Type::Integer: return v.is_number_integer() ? std::nullopt : std::optional(fail());
        case Shape::Type::Number: return v.is_number() ? std::nullopt : std::optional(fail());
        case Shape::Type::Boolean: return v.is_boolean() ? std::nullopt : std::optional(fail());
        case Shape::Type::List: {
            if (!v.is_array()) return fail();
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (auto err = check_at(v[i], *s.item, path + "[" + std::to_string(i) + "]", warnings)) return err;
            }
            return std::nullopt;
        }
        case Shape::Type::Map: {
            if (!v.is_object()) return fail();
            for (const auto& [key, value] : v.items()) {
                if (auto err = check_at(value, *s.item, path.empty() ? key : path + "." + key, warnings)) return err;
            }
            return std::nullopt;
        }
        case Shape::Type::Object: {
            if (!v.is_object()) return fail();
            for (const auto& f : s.fields) {
                std::string sub = path.empty() ? f.name : path + "." + f.name;
                if (!v.contains(f.name) || (v.at(f.name).is_null() && f.required)) {
                    if (f.required) return sub + ": missing required field";
                    continue;
                }
                if (v.at(f.name).is_null()) continue;
                if (auto err = check_at(v.at(f.name), f.shape, sub, warnings)) return err;
            }
            if (warnings) {
                for (const auto& [key, _] : v.items()) {
                    bool known = std::any_of(s.fields.begin(), s.fields.end(), [&](const auto& f) { return f.name == key; });
                    if (!known) warnings->push_back("ignored unknown field '" + (path.empty() ? key : path + "." + key) + "'");
                }
            }
            return std::nullopt;
        }
    }
    return std::nullopt;
}

}  // namespace

std::optional<std::string> check_shape(const json& value, const Shape& shape, std::vector<std::string>* warnings) {
    return check_at(value, shape, "", warnings);
}

ParsedPayload parse_structured_payload(std::string_view text, const Shape& shape) {
    auto found = extract_json(text);
    if (!found) throw Error(Errc::NoPayloadFound, "no JSON value found in provider output");
    ParsedPayload out{std::move(found->first), std::move(found->second), {}};
    if (auto err = check_shape(out.value, shape, &out.warnings)) throw Error(Errc::ShapeMismatch, *err);
    return out;
}

ProviderResponse complete_structured(Provider& provider, const ProviderRequest& request,
                                     const StructuredOptions& options) {
    if (!request.structured()) throw Error(Errc::InvalidRequest, "complete_structured needs a structured request");
    ProviderRequest attempt = request;
    std::string last_error;
    for (int i = 0; i < std::max(1, options.max_attempts); ++i) {
        RawReply reply = provider.send(attempt);
        try {
            ParsedPayload payload = parse_structured_payload(reply.text, request.expected_shape);
            if (options.validator) {
                if (auto err = options.validator(payload.value)) throw Error(Errc::ShapeMismatch, *err);
            }
            return ProviderResponse{request.kind, std::move(reply.text), std::move(payload.value), std::nullopt,
                                    reply.usage, std::move(payload.warnings)};
        } catch (const Error& e) {
            last_error = e.what();
        }
        attempt = request;
        attempt.text("Your previous reply could not be used (" + last_error +
                     "). Reply again with only a JSON value of this shape: " + request.expected_shape.describe().dump());
    }
    throw Error(Errc::MalformedOutput, "stage '" + request.stage + "': " + last_error);
}

Image complete_image(Provider& provider, const ProviderRequest& request) {
    if (request.structured()) throw Error(Errc::InvalidRequest, "complete_image needs an image request");
    try {
        RawReply reply = provider.send(request);
        if (!reply.image || reply.image->bytes.empty()) {
            throw Error(Errc::MalformedOutput, "stage '" + request.stage + "' returned no image");
        }
        return std::move(*reply.image);
    } catch (const ProviderError& e) {
        if (e.kind() == ProviderFailure::Rejected) throw Error(Errc::ContentRejected, e.detail());
        throw;
    }
}

std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr);
    std::string hex;
    hex.reserve(len * 2);
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

std::string base64_encode(std::string_view data) {
    std::string out(4 * ((data.size() + 2) / 3), '\0');
    int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                            reinterpret_cast<const unsigned char*>(data.data()), static_cast<int>(data.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::string base64_decode(std::string_view data) {
    std::string clean;
    for (char c : data) {
        if (!std::isspace(static_cast<unsigned char>(c))) clean += c;
    }
    if (clean.size() % 4 != 0) throw Error(Errc::ParseError, "invalid base64 length");
    std::string out(3 * clean.size() / 4, '\0');
    int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                            reinterpret_cast<const unsigned char*>(clean.data()), static_cast<int>(clean.size()));
    if (n < 0) throw Error(Errc::ParseError, "invalid base64");
    std::size_t pad = 0;
    if (!clean.empty() && clean.back() == '=') ++pad;
    if (clean.size() > 1 && clean[clean.size() - 2] == '=') ++pad;
    out.resize(static_cast<std::size_t>(n) - pad);
    return out;
}

}  // namespace tomigo
