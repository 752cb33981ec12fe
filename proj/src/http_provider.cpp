#include "tomigo/http_provider.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "tomigo/error.hpp"

namespace tomigo {

using nlohmann::json;

namespace {

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return (v && *v) ? std::string(v) : fallback;
}

std::string require_env(const char* name) {
    const char* v = std::getenv(name);
    if (!v || !*v) throw Error(Errc::ConfigError, std::string("environment variable ") + name + " is not set");
    return v;
}

[[noreturn]] void throw_for_status(const httplib::Result& res) {
    if (!res) throw ProviderError(ProviderFailure::Transport, httplib::to_string(res.error()));
    const int status = res->status;
    std::string body = res->body.substr(0, 500);
    if (status == 401 || status == 403) throw ProviderError(ProviderFailure::Auth, "HTTP " + std::to_string(status));
    if (status == 429) {
        std::optional<double> retry_after;
        if (res->has_header("Retry-After")) {
            char* end = nullptr;
            std::string value = res->get_header_value("Retry-After");
            double secs = std::strtod(value.c_str(), &end);
            if (end != value.c_str()) retry_after = secs;
        }
        throw ProviderError(ProviderFailure::RateLimited, "HTTP 429 " + body, retry_after);
    }
    if (status >= 500) throw ProviderError(ProviderFailure::Transport, "HTTP " + std::to_string(status) + " " + body);
    throw ProviderError(ProviderFailure::Rejected, "HTTP " + std::to_string(status) + " " + body);
}

json parse_body(const std::string& body) {
    json doc = json::parse(body, nullptr, false);
    if (doc.is_discarded()) throw ProviderError(ProviderFailure::Transport, "response body is not JSON");
    return doc;
}

std::string data_uri(const Image& img) {
    if (!img.uri.empty() && img.bytes.empty()) return img.uri;
    return "data:" + img.media_type + ";base64," + base64_encode(img.bytes);
}

}  // namespace

HttpProviderConfig HttpProviderConfig::from_env() {
    HttpProviderConfig c;
    c.api_key = require_env("TOMIGO_API_KEY");
    c.base_url = require_env("TOMIGO_PROVIDER_URL");
    c.model_text = env_or("TOMIGO_MODEL_TEXT", c.model_text);
    c.model_image = env_or("TOMIGO_MODEL_IMAGE", c.model_image);
    return c;
}

HttpProvider::HttpProvider(HttpProviderConfig config) : config_(std::move(config)) {
    if (config_.api_key.empty()) throw Error(Errc::ConfigError, "TOMIGO_API_KEY is empty");
    if (config_.base_url.empty()) throw Error(Errc::ConfigError, "TOMIGO_PROVIDER_URL is empty");
    auto scheme_end = config_.base_url.find("://");
    if (scheme_end == std::string::npos) throw Error(Errc::ConfigError, "provider URL needs a scheme: " + config_.base_url);
    auto path_start = config_.base_url.find('/', scheme_end + 3);
    origin_ = config_.base_url.substr(0, path_start);
    prefix_ = path_start == std::string::npos ? "" : config_.base_url.substr(path_start);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
    if (!config_.sleep) {
        config_.sleep = [](double s) { std::this_thread::sleep_for(std::chrono::duration<double>(s)); };
    }
}

RawReply HttpProvider::do_send(const ProviderRequest& request) {
    const int attempts = std::max(1, config_.max_attempts);
    for (int i = 1;; ++i) {
        auto started = transcript().now();
        try {
            RawReply reply = attempt(request);
            record(request, started, &reply, nullptr);
            return reply;
        } catch (const ProviderError& e) {
            std::string message = e.what();
            record(request, started, nullptr, &message);
            bool retryable = e.kind() == ProviderFailure::Transport || e.kind() == ProviderFailure::RateLimited;
            if (!retryable || i >= attempts) throw;
            double delay = e.retry_after().value_or(config_.backoff_base_seconds *
                                                    std::pow(config_.backoff_factor, i - 1));
            config_.sleep(delay);
        }
    }
}

RawReply HttpProvider::attempt(const ProviderRequest& request) {
    return request.structured() ? send_chat(request) : send_image(request);
}

RawReply HttpProvider::send_chat(const ProviderRequest& request) {
    json content = json::array();
    for (const auto& part : request.parts) {
        if (part.is_image()) {
            content.push_back({{"type", "image_url"}, {"image_url", {{"url", data_uri(*part.image)}}}});
        } else {
            content.push_back({{"type", "text"}, {"text", part.text}});
        }
    }
    content.push_back({{"type", "text"},
                       {"text", "Respond with a single JSON value of this shape: " +
                                    request.expected_shape.describe().dump()}});
    json body = {{"model", config_.model_text},
                 {"messages", json::array({{{"role", "user"}, {"content", std::move(content)}}})},
                 {"response_format", {{"type", "json_object"}}}};

    httplib::Client client(origin_);
    client.set_read_timeout(config_.timeout);
    client.set_bearer_token_auth(config_.api_key);
    auto res = client.Post(prefix_ + "/chat/completions", body.dump(), "application/json");
    if (!res || res->status != 200) throw_for_status(res);
    json doc = parse_body(res->body);
    RawReply reply;
    try {
        reply.text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw ProviderError(ProviderFailure::Transport, std::string("unexpected chat response: ") + e.what());
    }
    if (doc.contains("usage")) {
        reply.usage.input_tokens = doc["usage"].value("prompt_tokens", 0);
        reply.usage.output_tokens = doc["usage"].value("completion_tokens", 0);
    }
    return reply;
}

RawReply HttpProvider::send_image(const ProviderRequest& request) {
    std::string prompt;
    std::vector<const Image*> images;
    for (const auto& part : request.parts) {
        if (part.is_image()) images.push_back(&*part.image);
        else prompt += (prompt.empty() ? "" : "\n\n") + part.text;
    }

    httplib::Client client(origin_);
    client.set_read_timeout(config_.timeout);
    client.set_bearer_token_auth(config_.api_key);
    httplib::Result res;
    if (images.empty()) {
        json body = {{"model", config_.model_image}, {"prompt", prompt}, {"n", 1}};
        res = client.Post(prefix_ + "/images/generations", body.dump(), "application/json");
    } else {
        httplib::MultipartFormDataItems items = {{"model", config_.model_image, "", ""}, {"prompt", prompt, "", ""}};
        for (const Image* img : images) {
            items.push_back({"image[]", img->bytes,
                             "image" + std::to_string(img->index) + "." + extension_for_media_type(img->media_type),
                             img->media_type});
        }
        res = client.Post(prefix_ + "/images/edits", items);
    }
    if (!res || res->status != 200) throw_for_status(res);
    json doc = parse_body(res->body);
    RawReply reply;
    try {
        Image out;
        out.bytes = base64_decode(doc.at("data").at(0).at("b64_json").get<std::string>());
        out.media_type = sniff_media_type(out.bytes);
        if (out.media_type.empty()) out.media_type = "image/png";
        reply.image = std::move(out);
    } catch (const json::exception& e) {
        throw ProviderError(ProviderFailure::Transport, std::string("unexpected image response: ") + e.what());
    }
    return reply;
}

}  // namespace tomigo
