#pragma once

#include <chrono>
#include <functional>
#include <string>

#include "tomigo/provider.hpp"

namespace tomigo {

struct HttpProviderConfig {
    std::string base_url;  // e.g. https://api.openai.com/v1
    std::string api_key;
    std::string model_text = "o4-mini";
    std::string model_image = "gpt-image-1";
    int max_attempts = 3;
    double backoff_base_seconds = 1.0;
    double backoff_factor = 2.0;
    std::chrono::seconds timeout{120};
    // Replaceable so tests can observe delays without waiting.
    std::function<void(double seconds)> sleep;

    // Reads TOMIGO_API_KEY, TOMIGO_PROVIDER_URL, TOMIGO_MODEL_TEXT, TOMIGO_MODEL_IMAGE.
    // Throws Error{ConfigError} naming the first missing required variable.
    static HttpProviderConfig from_env();
};

// Client for OpenAI-compatible chat and image endpoints. Transport failures and
// 429s are retried with exponential backoff; every attempt is transcribed.
class HttpProvider final : public Provider {
public:
    explicit HttpProvider(HttpProviderConfig config);

protected:
    RawReply do_send(const ProviderRequest& request) override;
    bool records_itself() const override { return true; }

private:
    RawReply attempt(const ProviderRequest& request);
    RawReply send_chat(const ProviderRequest& request);
    RawReply send_image(const ProviderRequest& request);

    HttpProviderConfig config_;
    std::string origin_;  // scheme://host[:port]
    std::string prefix_;  // path prefix such as /v1
};

}  // namespace tomigo
