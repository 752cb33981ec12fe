#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "test_support.hpp"
#include "tomigo/error.hpp"
#include "tomigo/http_provider.hpp"

namespace tomigo {
namespace {

using nlohmann::json;

// Local stand-in for an OpenAI-compatible endpoint.
class FakeApi {
public:
    FakeApi() {
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeApi() {
        server_.stop();
        thread_.join();
    }

    httplib::Server& server() { return server_; }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

HttpProviderConfig config_for(const FakeApi& api, std::vector<double>* sleeps) {
    HttpProviderConfig c;
    c.base_url = api.url();
    c.api_key = "sk-test";
    c.timeout = std::chrono::seconds(5);
    c.sleep = [sleeps](double s) { sleeps->push_back(s); };
    return c;
}

ProviderRequest structured() {
    ProviderRequest r;
    r.kind = RequestKind::TextStructured;
    r.stage = "question";
    r.expected_shape = Shape::object({required("text", Shape::string())});
    r.text("Ask something.");
    return r;
}

std::string chat_reply(const std::string& content) {
    return json({{"choices", {{{"message", {{"content", content}}}}}},
                 {"usage", {{"prompt_tokens", 11}, {"completion_tokens", 7}}}})
        .dump();
}

TEST(HttpProvider, ChatRequestShapeAndUsage) {
    FakeApi api;
    json seen;
    std::string auth;
    api.server().Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        seen = json::parse(req.body);
        auth = req.get_header_value("Authorization");
        res.set_content(chat_reply(R"({"text":"Who is the audience?"})"), "application/json");
    });
    std::vector<double> sleeps;
    auto cfg = config_for(api, &sleeps);
    cfg.model_text = "test-model";
    HttpProvider provider(cfg);
    ProviderResponse r = complete_structured(provider, structured());
    EXPECT_EQ(r.parsed["text"], "Who is the audience?");
    EXPECT_EQ(r.usage.input_tokens, 11);
    EXPECT_EQ(r.usage.output_tokens, 7);
    EXPECT_EQ(auth, "Bearer sk-test");
    EXPECT_EQ(seen["model"], "test-model");
    EXPECT_EQ(seen["messages"][0]["content"][0]["text"], "Ask something.");
    EXPECT_TRUE(sleeps.empty());
    EXPECT_EQ(provider.transcript().size(), 1u);
}

TEST(HttpProvider, VisionPartsAreDataUris) {
    FakeApi api;
    json seen;
    api.server().Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        seen = json::parse(req.body);
        res.set_content(chat_reply(R"({"text":"ok"})"), "application/json");
    });
    std::vector<double> sleeps;
    HttpProvider provider(config_for(api, &sleeps));
    ProviderRequest r = structured();
    r.kind = RequestKind::VisionStructured;
    r.image({0, "image/png", testing::fake_png("z"), {}});
    complete_structured(provider, r);
    std::string url = seen["messages"][0]["content"][1]["image_url"]["url"];
    EXPECT_EQ(url, "data:image/png;base64," + base64_encode(testing::fake_png("z")));
}

TEST(HttpProvider, RetriesServerErrorsWithExponentialBackoff) {
    FakeApi api;
    std::atomic<int> calls{0};
    api.server().Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        if (++calls < 3) {
            res.status = 503;
            res.set_content("busy", "text/plain");
            return;
        }
        res.set_content(chat_reply(R"({"text":"third time"})"), "application/json");
    });
    std::vector<double> sleeps;
    auto cfg = config_for(api, &sleeps);
    cfg.backoff_base_seconds = 0.5;
    HttpProvider provider(cfg);
    EXPECT_EQ(complete_structured(provider, structured()).parsed["text"], "third time");
    EXPECT_EQ(sleeps, (std::vector<double>{0.5, 1.0}));
    auto entries = provider.transcript().entries();
    ASSERT_EQ(entries.size(), 3u);
    EXPECT_TRUE(entries[0].error.has_value());
    EXPECT_TRUE(entries[1].error.has_value());
    EXPECT_TRUE(entries[2].response.has_value());
}

TEST(HttpProvider, RateLimitHonoursRetryAfterThenGivesUp) {
    FakeApi api;
    api.server().Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        res.status = 429;
        res.set_header("Retry-After", "7");
    });
    std::vector<double> sleeps;
    HttpProvider provider(config_for(api, &sleeps));
    try {
        provider.send(structured());
        FAIL();
    } catch (const ProviderError& e) {
        EXPECT_EQ(e.kind(), ProviderFailure::RateLimited);
        EXPECT_EQ(e.retry_after(), 7.0);
    }
    EXPECT_EQ(sleeps, (std::vector<double>{7.0, 7.0}));
    EXPECT_EQ(provider.transcript().size(), 3u);
}

TEST(HttpProvider, AuthAndRejectionAreNotRetried) {
    FakeApi api;
    int status = 401;
    api.server().Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) { res.status = status; });
    std::vector<double> sleeps;
    HttpProvider provider(config_for(api, &sleeps));
    try {
        provider.send(structured());
        FAIL();
    } catch (const ProviderError& e) {
        EXPECT_EQ(e.kind(), ProviderFailure::Auth);
    }
    status = 400;
    try {
        provider.send(structured());
        FAIL();
    } catch (const ProviderError& e) {
        EXPECT_EQ(e.kind(), ProviderFailure::Rejected);
    }
    EXPECT_TRUE(sleeps.empty());
    EXPECT_EQ(provider.transcript().size(), 2u);
}

TEST(HttpProvider, UnreachableHostIsTransport) {
    std::vector<double> sleeps;
    HttpProviderConfig c;
    c.base_url = "http://127.0.0.1:1/v1";
    c.api_key = "k";
    c.max_attempts = 2;
    c.sleep = [&](double s) { sleeps.push_back(s); };
    HttpProvider provider(c);
    try {
        provider.send(structured());
        FAIL();
    } catch (const ProviderError& e) {
        EXPECT_EQ(e.kind(), ProviderFailure::Transport);
    }
    EXPECT_EQ(sleeps.size(), 1u);
}

TEST(HttpProvider, ImageGenerationAndEdit) {
    FakeApi api;
    json gen_body;
    std::size_t edit_files = 0;
    std::string png = testing::fake_png("generated");
    auto reply = json({{"data", {{{"b64_json", base64_encode(png)}}}}}).dump();
    api.server().Post("/v1/images/generations", [&](const httplib::Request& req, httplib::Response& res) {
        gen_body = json::parse(req.body);
        res.set_content(reply, "application/json");
    });
    api.server().Post("/v1/images/edits", [&](const httplib::Request& req, httplib::Response& res) {
        edit_files = req.files.count("image[]");
        res.set_content(reply, "application/json");
    });
    std::vector<double> sleeps;
    HttpProvider provider(config_for(api, &sleeps));

    ProviderRequest gen;
    gen.kind = RequestKind::ImageGeneration;
    gen.stage = "generate";
    gen.text("A magician");
    Image out = complete_image(provider, gen);
    EXPECT_EQ(out.bytes, png);
    EXPECT_EQ(out.media_type, "image/png");
    EXPECT_EQ(gen_body["prompt"], "A magician");

    ProviderRequest edit = gen;
    edit.kind = RequestKind::ImageEdit;
    edit.stage = "update";
    edit.image({0, "image/png", testing::fake_png("base"), {}});
    complete_image(provider, edit);
    EXPECT_EQ(edit_files, 1u);
}

TEST(HttpProvider, ConfigValidation) {
    HttpProviderConfig c;
    EXPECT_THROW(HttpProvider{c}, Error);
    c.api_key = "k";
    c.base_url = "no-scheme";
    try {
        HttpProvider p(c);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::ConfigError);
    }
}

TEST(HttpProvider, FromEnv) {
    ::unsetenv("TOMIGO_API_KEY");
    ::setenv("TOMIGO_PROVIDER_URL", "http://localhost:9/v1", 1);
    try {
        HttpProviderConfig::from_env();
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::ConfigError);
        EXPECT_NE(e.detail().find("TOMIGO_API_KEY"), std::string::npos);
    }
    ::setenv("TOMIGO_API_KEY", "k", 1);
    ::setenv("TOMIGO_MODEL_TEXT", "m-text", 1);
    HttpProviderConfig c = HttpProviderConfig::from_env();
    EXPECT_EQ(c.api_key, "k");
    EXPECT_EQ(c.base_url, "http://localhost:9/v1");
    EXPECT_EQ(c.model_text, "m-text");
    EXPECT_EQ(c.model_image, "gpt-image-1");
    ::unsetenv("TOMIGO_API_KEY");
    ::unsetenv("TOMIGO_PROVIDER_URL");
    ::unsetenv("TOMIGO_MODEL_TEXT");
}

}  // namespace
}  // namespace tomigo
