#include <doctest.h>

#include <atomic>
#include <memory>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "semdrift/http_client.hpp"

using namespace semdrift;

namespace {

// Local mock server fixture; each test installs handlers and gets a port.
class MockServer {
public:
    MockServer() {
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~MockServer() {
        server_.stop();
        thread_.join();
    }
    httplib::Server& server() { return server_; }
    std::string url(const std::string& path) const {
        return "http://127.0.0.1:" + std::to_string(port_) + path;
    }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

std::string completion_body(const std::string& content) {
    nlohmann::json j;
    j["choices"] = nlohmann::json::array(
        {{{"message", {{"role", "assistant"}, {"content", content}}}}});
    return j.dump();
}

}  // namespace

TEST_CASE("url parsing") {
    const auto a = parse_url("http://localhost:8080/v1/chat/completions");
    CHECK(a.base == "http://localhost:8080");
    CHECK(a.path == "/v1/chat/completions");
    const auto b = parse_url("https://api.example.com");
    CHECK(b.base == "https://api.example.com");
    CHECK(b.path == "/");
    CHECK_THROWS_AS(parse_url("not-a-url"), Error);
}

TEST_CASE("chat generator conformance against a canned endpoint") {
    MockServer mock;
    nlohmann::json last_request;
    mock.server().Post("/v1/chat/completions",
                       [&](const httplib::Request& req, httplib::Response& res) {
                           last_request = nlohmann::json::parse(req.body);
                           res.set_content(completion_body("canned reply"),
                                           "application/json");
                       });
    HttpClientConfig config;
    config.url = mock.url("/v1/chat/completions");
    config.api_key = "test-key";
    config.backoff_ms = 1;
    HttpChatGenerator gen(config);

    GenerationRequest req;
    req.prompt = "say something";
    req.temperature = 0.7;
    req.max_tokens = 128;
    req.model_id = "mock-model";
    CHECK(gen.generate(req) == "canned reply");
    CHECK(last_request["model"] == "mock-model");
    CHECK(last_request["temperature"] == doctest::Approx(0.7));
    CHECK(last_request["max_tokens"] == 128);
    CHECK(last_request["messages"][0]["content"] == "say something");
}

TEST_CASE("transient failures retry with backoff, then succeed") {
    MockServer mock;
    std::atomic<int> calls{0};
    mock.server().Post("/v1/chat/completions",
                       [&](const httplib::Request&, httplib::Response& res) {
                           if (++calls <= 2) {
                               res.status = 500;
                               res.set_content("overloaded", "text/plain");
                           } else {
                               res.set_content(completion_body("recovered"),
                                               "application/json");
                           }
                       });
    HttpClientConfig config;
    config.url = mock.url("/v1/chat/completions");
    config.backoff_ms = 1;
    int waits = 0;
    config.on_wait = [&](int) { ++waits; };
    HttpChatGenerator gen(config);
    GenerationRequest req;
    req.prompt = "x";
    CHECK(gen.generate(req) == "recovered");
    CHECK(calls == 3);
    CHECK(waits == 2);
}

TEST_CASE("permanent HTTP errors do not retry") {
    MockServer mock;
    std::atomic<int> calls{0};
    mock.server().Post("/v1/chat/completions",
                       [&](const httplib::Request&, httplib::Response& res) {
                           ++calls;
                           res.status = 400;
                           res.set_content("bad request", "text/plain");
                       });
    HttpClientConfig config;
    config.url = mock.url("/v1/chat/completions");
    config.backoff_ms = 1;
    HttpChatGenerator gen(config);
    GenerationRequest req;
    req.prompt = "x";
    try {
        gen.generate(req);
        FAIL("expected http_error");
    } catch (const Error& e) {
        CHECK(e.kind() == "http_error");
    }
    CHECK(calls == 1);
}

TEST_CASE("rate limits exhaust attempts with a typed error") {
    MockServer mock;
    std::atomic<int> calls{0};
    mock.server().Post("/v1/chat/completions",
                       [&](const httplib::Request&, httplib::Response& res) {
                           ++calls;
                           res.status = 429;
                           res.set_content("slow down", "text/plain");
                       });
    HttpClientConfig config;
    config.url = mock.url("/v1/chat/completions");
    config.backoff_ms = 1;
    config.max_attempts = 3;
    HttpChatGenerator gen(config);
    GenerationRequest req;
    req.prompt = "x";
    CHECK_THROWS_AS(gen.generate(req), Error);
    CHECK(calls == 3);
}

TEST_CASE("empty completions surface a typed error") {
    MockServer mock;
    mock.server().Post("/v1/chat/completions",
                       [&](const httplib::Request&, httplib::Response& res) {
                           res.set_content(completion_body(""),
                                           "application/json");
                       });
    HttpClientConfig config;
    config.url = mock.url("/v1/chat/completions");
    config.backoff_ms = 1;
    HttpChatGenerator gen(config);
    GenerationRequest req;
    req.prompt = "x";
    try {
        gen.generate(req);
        FAIL("expected empty_generation");
    } catch (const Error& e) {
        CHECK(e.kind() == "empty_generation");
    }
}

TEST_CASE("http embedder parses the embeddings wire shape") {
    MockServer mock;
    mock.server().Post("/v1/embeddings",
                       [&](const httplib::Request& req, httplib::Response& res) {
                           const auto body = nlohmann::json::parse(req.body);
                           CHECK(body["model"] == "embed-model");
                           nlohmann::json j;
                           j["data"] = nlohmann::json::array(
                               {{{"embedding", {0.6, 0.8, 0.0}}}});
                           res.set_content(j.dump(), "application/json");
                       });
    HttpClientConfig config;
    config.url = mock.url("/v1/embeddings");
    config.backoff_ms = 1;
    HttpEmbedder embedder(config, "embed-model");
    const Embedding e = embedder.embed("some text");
    REQUIRE(e.values.size() == 3);
    CHECK(e.values[0] == doctest::Approx(0.6));
    CHECK(embedder.dim() == 3);
}
