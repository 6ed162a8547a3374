#include "semdrift/http_client.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace semdrift {

HttpClientConfig http_config_from_env(bool embeddings) {
    HttpClientConfig config;
    const char* url = std::getenv(embeddings ? "SEMDRIFT_EMBED_URL"
                                             : "SEMDRIFT_CHAT_URL");
    if (url != nullptr) config.url = url;
    const char* key = std::getenv("SEMDRIFT_API_KEY");
    if (key != nullptr) config.api_key = key;
    return config;
}

ParsedUrl parse_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw Error("bad_url", "URL needs a scheme: " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    ParsedUrl parsed;
    if (path_start == std::string::npos) {
        parsed.base = url;
        parsed.path = "/";
    } else {
        parsed.base = url.substr(0, path_start);
        parsed.path = url.substr(path_start);
    }
    return parsed;
}

namespace {

struct HttpResponse {
    int status = 0;
    std::string body;
};

// POST with retry/backoff on transient failures. Throws on permanent errors.
HttpResponse post_json(const HttpClientConfig& config,
                       const std::string& body) {
    const ParsedUrl url = parse_url(config.url);
    int backoff = config.backoff_ms;
    std::string last_error;
    for (int attempt = 1; attempt <= config.max_attempts; ++attempt) {
        httplib::Client client(url.base);
        client.set_connection_timeout(config.timeout_seconds, 0);
        client.set_read_timeout(config.timeout_seconds, 0);
        httplib::Headers headers;
        if (!config.api_key.empty()) {
            headers.emplace("Authorization", "Bearer " + config.api_key);
        }
        auto res = client.Post(url.path, headers, body, "application/json");
        if (res) {
            if (res->status >= 200 && res->status < 300) {
                return {res->status, res->body};
            }
            const bool transient = res->status == 429 || res->status >= 500;
            if (!transient) {
                throw Error("http_error", "HTTP " + std::to_string(res->status) +
                                              " from " + config.url + ": " +
                                              res->body.substr(0, 200));
            }
            last_error = "HTTP " + std::to_string(res->status);
            if (attempt < config.max_attempts) {
                int wait = backoff;
                if (res->has_header("Retry-After")) {
                    // Rate-limit waits are server-directed; surface them.
                    wait = std::max(
                        wait, 1000 * std::atoi(
                                        res->get_header_value("Retry-After")
                                            .c_str()));
                }
                if (config.on_wait) config.on_wait(wait);
                std::this_thread::sleep_for(std::chrono::milliseconds(wait));
            }
        } else {
            last_error = "connect error " + std::to_string(static_cast<int>(res.error()));
            if (attempt < config.max_attempts) {
                if (config.on_wait) config.on_wait(backoff);
                std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
            }
        }
        backoff *= 2;
    }
    throw Error("http_error", "request to " + config.url + " failed after " +
                                  std::to_string(config.max_attempts) +
                                  " attempts: " + last_error);
}

}  // namespace

HttpChatGenerator::HttpChatGenerator(HttpClientConfig config)
    : config_(std::move(config)) {
    if (config_.url.empty()) {
        throw Error("bad_config", "chat endpoint URL is empty "
                                  "(set SEMDRIFT_CHAT_URL)");
    }
}

std::string HttpChatGenerator::generate(const GenerationRequest& request) {
    nlohmann::json body;
    body["model"] = request.model_id;
    body["messages"] = nlohmann::json::array(
        {{{"role", "user"}, {"content", request.prompt}}});
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_tokens;

    const HttpResponse res = post_json(config_, body.dump());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(res.body);
    } catch (const std::exception& ex) {
        throw Error("bad_response", std::string("invalid completion JSON: ") +
                                        ex.what());
    }
    if (!j.contains("choices") || j["choices"].empty()) {
        throw Error("bad_response", "completion response has no choices");
    }
    const std::string text =
        j["choices"][0].value("message", nlohmann::json::object())
            .value("content", "");
    if (text.empty()) {
        throw Error("empty_generation", "backend returned an empty completion");
    }
    return text;
}

HttpEmbedder::HttpEmbedder(HttpClientConfig config, std::string model,
                           std::size_t expected_dim)
    : config_(std::move(config)), model_(std::move(model)), dim_(expected_dim) {
    if (config_.url.empty()) {
        throw Error("bad_config", "embeddings endpoint URL is empty "
                                  "(set SEMDRIFT_EMBED_URL)");
    }
}

Embedding HttpEmbedder::embed(const std::string& text) {
    nlohmann::json body;
    body["model"] = model_;
    body["input"] = nlohmann::json::array({text});

    const HttpResponse res = post_json(config_, body.dump());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(res.body);
    } catch (const std::exception& ex) {
        throw Error("bad_response", std::string("invalid embedding JSON: ") +
                                        ex.what());
    }
    if (!j.contains("data") || j["data"].empty() ||
        !j["data"][0].contains("embedding")) {
        throw Error("bad_response", "embedding response has no data");
    }
    Embedding e;
    e.values = j["data"][0]["embedding"].get<std::vector<double>>();
    if (e.values.empty()) {
        throw Error("bad_response", "embedding vector is empty");
    }
    dim_ = e.values.size();
    return e;
}

}  // namespace semdrift
