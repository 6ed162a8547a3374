#pragma once
// Remote backends speaking the de-facto chat-completions and embeddings
// JSON wire shapes. Any compatible endpoint works; no provider-specific
// features. Transient failures (connect errors, 429, 5xx) are retried with
// exponential backoff; Retry-After waits are honored and surfaced through
// the optional wait callback.

#include <cstdint>
#include <functional>
#include <string>

#include "semdrift/embed.hpp"
#include "semdrift/generator.hpp"

namespace semdrift {

struct HttpClientConfig {
    std::string url;      // full endpoint URL, e.g. http://host:8080/v1/chat/completions
    std::string api_key;  // sent as "Authorization: Bearer <key>" when non-empty
    int max_attempts = 3;
    int backoff_ms = 250;       // doubled per retry
    int timeout_seconds = 60;
    // Called before sleeping on a retry with the wait in milliseconds.
    std::function<void(int)> on_wait;
};

// Reads SEMDRIFT_CHAT_URL / SEMDRIFT_EMBED_URL and SEMDRIFT_API_KEY.
HttpClientConfig http_config_from_env(bool embeddings);

struct ParsedUrl {
    std::string base;  // scheme://host[:port]
    std::string path;  // /path, defaults to "/"
};
ParsedUrl parse_url(const std::string& url);

class HttpChatGenerator : public Generator {
public:
    explicit HttpChatGenerator(HttpClientConfig config);
    std::string id() const override { return "http-chat"; }
    std::string generate(const GenerationRequest& request) override;

private:
    HttpClientConfig config_;
};

class HttpEmbedder : public Embedder {
public:
    HttpEmbedder(HttpClientConfig config, std::string model,
                 std::size_t expected_dim = 3072);
    std::string id() const override { return "http-embed:" + model_; }
    std::size_t dim() const override { return dim_; }
    Embedding embed(const std::string& text) override;

private:
    HttpClientConfig config_;
    std::string model_;
    std::size_t dim_;
};

}  // namespace semdrift
