#pragma once
// Embedding providers and the chunk-and-pool document embedding, with a
// content-addressed disk cache and a deterministic offline embedder.

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "semdrift/common.hpp"

namespace semdrift {

struct Embedding {
    std::vector<double> values;
    bool unit = false;  // true once L2-normalized

    std::size_t dim() const { return values.size(); }
};

// L2-normalize in place. Throws on zero vectors.
void normalize(Embedding& e);

double l2_norm(const Embedding& e);

// Dot product of unit vectors. Both inputs must be normalized and of equal
// dimension.
double cosine(const Embedding& a, const Embedding& b);

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::string id() const = 0;
    virtual std::size_t dim() const = 0;
    // Raw (unnormalized) embedding of one text.
    virtual Embedding embed(const std::string& text) = 0;
};

// Deterministic feature-hash of character trigrams into 256 dimensions.
// Identical texts map to identical vectors; near-duplicate texts land close
// in cosine. No model, no network; the test and desk-scale workhorse.
class OfflineEmbedder : public Embedder {
public:
    static constexpr std::size_t kDim = 256;
    std::string id() const override { return "offline-ngram-256"; }
    std::size_t dim() const override { return kDim; }
    Embedding embed(const std::string& text) override;
};

// Chunk-and-pool: split into non-overlapping chunks of at most `chunk_limit`
// characters, embed each, mean-pool, L2-normalize. Single-chunk documents
// bypass pooling but are still normalized.
Embedding embed_document(const std::string& text, Embedder& provider,
                         std::size_t chunk_limit = 8000);

// Wraps a provider with an in-memory + on-disk cache keyed by
// (provider id, content hash). Pass an empty cache_dir for memory-only.
class CachingEmbedder : public Embedder {
public:
    CachingEmbedder(std::shared_ptr<Embedder> inner, std::string cache_dir);

    std::string id() const override { return inner_->id(); }
    std::size_t dim() const override { return inner_->dim(); }
    Embedding embed(const std::string& text) override;

    std::uint64_t hits() const { return hits_; }
    std::uint64_t misses() const { return misses_; }

private:
    std::string key_path(std::uint64_t key) const;

    std::shared_ptr<Embedder> inner_;
    std::string cache_dir_;
    std::unordered_map<std::uint64_t, Embedding> memory_;
    std::uint64_t hits_ = 0;
    std::uint64_t misses_ = 0;
    std::mutex mutex_;
};

}  // namespace semdrift
