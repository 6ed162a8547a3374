#include "semdrift/embed.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <unordered_map>

#include "semdrift/corpus.hpp"
#include "semdrift/rng.hpp"

namespace semdrift {

double l2_norm(const Embedding& e) {
    double s = 0.0;
    for (double v : e.values) s += v * v;
    return std::sqrt(s);
}

void normalize(Embedding& e) {
    const double n = l2_norm(e);
    if (n == 0.0 || !std::isfinite(n)) {
        throw Error("degenerate_embedding", "cannot normalize zero vector");
    }
    for (double& v : e.values) v /= n;
    e.unit = true;
}

double cosine(const Embedding& a, const Embedding& b) {
    if (a.dim() != b.dim()) {
        throw Error("dim_mismatch",
                    "cosine: dimension mismatch " + std::to_string(a.dim()) +
                        " vs " + std::to_string(b.dim()));
    }
    if (!a.unit || !b.unit) {
        throw Error("not_normalized", "cosine requires unit-normalized inputs");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) s += a.values[i] * b.values[i];
    return s;
}

Embedding OfflineEmbedder::embed(const std::string& text) {
    // Trigrams are taken within boundary-padded tokens, so punctuation and
    // whitespace layout do not perturb the vector and disjoint vocabularies
    // land near-orthogonal. Term frequencies enter dampened (square root):
    // raw counts would square under the L2 geometry and let any highly
    // repeated phrase drown the rest of the document.
    std::unordered_map<std::uint64_t, std::size_t> gram_counts;
    for (const auto& tok : tokenize(text)) {
        const std::string padded = "#" + tok + "#";
        if (padded.size() < 3) continue;
        for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
            const std::uint64_t h =
                fnv1a64(std::string_view(padded).substr(i, 3));
            ++gram_counts[h];
        }
    }
    Embedding e;
    e.values.assign(kDim, 0.0);
    for (const auto& [raw_hash, count] : gram_counts) {
        // Finalizer mix: raw FNV avalanches poorly on 3-byte input.
        std::uint64_t h = raw_hash;
        h = splitmix64(h);
        const std::size_t idx = static_cast<std::size_t>(h % kDim);
        const double sign = (h >> 63) ? 1.0 : -1.0;
        e.values[idx] += sign * std::sqrt(static_cast<double>(count));
    }
    return e;
}

Embedding embed_document(const std::string& text, Embedder& provider,
                         std::size_t chunk_limit) {
    if (text.empty()) throw Error("empty_text", "embed_document: empty text");
    if (chunk_limit == 0) throw Error("bad_chunk_limit", "chunk_limit must be > 0");

    if (text.size() <= chunk_limit) {
        Embedding e = provider.embed(text);
        normalize(e);
        return e;
    }

    Embedding pooled;
    pooled.values.assign(provider.dim(), 0.0);
    std::size_t n_chunks = 0;
    for (std::size_t off = 0; off < text.size(); off += chunk_limit) {
        const std::string chunk = text.substr(off, chunk_limit);
        Embedding u = provider.embed(chunk);
        if (u.dim() != pooled.dim()) {
            throw Error("dim_mismatch", "provider returned inconsistent dimension");
        }
        for (std::size_t i = 0; i < u.values.size(); ++i) pooled.values[i] += u.values[i];
        ++n_chunks;
    }
    for (double& v : pooled.values) v /= static_cast<double>(n_chunks);
    normalize(pooled);
    return pooled;
}

CachingEmbedder::CachingEmbedder(std::shared_ptr<Embedder> inner,
                                 std::string cache_dir)
    : inner_(std::move(inner)), cache_dir_(std::move(cache_dir)) {
    if (!cache_dir_.empty()) {
        std::filesystem::create_directories(cache_dir_);
    }
}

std::string CachingEmbedder::key_path(std::uint64_t key) const {
    return cache_dir_ + "/" + hex64(key) + ".vec";
}

Embedding CachingEmbedder::embed(const std::string& text) {
    const std::uint64_t key = fnv1a64(inner_->id()) ^ fnv1a64(text);
    {
        std::lock_guard lock(mutex_);
        auto it = memory_.find(key);
        if (it != memory_.end()) {
            ++hits_;
            return it->second;
        }
        if (!cache_dir_.empty()) {
            std::ifstream in(key_path(key), std::ios::binary);
            if (in) {
                std::uint64_t n = 0;
                in.read(reinterpret_cast<char*>(&n), sizeof(n));
                Embedding e;
                e.values.resize(n);
                in.read(reinterpret_cast<char*>(e.values.data()),
                        static_cast<std::streamsize>(n * sizeof(double)));
                if (in) {
                    ++hits_;
                    memory_[key] = e;
                    return e;
                }
            }
        }
    }
    Embedding e = inner_->embed(text);
    {
        std::lock_guard lock(mutex_);
        ++misses_;
        memory_[key] = e;
        if (!cache_dir_.empty()) {
            std::ofstream out(key_path(key), std::ios::binary);
            const std::uint64_t n = e.values.size();
            out.write(reinterpret_cast<const char*>(&n), sizeof(n));
            out.write(reinterpret_cast<const char*>(e.values.data()),
                      static_cast<std::streamsize>(n * sizeof(double)));
        }
    }
    return e;
}

}  // namespace semdrift
