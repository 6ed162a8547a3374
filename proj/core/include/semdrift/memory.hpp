#pragma once
// Long-term retrieval-augmented memory: per-agent vector store with exact
// cosine search, a relevance-ranked packing baseline, and the structured
// diversity-aware packing controller.

#include <cstdint>
#include <string>
#include <vector>

#include "semdrift/corpus.hpp"
#include "semdrift/embed.hpp"

namespace semdrift {

struct MemoryItem {
    std::uint64_t item_id = 0;
    std::string owner;
    int round = 0;  // round the event was written
    std::string text;
    Embedding embedding;  // unit vector
    EventKind type = EventKind::Main;
    int usage_count = 0;        // u_i, non-decreasing
    int last_selected_round = -1;
    int streak = 0;             // consecutive-round selection streak
    int cooldown_until = -1;    // ineligible while round <= cooldown_until
    std::size_t token_count = 0;
};

struct PackingWeights {
    double w_div = 1.0;
    double w_rel = 1.0;
    double w_rec = 0.5;
    double w_used = 0.5;
    // Temporal strata by round distance and their budget split.
    int near_max_delta = 4;   // near: delta <= 4
    int mid_max_delta = 15;   // mid: 5 <= delta <= 15; far: delta >= 16
    double near_frac = 0.45;
    double mid_frac = 0.30;
    double far_frac = 0.25;
    double tau_dup = 0.93;   // pre-selection near-duplicate threshold
    double tau_pack = 0.80;  // packing-time max cosine to the selected set
    double recency_scale = 15.0;  // r_i = exp(-delta / recency_scale)
    int max_clusters = 5;
    int cooldown_trigger = 2;  // selections in this many consecutive rounds...
    int cooldown_rounds = 2;   // ...block the item for this many rounds
};

struct PackedItem {
    const MemoryItem* item = nullptr;
    double relevance = 0.0;  // query cosine
};

struct DiversePackResult {
    std::vector<PackedItem> items;
    bool quota_relaxed = false;     // mid/far quotas were relaxed to backfill
    std::vector<std::string> log;   // stratum deviations and relaxations
};

class MemoryStore {
public:
    explicit MemoryStore(std::string owner) : owner_(std::move(owner)) {}

    // Embed, normalize and store one event. Embedding failures queue the
    // event for retry instead of dropping it.
    std::uint64_t write(const std::string& text, int round, EventKind type,
                        Embedder& embedder);

    // Retry queued writes; returns how many were flushed.
    std::size_t flush_pending(Embedder& embedder);
    std::size_t pending_count() const { return pending_.size(); }

    const std::vector<MemoryItem>& items() const { return items_; }
    const std::string& owner() const { return owner_; }

    // Record that these items were packed into a prompt at `round`,
    // updating usage counts, streaks and cooldowns.
    void note_selected(const std::vector<std::uint64_t>& ids, int round);

    void save(const std::string& path) const;
    static MemoryStore load(const std::string& path);

private:
    struct PendingWrite {
        std::string text;
        int round;
        EventKind type;
    };
    std::string owner_;
    std::vector<MemoryItem> items_;
    std::vector<PendingWrite> pending_;
    std::uint64_t next_id_ = 1;
};

// Relevance-ranked baseline: sort by query cosine, truncate at the token
// budget (stops at the first item that does not fit).
std::vector<PackedItem> pack_standard(const MemoryStore& store,
                                      const Embedding& query,
                                      std::size_t token_budget,
                                      std::size_t pool_limit = 0);

// Structured diversity-aware controller: temporal stratification with
// per-round caps, greedy near-duplicate removal, cooldown filtering,
// farthest-first clustering with two Lloyd rounds, cluster representatives,
// diversity-scored residual backfill, and controlled quota relaxation.
// `pool_limit` > 0 restricts the candidate pool to the top items by query
// relevance before the pipeline runs (retrieval step); 0 means no limit.
DiversePackResult pack_diverse(const MemoryStore& store, const Embedding& query,
                               int current_round, std::size_t token_budget,
                               const PackingWeights& weights = {},
                               std::size_t pool_limit = 0);

// Set-level value of a packed selection under the backfill objective
// (diversity term computed against the other members). Used by tests and
// by the exhaustive oracle.
double packing_objective(const std::vector<const MemoryItem*>& selection,
                         const Embedding& query, int current_round,
                         const PackingWeights& weights = {});

}  // namespace semdrift
