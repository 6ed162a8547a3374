#include "semdrift/memory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace semdrift {

std::uint64_t MemoryStore::write(const std::string& text, int round,
                                 EventKind type, Embedder& embedder) {
    if (text.empty()) throw Error("empty_text", "cannot store empty event text");
    Embedding e;
    try {
        e = embedder.embed(text);
        normalize(e);
    } catch (const Error&) {
        pending_.push_back({text, round, type});
        return 0;
    }
    MemoryItem item;
    item.item_id = next_id_++;
    item.owner = owner_;
    item.round = round;
    item.text = text;
    item.embedding = std::move(e);
    item.type = type;
    item.token_count = tokenize(text).size();
    items_.push_back(std::move(item));
    return items_.back().item_id;
}

std::size_t MemoryStore::flush_pending(Embedder& embedder) {
    std::vector<PendingWrite> retry;
    retry.swap(pending_);
    std::size_t flushed = 0;
    for (auto& p : retry) {
        const auto before = pending_.size();
        write(p.text, p.round, p.type, embedder);
        if (pending_.size() == before) ++flushed;
    }
    return flushed;
}

void MemoryStore::note_selected(const std::vector<std::uint64_t>& ids,
                                int round) {
    for (auto& item : items_) {
        if (std::find(ids.begin(), ids.end(), item.item_id) == ids.end()) {
            continue;
        }
        ++item.usage_count;
        if (item.last_selected_round == round - 1) {
            ++item.streak;
        } else {
            item.streak = 1;
        }
        item.last_selected_round = round;
        if (item.streak >= 2) {
            // Selected in two consecutive rounds: ineligible for the next two.
            item.cooldown_until = round + 2;
            item.streak = 0;
        }
    }
}

void MemoryStore::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io", "cannot open for writing: " + path);
    nlohmann::ordered_json header;
    header["schema"] = "semdrift.memory";
    header["version"] = 1;
    header["owner"] = owner_;
    header["next_id"] = next_id_;
    out << header.dump() << "\n";
    for (const auto& item : items_) {
        nlohmann::ordered_json j;
        j["id"] = item.item_id;
        j["round"] = item.round;
        j["type"] = to_string(item.type);
        j["text"] = item.text;
        j["usage"] = item.usage_count;
        j["last_sel"] = item.last_selected_round;
        j["streak"] = item.streak;
        j["cooldown"] = item.cooldown_until;
        j["embedding"] = item.embedding.values;
        out << j.dump() << "\n";
    }
}

MemoryStore MemoryStore::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io", "cannot open for reading: " + path);
    std::string line;
    if (!std::getline(in, line)) throw Error("io", "empty memory file");
    const auto header = nlohmann::json::parse(line);
    if (header.value("schema", "") != "semdrift.memory" ||
        header.value("version", -1) != 1) {
        throw Error("bad_schema", "not a version-1 memory store: " + path);
    }
    MemoryStore store(header.at("owner").get<std::string>());
    store.next_id_ = header.at("next_id").get<std::uint64_t>();
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception& ex) {
            throw Error("malformed_line",
                        "line " + std::to_string(lineno) + ": " + ex.what());
        }
        MemoryItem item;
        item.item_id = j.at("id").get<std::uint64_t>();
        item.owner = store.owner_;
        item.round = j.at("round").get<int>();
        item.type = event_kind_from_string(j.at("type").get<std::string>());
        item.text = j.at("text").get<std::string>();
        item.usage_count = j.at("usage").get<int>();
        item.last_selected_round = j.at("last_sel").get<int>();
        item.streak = j.at("streak").get<int>();
        item.cooldown_until = j.at("cooldown").get<int>();
        item.embedding.values = j.at("embedding").get<std::vector<double>>();
        item.embedding.unit = true;
        item.token_count = tokenize(item.text).size();
        store.items_.push_back(std::move(item));
    }
    return store;
}

// ---------------------------------------------------------------------------

std::vector<PackedItem> pack_standard(const MemoryStore& store,
                                      const Embedding& query,
                                      std::size_t token_budget,
                                      std::size_t pool_limit) {
    std::vector<PackedItem> ranked;
    for (const auto& item : store.items()) {
        ranked.push_back({&item, cosine(item.embedding, query)});
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.relevance != b.relevance) return a.relevance > b.relevance;
        return a.item->item_id < b.item->item_id;
    });
    if (pool_limit > 0 && ranked.size() > pool_limit) {
        ranked.resize(pool_limit);
    }
    std::vector<PackedItem> packed;
    std::size_t used = 0;
    for (const auto& r : ranked) {
        if (used + r.item->token_count > token_budget) break;
        packed.push_back(r);
        used += r.item->token_count;
    }
    return packed;
}

namespace {

enum class Stratum { Near, Mid, Far };

struct Candidate {
    const MemoryItem* item;
    double relevance;
    int delta;
    Stratum stratum;
};

// Priority used for dedup and cluster representatives: stronger rerank
// (relevance) first, then more recent, shorter, less used.
bool higher_priority(const Candidate& a, const Candidate& b) {
    if (a.relevance != b.relevance) return a.relevance > b.relevance;
    if (a.item->round != b.item->round) return a.item->round > b.item->round;
    if (a.item->token_count != b.item->token_count) {
        return a.item->token_count < b.item->token_count;
    }
    if (a.item->usage_count != b.item->usage_count) {
        return a.item->usage_count < b.item->usage_count;
    }
    return a.item->item_id < b.item->item_id;
}

struct PackState {
    std::vector<const Candidate*> selected;
    std::size_t used_tokens = 0;
    std::map<Stratum, std::size_t> stratum_used;
    std::map<int, int> per_round;                        // items per round
    std::map<std::pair<int, int>, int> per_round_type;   // (round, type)
};

bool violates_caps(const PackState& state, const Candidate& c) {
    const auto round_it = state.per_round.find(c.item->round);
    const int in_round = round_it == state.per_round.end() ? 0 : round_it->second;
    const auto type_key = std::make_pair(c.item->round,
                                         static_cast<int>(c.item->type));
    const auto type_it = state.per_round_type.find(type_key);
    const int in_type = type_it == state.per_round_type.end() ? 0 : type_it->second;
    // At most one item per historical round and one per type within it; the
    // near layer may admit a second, complementary-type item.
    if (in_type >= 1) return true;
    const int round_cap = c.stratum == Stratum::Near ? 2 : 1;
    return in_round >= round_cap;
}

bool violates_pack_similarity(const PackState& state, const Candidate& c,
                              double tau_pack) {
    for (const auto* s : state.selected) {
        if (cosine(c.item->embedding, s->item->embedding) > tau_pack) {
            return true;
        }
    }
    return false;
}

void admit(PackState& state, const Candidate& c) {
    state.selected.push_back(&c);
    state.used_tokens += c.item->token_count;
    state.stratum_used[c.stratum] += c.item->token_count;
    state.per_round[c.item->round] += 1;
    state.per_round_type[{c.item->round, static_cast<int>(c.item->type)}] += 1;
}

double backfill_score(const PackState& state, const Candidate& c,
                      const PackingWeights& w) {
    double max_cos = 0.0;
    for (const auto* s : state.selected) {
        max_cos = std::max(max_cos, cosine(c.item->embedding, s->item->embedding));
    }
    const double recency = std::exp(-static_cast<double>(c.delta) / w.recency_scale);
    return w.w_div * (1.0 - max_cos) + w.w_rel * c.relevance +
           w.w_rec * recency -
           w.w_used * std::log1p(static_cast<double>(c.item->usage_count));
}

}  // namespace

DiversePackResult pack_diverse(const MemoryStore& store, const Embedding& query,
                               int current_round, std::size_t token_budget,
                               const PackingWeights& weights,
                               std::size_t pool_limit) {
    DiversePackResult result;
    if (store.items().empty() || token_budget == 0) return result;

    // Stage 0: score candidates, apply the cooldown filter. With a pool
    // limit, retrieval keeps only the most relevant candidates.
    std::vector<Candidate> pool;
    for (const auto& item : store.items()) {
        if (current_round <= item.cooldown_until) continue;  // cooling down
        Candidate c;
        c.item = &item;
        c.relevance = cosine(item.embedding, query);
        c.delta = current_round - item.round;
        c.stratum = c.delta <= weights.near_max_delta ? Stratum::Near
                    : c.delta <= weights.mid_max_delta ? Stratum::Mid
                                                       : Stratum::Far;
        pool.push_back(c);
    }
    if (pool.empty()) return result;
    if (pool_limit > 0 && pool.size() > pool_limit) {
        std::sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) {
            if (a.relevance != b.relevance) return a.relevance > b.relevance;
            return a.item->item_id < b.item->item_id;
        });
        pool.resize(pool_limit);
    }
    std::sort(pool.begin(), pool.end(), higher_priority);

    // Stage 1: pre-selection greedy near-duplicate removal at tau_dup,
    // keeping the higher-priority item.
    std::vector<Candidate> kept;
    for (const auto& c : pool) {
        bool duplicate = false;
        for (const auto& k : kept) {
            if (cosine(c.item->embedding, k.item->embedding) >= weights.tau_dup) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) kept.push_back(c);
    }

    // Stratum token budgets.
    std::map<Stratum, std::size_t> stratum_budget{
        {Stratum::Near,
         static_cast<std::size_t>(weights.near_frac * static_cast<double>(token_budget))},
        {Stratum::Mid,
         static_cast<std::size_t>(weights.mid_frac * static_cast<double>(token_budget))},
        {Stratum::Far,
         static_cast<std::size_t>(weights.far_frac * static_cast<double>(token_budget))}};

    PackState state;
    auto fits = [&](const Candidate& c, bool respect_stratum) {
        if (state.used_tokens + c.item->token_count > token_budget) return false;
        if (respect_stratum) {
            const auto used = state.stratum_used.count(c.stratum)
                                  ? state.stratum_used.at(c.stratum)
                                  : 0;
            if (used + c.item->token_count > stratum_budget[c.stratum]) {
                return false;
            }
        }
        if (violates_caps(state, c)) return false;
        if (violates_pack_similarity(state, c, weights.tau_pack)) return false;
        return true;
    };

    // Stage 2: farthest-first seeded clustering with exactly two Lloyd
    // assignment/update rounds; collapses to identity when the pool is small.
    const std::size_t k = std::min<std::size_t>(
        static_cast<std::size_t>(weights.max_clusters), kept.size());
    std::vector<std::size_t> assignment(kept.size(), 0);
    std::vector<std::vector<double>> centroids;
    {
        // Farthest-first seeds, starting from the highest-priority candidate.
        std::vector<std::size_t> seeds{0};
        while (seeds.size() < k) {
            std::size_t best = kept.size();
            double best_dist = -1.0;
            for (std::size_t i = 0; i < kept.size(); ++i) {
                double nearest = 2.0;
                for (auto s : seeds) {
                    nearest = std::min(
                        nearest, 1.0 - cosine(kept[i].item->embedding,
                                              kept[s].item->embedding));
                }
                if (nearest > best_dist + 1e-15) {
                    best_dist = nearest;
                    best = i;
                }
            }
            if (best == kept.size()) break;
            seeds.push_back(best);
        }
        const std::size_t dim = kept[0].item->embedding.dim();
        for (auto s : seeds) {
            centroids.push_back(kept[s].item->embedding.values);
        }
        for (int lloyd = 0; lloyd < 2; ++lloyd) {
            // Assignment by cosine against (unnormalized) centroids.
            for (std::size_t i = 0; i < kept.size(); ++i) {
                std::size_t best_c = 0;
                double best_dot = -2.0;
                for (std::size_t c = 0; c < centroids.size(); ++c) {
                    double dot = 0.0, norm = 0.0;
                    for (std::size_t d = 0; d < dim; ++d) {
                        dot += centroids[c][d] * kept[i].item->embedding.values[d];
                        norm += centroids[c][d] * centroids[c][d];
                    }
                    if (norm > 0.0) dot /= std::sqrt(norm);
                    if (dot > best_dot) {
                        best_dot = dot;
                        best_c = c;
                    }
                }
                assignment[i] = best_c;
            }
            // Centroid update.
            for (std::size_t c = 0; c < centroids.size(); ++c) {
                std::vector<double> acc(dim, 0.0);
                std::size_t count = 0;
                for (std::size_t i = 0; i < kept.size(); ++i) {
                    if (assignment[i] != c) continue;
                    for (std::size_t d = 0; d < dim; ++d) {
                        acc[d] += kept[i].item->embedding.values[d];
                    }
                    ++count;
                }
                if (count > 0) {
                    for (double& v : acc) v /= static_cast<double>(count);
                    centroids[c] = std::move(acc);
                }
            }
        }
    }

    // Stage 3: one representative per cluster, subject to quotas and caps.
    // Within a cluster the representative is the admissible member with the
    // best diversity-aware score given what is already packed.
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        const Candidate* best = nullptr;
        double best_score = 0.0;
        for (const auto& cand : kept) {
            const std::size_t idx = static_cast<std::size_t>(&cand - kept.data());
            if (assignment[idx] != c) continue;
            if (!fits(cand, /*respect_stratum=*/true)) continue;
            const double score = backfill_score(state, cand, weights);
            if (best == nullptr || score > best_score) {
                best = &cand;
                best_score = score;
            }
        }
        if (best != nullptr) admit(state, *best);
    }

    // Stage 4: diversity-aware residual backfill within stratum quotas.
    auto backfill = [&](bool respect_stratum) {
        for (;;) {
            const Candidate* best = nullptr;
            double best_score = 0.0;
            for (const auto& cand : kept) {
                if (std::find(state.selected.begin(), state.selected.end(),
                              &cand) != state.selected.end()) {
                    continue;
                }
                if (!fits(cand, respect_stratum)) continue;
                const double score = backfill_score(state, cand, weights);
                if (best == nullptr || score > best_score + 1e-15 ||
                    (std::fabs(score - best_score) <= 1e-15 &&
                     cand.item->item_id < best->item->item_id)) {
                    best = &cand;
                    best_score = score;
                }
            }
            if (best == nullptr) break;
            admit(state, *best);
        }
    };
    backfill(/*respect_stratum=*/true);

    // Stage 5: controlled relaxation of mid/far quotas when budget remains.
    std::size_t smallest = SIZE_MAX;
    for (const auto& cand : kept) {
        smallest = std::min(smallest, cand.item->token_count);
    }
    if (state.used_tokens + smallest <= token_budget) {
        const std::size_t before = state.selected.size();
        // Relax stratum quotas (global budget, caps and similarity still
        // bind); near stays capped so recency cannot swallow the context.
        stratum_budget[Stratum::Mid] = token_budget;
        stratum_budget[Stratum::Far] = token_budget;
        backfill(/*respect_stratum=*/true);
        if (state.selected.size() > before) {
            result.quota_relaxed = true;
            result.log.push_back(
                "relaxed mid/far quotas; admitted " +
                std::to_string(state.selected.size() - before) +
                " backfill item(s)");
        }
    }

    // Stage 6: swap/drop polish. Greedy selection is myopic about how a new
    // item erodes the diversity terms of earlier picks, so hill-climb the
    // set-level objective with single swaps and drops under the same
    // constraints (current, possibly relaxed, stratum budgets included).
    // Pool-size gated: set-level evaluation is quadratic, so large candidate
    // pools keep the plain greedy result.
    if (kept.size() <= 48) {
        auto set_valid = [&](const std::vector<const Candidate*>& sel) {
            std::size_t tokens = 0;
            std::map<Stratum, std::size_t> per_stratum;
            std::map<int, int> per_round;
            std::map<std::pair<int, int>, int> per_type;
            for (const auto* c : sel) {
                tokens += c->item->token_count;
                per_stratum[c->stratum] += c->item->token_count;
                if (++per_round[c->item->round] >
                    (c->stratum == Stratum::Near ? 2 : 1)) {
                    return false;
                }
                if (++per_type[{c->item->round,
                                static_cast<int>(c->item->type)}] > 1) {
                    return false;
                }
            }
            if (tokens > token_budget) return false;
            for (const auto& [stratum, used] : per_stratum) {
                if (used > stratum_budget[stratum]) return false;
            }
            for (std::size_t i = 0; i < sel.size(); ++i) {
                for (std::size_t j = i + 1; j < sel.size(); ++j) {
                    if (cosine(sel[i]->item->embedding,
                               sel[j]->item->embedding) > weights.tau_pack) {
                        return false;
                    }
                }
            }
            return true;
        };
        auto set_objective = [&](const std::vector<const Candidate*>& sel) {
            std::vector<const MemoryItem*> items;
            items.reserve(sel.size());
            for (const auto* c : sel) items.push_back(c->item);
            return packing_objective(items, query, current_round, weights);
        };

        auto is_selected = [&](const Candidate* c) {
            return std::find(state.selected.begin(), state.selected.end(), c) !=
                   state.selected.end();
        };
        double current = set_objective(state.selected);
        for (int pass = 0; pass < 20; ++pass) {
            double best_gain = 1e-12;
            std::vector<const Candidate*> best_set;
            auto consider = [&](std::vector<const Candidate*> trial) {
                if (trial.empty() || !set_valid(trial)) return;
                const double gain = set_objective(trial) - current;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_set = std::move(trial);
                }
            };
            for (std::size_t si = 0; si < state.selected.size(); ++si) {
                // Drop move.
                {
                    auto trial = state.selected;
                    trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(si));
                    consider(std::move(trial));
                }
                // Single swaps.
                for (const auto& cand : kept) {
                    if (is_selected(&cand)) continue;
                    auto trial = state.selected;
                    trial[si] = &cand;
                    consider(std::move(trial));
                }
                // Pair swaps escape two-item local optima; only affordable
                // for small pools.
                if (kept.size() <= 16) {
                    for (std::size_t sj = si + 1; sj < state.selected.size();
                         ++sj) {
                        for (const auto& ca : kept) {
                            if (is_selected(&ca)) continue;
                            for (const auto& cb : kept) {
                                if (&cb == &ca || is_selected(&cb)) continue;
                                auto trial = state.selected;
                                trial[si] = &ca;
                                trial[sj] = &cb;
                                consider(std::move(trial));
                            }
                        }
                    }
                }
            }
            if (best_set.empty()) break;
            state.selected = best_set;
            current += best_gain;
        }
        // Rebuild bookkeeping and re-run backfill in case the polish freed
        // budget or similarity headroom.
        PackState rebuilt;
        for (const auto* c : state.selected) admit(rebuilt, *c);
        state = rebuilt;
        backfill(/*respect_stratum=*/true);
    }

    for (const auto* c : state.selected) {
        result.items.push_back({c->item, c->relevance});
    }
    return result;
}

double packing_objective(const std::vector<const MemoryItem*>& selection,
                         const Embedding& query, int current_round,
                         const PackingWeights& w) {
    double total = 0.0;
    for (std::size_t i = 0; i < selection.size(); ++i) {
        double max_cos = 0.0;
        for (std::size_t j = 0; j < selection.size(); ++j) {
            if (i == j) continue;
            max_cos = std::max(max_cos, cosine(selection[i]->embedding,
                                               selection[j]->embedding));
        }
        const double rel = cosine(selection[i]->embedding, query);
        const double recency = std::exp(
            -static_cast<double>(current_round - selection[i]->round) /
            w.recency_scale);
        total += w.w_div * (1.0 - max_cos) + w.w_rel * rel + w.w_rec * recency -
                 w.w_used * std::log1p(static_cast<double>(selection[i]->usage_count));
    }
    return total;
}

}  // namespace semdrift
