#include "semdrift/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "semdrift/rng.hpp"
#include "semdrift/stats.hpp"

namespace semdrift {

EmbeddedWindowSeries embed_series(const WindowSeries& series,
                                  Embedder& provider, std::size_t chunk_limit,
                                  bool embed_utterances) {
    EmbeddedWindowSeries out;
    out.run_id = series.run_id;
    out.window_len = series.window_len;
    out.windows = series.windows;
    out.window_embeddings.resize(series.windows.size());
    out.utterance_embeddings.resize(series.windows.size());
    for (std::size_t w = 0; w < series.windows.size(); ++w) {
        const auto& win = series.windows[w];
        if (!win.document.empty()) {
            out.window_embeddings[w] = embed_document(win.document, provider, chunk_limit);
        }
        if (embed_utterances) {
            for (const auto& text : win.utterance_texts) {
                if (text.empty()) continue;
                out.utterance_embeddings[w].push_back(
                    embed_document(text, provider, chunk_limit));
            }
        }
    }
    return out;
}

namespace {

const Embedding& embedding_at(const EmbeddedWindowSeries& series, std::size_t w) {
    if (w >= series.window_embeddings.size() || !series.window_embeddings[w]) {
        throw Error("missing_embedding",
                    "window " + std::to_string(w + 1) + " of run " +
                        series.run_id + " has no embedding");
    }
    return *series.window_embeddings[w];
}

}  // namespace

std::vector<double> within_run_diversity(const EmbeddedWindowSeries& series) {
    std::vector<double> d;
    if (series.windows.empty()) return d;
    const Embedding& e1 = embedding_at(series, 0);
    d.reserve(series.windows.size());
    d.push_back(0.0);  // D_1 = 0 by definition
    for (std::size_t w = 1; w < series.windows.size(); ++w) {
        d.push_back(1.0 - cosine(embedding_at(series, w), e1));
    }
    return d;
}

std::vector<double> convergence_degree(const EmbeddedWindowSeries& series) {
    std::vector<double> c;
    if (series.windows.size() < 2) return c;
    for (std::size_t w = 0; w + 1 < series.windows.size(); ++w) {
        c.push_back(cosine(embedding_at(series, w), embedding_at(series, w + 1)));
    }
    return c;
}

CrossRunDiversity cross_run_diversity(const EmbeddedWindowSeries& a,
                                      const EmbeddedWindowSeries& b) {
    const std::size_t horizon = std::min(a.windows.size(), b.windows.size());
    if (horizon == 0) {
        throw Error("no_overlap", "runs share no overlapping windows");
    }
    CrossRunDiversity out;
    double sum = 0.0;
    for (std::size_t w = 0; w < horizon; ++w) {
        const double d = 1.0 - cosine(embedding_at(a, w), embedding_at(b, w));
        out.per_window.push_back(d);
        sum += d;
    }
    out.mean = sum / static_cast<double>(horizon);
    return out;
}

ConditionCrossRun condition_cross_run_diversity(
    const std::vector<EmbeddedWindowSeries>& runs) {
    if (runs.size() < 2) {
        throw Error("too_few_runs", "cross-run diversity needs >= 2 runs");
    }
    std::size_t horizon = runs[0].windows.size();
    for (const auto& r : runs) horizon = std::min(horizon, r.windows.size());
    if (horizon == 0) throw Error("no_overlap", "no overlapping windows");

    ConditionCrossRun out;
    out.per_window_mean.assign(horizon, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        for (std::size_t j = i + 1; j < runs.size(); ++j) {
            const auto pair = cross_run_diversity(runs[i], runs[j]);
            for (std::size_t w = 0; w < horizon; ++w) {
                out.per_window_mean[w] += pair.per_window[w];
            }
            total += std::accumulate(pair.per_window.begin(),
                                     pair.per_window.begin() +
                                         static_cast<std::ptrdiff_t>(horizon),
                                     0.0);
            ++out.n_pairs;
        }
    }
    for (double& v : out.per_window_mean) v /= static_cast<double>(out.n_pairs);
    out.mean = total / static_cast<double>(out.n_pairs * horizon);
    return out;
}

// ---------------------------------------------------------------------------

namespace {

// Spectral entropy of the trace-normalized cosine kernel of the given rows.
double vendi_entropy(const std::vector<const Embedding*>& rows) {
    const auto m = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd k(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = i; j < m; ++j) {
            const double dot = cosine(*rows[static_cast<std::size_t>(i)],
                                      *rows[static_cast<std::size_t>(j)]);
            k(i, j) = dot;
            k(j, i) = dot;
        }
    }
    const double trace = k.trace();
    k /= trace;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k);
    if (eig.info() != Eigen::Success) {
        throw Error("eigen_failure", "kernel eigendecomposition failed");
    }
    double h = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        double lambda = eig.eigenvalues()(i);
        if (!std::isfinite(lambda)) {
            throw Error("non_finite_eigenvalue", "non-finite kernel eigenvalue");
        }
        if (lambda < 0.0) {
            if (lambda < -1e-12) {
                throw Error("negative_eigenvalue",
                            "kernel eigenvalue " + fmt_double(lambda) +
                                " below tolerance");
            }
            lambda = 0.0;
        }
        if (lambda > 0.0) h -= lambda * std::log(lambda);
    }
    return h;
}

}  // namespace

VendiResult vendi_exact(const std::vector<Embedding>& utterances) {
    if (utterances.empty()) {
        throw Error("empty_sample", "vendi needs at least one utterance");
    }
    std::vector<const Embedding*> rows;
    rows.reserve(utterances.size());
    for (const auto& e : utterances) rows.push_back(&e);
    VendiResult r;
    r.m = utterances.size();
    r.resamples = 1;
    r.n_utterances = utterances.size();
    r.h_v = vendi_entropy(rows);
    r.s_eff = std::exp(r.h_v);
    r.v_norm = r.s_eff / static_cast<double>(r.m);
    return r;
}

VendiResult vendi(const std::vector<Embedding>& utterances, std::size_t m,
                  int resamples, std::uint64_t seed) {
    VendiResult r;
    r.m = m;
    r.resamples = resamples;
    r.n_utterances = utterances.size();
    if (utterances.size() < m) {
        r.skipped = true;
        return r;
    }
    if (utterances.size() == m) {
        // All draws coincide with the full set.
        VendiResult exact = vendi_exact(utterances);
        exact.m = m;
        exact.resamples = resamples;
        return exact;
    }
    Rng rng(seed);
    double h_sum = 0.0, s_sum = 0.0, v_sum = 0.0;
    for (int b = 0; b < resamples; ++b) {
        const auto idx = rng.sample_without_replacement(utterances.size(), m);
        std::vector<const Embedding*> rows;
        rows.reserve(m);
        for (auto i : idx) rows.push_back(&utterances[i]);
        const double h = vendi_entropy(rows);
        h_sum += h;
        const double s = std::exp(h);
        s_sum += s;
        v_sum += s / static_cast<double>(m);
    }
    const double nb = static_cast<double>(resamples);
    r.h_v = h_sum / nb;
    r.s_eff = s_sum / nb;
    r.v_norm = v_sum / nb;
    return r;
}

std::vector<VendiResult> vendi_trace(const EmbeddedWindowSeries& series,
                                     std::size_t m, int resamples,
                                     std::uint64_t seed) {
    std::vector<VendiResult> out;
    for (std::size_t w = 0; w < series.windows.size(); ++w) {
        if (w >= series.utterance_embeddings.size()) {
            throw Error("missing_embedding",
                        "utterance embeddings absent for window " +
                            std::to_string(w + 1));
        }
        VendiResult r = vendi(series.utterance_embeddings[w], m, resamples,
                              derive_seed(seed, w + 1));
        r.window = static_cast<int>(w) + 1;
        out.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------

SurvivalReport token_survival(const WindowSeries& series, int early_windows,
                              double mass_frac, std::size_t budget,
                              std::uint64_t seed) {
    const std::size_t n_windows = series.windows.size();
    if (n_windows < 5) {
        throw Error("too_few_windows", "token survival needs >= 5 windows");
    }
    if (early_windows < 1 || static_cast<std::size_t>(early_windows) > n_windows) {
        throw Error("bad_early_windows", "early window range out of bounds");
    }

    std::size_t min_tokens = SIZE_MAX;
    for (const auto& w : series.windows) {
        min_tokens = std::min(min_tokens, w.tokens.size());
    }
    if (budget == 0) budget = min_tokens;
    if (budget > min_tokens) {
        throw Error("budget_too_large",
                    "budget " + std::to_string(budget) +
                        " exceeds smallest window; required budget <= " +
                        std::to_string(min_tokens));
    }

    // Seeded downsample of every window to the common budget.
    std::vector<std::vector<const std::string*>> sampled(n_windows);
    for (std::size_t w = 0; w < n_windows; ++w) {
        const auto& toks = series.windows[w].tokens;
        Rng rng(derive_seed(seed, w + 1));
        for (auto i : rng.sample_without_replacement(toks.size(), budget)) {
            sampled[w].push_back(&toks[i]);
        }
    }

    // Pooled early counts define the frozen head/tail sets.
    std::map<std::string, std::size_t> early_counts;
    std::size_t early_total = 0;
    for (int w = 0; w < early_windows; ++w) {
        for (const auto* tok : sampled[static_cast<std::size_t>(w)]) {
            ++early_counts[*tok];
            ++early_total;
        }
    }
    // Count ties are broken by token string ascending in both directions.
    std::vector<std::pair<std::string, std::size_t>> desc(early_counts.begin(),
                                                          early_counts.end());
    std::sort(desc.begin(), desc.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<std::pair<std::string, std::size_t>> asc(early_counts.begin(),
                                                         early_counts.end());
    std::sort(asc.begin(), asc.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second < b.second;
        return a.first < b.first;
    });

    SurvivalReport report;
    report.budget = budget;
    const double target = mass_frac * static_cast<double>(early_total);
    {
        double mass = 0.0;
        for (const auto& [tok, count] : desc) {
            if (mass >= target) break;
            report.head_tokens.insert(tok);
            mass += static_cast<double>(count);
        }
        mass = 0.0;
        for (const auto& [tok, count] : asc) {
            if (mass >= target) break;
            report.tail_tokens.insert(tok);
            mass += static_cast<double>(count);
        }
    }

    // Last occurrence window (1-based) within the downsampled corpus.
    std::map<std::string, std::size_t> last_occurrence;
    for (std::size_t w = 0; w < n_windows; ++w) {
        for (const auto* tok : sampled[w]) last_occurrence[*tok] = w + 1;
    }
    auto survival_curve = [&](const std::set<std::string>& set) {
        std::vector<double> s(n_windows, 0.0);
        for (std::size_t w = 0; w < n_windows; ++w) {
            std::size_t alive = 0;
            for (const auto& tok : set) {
                auto it = last_occurrence.find(tok);
                if (it != last_occurrence.end() && it->second >= w + 1) ++alive;
            }
            s[w] = set.empty() ? 0.0
                               : static_cast<double>(alive) /
                                     static_cast<double>(set.size());
        }
        return s;
    };
    report.head_survival = survival_curve(report.head_tokens);
    report.tail_survival = survival_curve(report.tail_tokens);

    double auc_head = 0.0, auc_tail = 0.0;
    for (std::size_t w = 0; w < n_windows; ++w) {
        auc_head += report.head_survival[w];
        auc_tail += report.tail_survival[w];
    }
    report.delta_auc = auc_head - auc_tail;

    auto first_below_half = [&](const std::vector<double>& s) {
        for (std::size_t w = 0; w < s.size(); ++w) {
            if (s[w] < 0.5) return static_cast<double>(w + 1);
        }
        return static_cast<double>(s.size() + 1);  // never fell below 0.5
    };
    report.half_survival_lag = first_below_half(report.head_survival) -
                               first_below_half(report.tail_survival);
    report.terminal_gap =
        report.head_survival.back() - report.tail_survival.back();
    return report;
}

// ---------------------------------------------------------------------------

namespace {

std::string concat_windows(const std::vector<const Window*>& windows) {
    std::string out;
    for (const auto* w : windows) {
        if (!out.empty()) out.push_back('\n');
        out += w->document;
    }
    return out;
}

std::string cap_history(std::string h, std::size_t history_budget) {
    if (history_budget > 0 && h.size() > history_budget) {
        h.erase(0, h.size() - history_budget);
    }
    return h;
}

}  // namespace

CompressionTrace compression_trace(const WindowSeries& series,
                                   const WindowSeries* wrong_history,
                                   int level, std::size_t history_budget,
                                   std::uint64_t seed) {
    CompressionTrace trace;
    trace.compressor_id = "deflate-" + std::to_string(level);
    const std::size_t n = series.windows.size();
    if (n < 2) return trace;

    auto conditional_cost = [&](const std::string& history,
                                const std::string& window) {
        const std::string h = cap_history(history, history_budget);
        const double base = static_cast<double>(deflate_size(h, level));
        const double joint =
            static_cast<double>(deflate_size(h + window, level));
        return joint - base;
    };

    for (std::size_t t = 1; t < n; ++t) {
        CompressionPoint p;
        p.window = static_cast<int>(t) + 1;
        const std::string& wt = series.windows[t].document;
        if (wt.empty()) {
            p.skipped = true;
            trace.points.push_back(p);
            continue;
        }
        p.raw_len = wt.size();

        std::vector<const Window*> prior;
        for (std::size_t u = 0; u < t; ++u) prior.push_back(&series.windows[u]);

        const double true_cost = conditional_cost(concat_windows(prior), wt);
        if (true_cost <= 0.0) {
            throw Error("non_positive_delta",
                        "conditional compression cost must be positive");
        }
        p.delta_hist = true_cost;
        p.ratio = static_cast<double>(p.raw_len) / true_cost;

        // Shuffled own prior windows.
        {
            std::vector<const Window*> shuffled = prior;
            Rng rng(derive_seed(seed, t, 0xABCD));
            rng.shuffle(shuffled);
            const double cost = conditional_cost(concat_windows(shuffled), wt);
            p.advantage_shuffled =
                (cost - true_cost) / static_cast<double>(p.raw_len);
        }
        // Reversed own prior windows.
        {
            std::vector<const Window*> reversed(prior.rbegin(), prior.rend());
            const double cost = conditional_cost(concat_windows(reversed), wt);
            p.advantage_reversed =
                (cost - true_cost) / static_cast<double>(p.raw_len);
        }
        // Wrong history from an independent run of the same condition.
        if (wrong_history != nullptr && wrong_history->windows.size() >= t) {
            std::vector<const Window*> other;
            for (std::size_t u = 0; u < t; ++u) {
                other.push_back(&wrong_history->windows[u]);
            }
            const double cost = conditional_cost(concat_windows(other), wt);
            p.advantage_wrong =
                (cost - true_cost) / static_cast<double>(p.raw_len);
            p.has_wrong = true;
        }
        trace.points.push_back(p);
    }
    return trace;
}

// ---------------------------------------------------------------------------

const std::vector<CulturalAxisSpec>& default_cultural_axes() {
    static const std::vector<CulturalAxisSpec> axes = {
        {"questioning-declarative",
         {{"ask", "state"},
          {"question", "answer"},
          {"curious", "certain"},
          {"explore", "conclude"},
          {"why", "therefore"},
          {"what if", "it is"},
          {"hypothesis", "claim"},
          {"open ended", "closed form"},
          {"inquire", "assert"},
          {"probe", "pronounce"},
          {"consider", "decide"},
          {"investigate", "declare"}}},
        {"egalitarian-hierarchical",
         {{"equality", "hierarchy"},
          {"flat structure", "chain of command"},
          {"shared power", "central authority"},
          {"equal voice", "ranked voice"},
          {"peer", "superior"},
          {"fairness", "status"},
          {"equal chance", "privileged access"},
          {"inclusive", "exclusive"},
          {"merit based", "title based"},
          {"participatory", "directive"},
          {"co leader", "boss"},
          {"horizontal", "vertical"}}},
        {"emotional-warmth-detached",
         {{"empathetic", "detached"},
          {"warm", "cold"},
          {"emotional", "clinical"},
          {"compassionate", "impersonal"},
          {"care", "indifference"},
          {"feelings", "facts"},
          {"sympathetic", "neutral"},
          {"reassure", "inform"},
          {"supportive", "strict"},
          {"soft tone", "hard tone"},
          {"heartfelt", "matter of fact"},
          {"comfort", "critique"}}},
        {"optimism-pessimism",
         {{"hopeful", "cynical"},
          {"optimistic", "pessimistic"},
          {"promising", "bleak"},
          {"confidence", "worry"},
          {"opportunity", "threat"},
          {"can succeed", "will fail"},
          {"upbeat", "downbeat"},
          {"encouraging", "discouraging"},
          {"silver lining", "worst case"},
          {"trust", "mistrust"}}},
        {"masculine-feminine",
         {{"man", "woman"},
          {"male", "female"},
          {"he", "she"},
          {"him", "her"},
          {"masculine", "feminine"},
          {"boy", "girl"},
          {"gentleman", "lady"},
          {"father", "mother"}}},
        {"individualism-collectivism",
         {{"individualism", "collectivism"},
          {"self-reliance", "interdependence"},
          {"personal freedom", "group harmony"},
          {"individual rights", "collective responsibility"},
          {"personal achievement", "shared wellbeing"},
          {"competition", "cooperation"},
          {"autonomy", "conformity"},
          {"self-interest", "community interest"}}},
        {"cooperation-competition",
         {{"cooperate", "compete"},
          {"collaborative", "rivalrous"},
          {"win win", "zero sum"},
          {"mutual benefit", "personal advantage"},
          {"share", "hoard"},
          {"support", "undermine"},
          {"align", "outdo"},
          {"compromise", "dominate"},
          {"consensus", "victory"},
          {"teamwork", "one upmanship"},
          {"build together", "beat others"},
          {"reciprocity", "exploitation"}}},
        {"black-white",
         {{"black", "white"},
          {"African American", "white American"},
          {"Black community", "White community"},
          {"Black culture", "White culture"},
          {"Black identity", "White identity"},
          {"Black people", "White people"},
          {"Black history", "White history"},
          {"Black experience", "White experience"}}},
    };
    return axes;
}

Embedding build_axis_vector(const CulturalAxisSpec& axis, Embedder& provider) {
    if (axis.pairs.empty()) {
        throw Error("empty_axis", "axis '" + axis.name + "' has no pairs");
    }
    Embedding acc;
    acc.values.assign(provider.dim(), 0.0);
    for (const auto& pair : axis.pairs) {
        Embedding pos = provider.embed(pair.positive);
        Embedding neg = provider.embed(pair.negative);
        normalize(pos);
        normalize(neg);
        for (std::size_t i = 0; i < acc.values.size(); ++i) {
            acc.values[i] += pos.values[i] - neg.values[i];
        }
    }
    for (double& v : acc.values) v /= static_cast<double>(axis.pairs.size());
    normalize(acc);
    return acc;
}

std::string significance_stars(double p) {
    if (p < 0.001) return "***";
    if (p < 0.01) return "**";
    if (p < 0.05) return "*";
    if (p < 0.1) return "†";
    return "";
}

namespace {

Embedding normalized_mean(const std::vector<const Embedding*>& vecs) {
    Embedding acc;
    acc.values.assign(vecs.front()->dim(), 0.0);
    for (const auto* v : vecs) {
        for (std::size_t i = 0; i < acc.values.size(); ++i) {
            acc.values[i] += v->values[i];
        }
    }
    for (double& v : acc.values) v /= static_cast<double>(vecs.size());
    normalize(acc);
    return acc;
}

double projection(const Embedding& centroid, const Embedding& axis) {
    double dot = 0.0;
    for (std::size_t i = 0; i < centroid.values.size(); ++i) {
        dot += centroid.values[i] * axis.values[i];
    }
    return dot;
}

}  // namespace

std::vector<AxisShift> cultural_projection(
    const std::vector<EmbeddedWindowSeries>& runs,
    const std::vector<CulturalAxisSpec>& axes, Embedder& provider,
    int edge_windows, int bootstrap_resamples, std::uint64_t seed) {
    if (runs.empty()) throw Error("no_runs", "cultural projection needs runs");
    for (const auto& run : runs) {
        if (run.windows.size() < 2 * static_cast<std::size_t>(edge_windows)) {
            throw Error("too_few_windows",
                        "run " + run.run_id + " needs at least " +
                            std::to_string(2 * edge_windows) + " windows");
        }
    }

    // Per-run early/late centroids.
    std::vector<Embedding> early_centroids, late_centroids;
    for (const auto& run : runs) {
        std::vector<const Embedding*> early, late;
        for (int w = 0; w < edge_windows; ++w) {
            early.push_back(&embedding_at(run, static_cast<std::size_t>(w)));
            late.push_back(&embedding_at(
                run, run.windows.size() - 1 - static_cast<std::size_t>(w)));
        }
        early_centroids.push_back(normalized_mean(early));
        late_centroids.push_back(normalized_mean(late));
    }

    std::vector<AxisShift> shifts;
    std::uint64_t axis_idx = 0;
    for (const auto& axis : axes) {
        const Embedding a = build_axis_vector(axis, provider);
        AxisShift s;
        s.axis = axis.name;
        for (std::size_t r = 0; r < runs.size(); ++r) {
            s.run_shifts.push_back(projection(late_centroids[r], a) -
                                   projection(early_centroids[r], a));
        }
        s.mean_shift = mean(s.run_shifts);
        if (s.run_shifts.size() >= 2) {
            const BootstrapCi ci =
                bootstrap_ci(s.run_shifts, bootstrap_resamples,
                             derive_seed(seed, ++axis_idx));
            s.ci_lo = ci.lo;
            s.ci_hi = ci.hi;
            const double sd = sample_sd(s.run_shifts);
            if (sd > 0.0) {
                s.t = s.mean_shift /
                      (sd / std::sqrt(static_cast<double>(s.run_shifts.size())));
                s.p = 2.0 * (1.0 - student_t_cdf(
                                       std::fabs(s.t),
                                       static_cast<double>(s.run_shifts.size() - 1)));
            } else {
                s.t = 0.0;
                s.p = s.mean_shift == 0.0 ? 1.0 : 0.0;
            }
        } else {
            s.ci_lo = s.ci_hi = s.mean_shift;
            s.p = 1.0;
        }
        s.stars = significance_stars(s.p);
        shifts.push_back(std::move(s));
    }
    return shifts;
}

// ---------------------------------------------------------------------------

namespace {

double squared_distance(const Embedding& a, const Embedding& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double d = a.values[i] - b.values[i];
        s += d * d;
    }
    return s;
}

double probe_nll(const std::vector<Embedding>& centroids,
                 const std::vector<std::vector<const Embedding*>>& holdout,
                 double temperature) {
    double nll = 0.0;
    std::size_t count = 0;
    for (std::size_t c = 0; c < holdout.size(); ++c) {
        for (const auto* x : holdout[c]) {
            std::vector<double> logits(centroids.size());
            double max_logit = -1e300;
            for (std::size_t k = 0; k < centroids.size(); ++k) {
                logits[k] = -squared_distance(*x, centroids[k]) / temperature;
                max_logit = std::max(max_logit, logits[k]);
            }
            double z = 0.0;
            for (double l : logits) z += std::exp(l - max_logit);
            nll -= logits[c] - max_logit - std::log(z);
            ++count;
        }
    }
    return count > 0 ? nll / static_cast<double>(count) : 0.0;
}

}  // namespace

AttributionProbe train_attribution_probe(
    const std::map<std::string, std::vector<Embedding>>& train,
    double holdout_fraction, std::uint64_t seed, std::size_t min_per_class) {
    if (train.size() < 2) {
        throw Error("too_few_classes", "attribution probe needs >= 2 classes");
    }
    for (const auto& [cls, embs] : train) {
        if (embs.size() < min_per_class) {
            throw Error("too_few_samples",
                        "class '" + cls + "' has " +
                            std::to_string(embs.size()) + " samples, needs " +
                            std::to_string(min_per_class));
        }
    }

    AttributionProbe probe;
    std::vector<std::vector<const Embedding*>> holdout;
    std::uint64_t class_idx = 0;
    for (const auto& [cls, embs] : train) {
        probe.classes.push_back(cls);
        Rng rng(derive_seed(seed, ++class_idx));
        const std::size_t n_hold = std::max<std::size_t>(
            1, static_cast<std::size_t>(holdout_fraction *
                                        static_cast<double>(embs.size())));
        auto hold_idx = rng.sample_without_replacement(embs.size(), n_hold);
        std::vector<bool> held(embs.size(), false);
        for (auto i : hold_idx) held[i] = true;

        Embedding centroid;
        centroid.values.assign(embs.front().dim(), 0.0);
        std::size_t n_fit = 0;
        std::vector<const Embedding*> hold;
        for (std::size_t i = 0; i < embs.size(); ++i) {
            if (held[i]) {
                hold.push_back(&embs[i]);
            } else {
                for (std::size_t d = 0; d < centroid.values.size(); ++d) {
                    centroid.values[d] += embs[i].values[d];
                }
                ++n_fit;
            }
        }
        for (double& v : centroid.values) v /= static_cast<double>(n_fit);
        probe.centroids.push_back(std::move(centroid));
        holdout.push_back(std::move(hold));
    }

    // Golden-section search for the held-out NLL-minimizing temperature.
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = -6.0, hi = 6.0;  // log temperature
    double x1 = hi - phi * (hi - lo);
    double x2 = lo + phi * (hi - lo);
    double f1 = probe_nll(probe.centroids, holdout, std::exp(x1));
    double f2 = probe_nll(probe.centroids, holdout, std::exp(x2));
    for (int it = 0; it < 60; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = probe_nll(probe.centroids, holdout, std::exp(x1));
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = probe_nll(probe.centroids, holdout, std::exp(x2));
        }
    }
    probe.temperature = std::exp((lo + hi) / 2.0);
    return probe;
}

std::vector<double> attribution_posterior(const AttributionProbe& probe,
                                          const Embedding& x) {
    std::vector<double> logits(probe.classes.size());
    double max_logit = -1e300;
    for (std::size_t k = 0; k < probe.centroids.size(); ++k) {
        logits[k] = -squared_distance(x, probe.centroids[k]) / probe.temperature;
        max_logit = std::max(max_logit, logits[k]);
    }
    double z = 0.0;
    for (double& l : logits) {
        l = std::exp(l - max_logit);
        z += l;
    }
    for (double& l : logits) l /= z;
    return logits;
}

AttributionTrajectory evaluate_attribution(
    const AttributionProbe& probe,
    const std::vector<std::vector<std::pair<Embedding, std::string>>>& windows) {
    AttributionTrajectory out;
    double pooled_post = 0.0, pooled_acc = 0.0;
    std::size_t pooled_n = 0;
    for (const auto& window : windows) {
        double post = 0.0, acc = 0.0;
        for (const auto& [emb, true_class] : window) {
            const auto posterior = attribution_posterior(probe, emb);
            std::size_t true_idx = probe.classes.size();
            std::size_t arg_max = 0;
            for (std::size_t k = 0; k < probe.classes.size(); ++k) {
                if (probe.classes[k] == true_class) true_idx = k;
                if (posterior[k] > posterior[arg_max]) arg_max = k;
            }
            if (true_idx == probe.classes.size()) {
                throw Error("unknown_class",
                            "class '" + true_class + "' not in probe");
            }
            post += posterior[true_idx];
            acc += arg_max == true_idx ? 1.0 : 0.0;
        }
        const double n = window.empty() ? 1.0 : static_cast<double>(window.size());
        out.mean_true_posterior.push_back(post / n);
        out.accuracy.push_back(acc / n);
        pooled_post += post;
        pooled_acc += acc;
        pooled_n += window.size();
    }
    if (pooled_n > 0) {
        out.pooled_posterior = pooled_post / static_cast<double>(pooled_n);
        out.pooled_accuracy = pooled_acc / static_cast<double>(pooled_n);
    }
    return out;
}

}  // namespace semdrift
