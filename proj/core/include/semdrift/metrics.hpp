#pragma once
// Transcript-level diagnostics: semantic diversity traces, Vendi effective
// support, token survival, conditional-compression redundancy, cultural-axis
// projection, and the model-attribution probe.
//
// All functions are pure over immutable inputs; randomized procedures take
// explicit seeds and are reproducible bit-for-bit.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "semdrift/corpus.hpp"
#include "semdrift/embed.hpp"

namespace semdrift {

// Window series plus one unit embedding per window (and optionally one per
// utterance, needed by the Vendi resampler).
struct EmbeddedWindowSeries {
    std::string run_id;
    int window_len = 10;
    std::vector<Window> windows;
    std::vector<std::optional<Embedding>> window_embeddings;
    std::vector<std::vector<Embedding>> utterance_embeddings;  // may be empty
};

// Embed every window document (chunk-and-pool) and, when
// `embed_utterances` is set, every utterance in every window.
EmbeddedWindowSeries embed_series(const WindowSeries& series,
                                  Embedder& provider,
                                  std::size_t chunk_limit = 8000,
                                  bool embed_utterances = false);

// ---------------------------------------------------------------------------
// Diversity traces

// D_w = 1 - cos(e_w, e_1); D_1 = 0 by definition.
std::vector<double> within_run_diversity(const EmbeddedWindowSeries& series);

// Adjacent-window cosines; length = #windows - 1 (empty below 2 windows).
std::vector<double> convergence_degree(const EmbeddedWindowSeries& series);

struct CrossRunDiversity {
    std::vector<double> per_window;  // D_ijw over the common horizon
    double mean = 0.0;
};

CrossRunDiversity cross_run_diversity(const EmbeddedWindowSeries& a,
                                      const EmbeddedWindowSeries& b);

struct ConditionCrossRun {
    std::vector<double> per_window_mean;  // mean over pairs at each window
    double mean = 0.0;                    // mean over all pairs and windows
    std::size_t n_pairs = 0;
};

// All pairwise comparisons among replicate runs, averaged.
ConditionCrossRun condition_cross_run_diversity(
    const std::vector<EmbeddedWindowSeries>& runs);

// ---------------------------------------------------------------------------
// Vendi effective support

struct VendiResult {
    int window = 0;
    std::size_t m = 0;
    int resamples = 0;
    double h_v = 0.0;     // spectral entropy (natural log)
    double s_eff = 0.0;   // exp(H_V)
    double v_norm = 0.0;  // s_eff / m
    bool skipped = false;
    std::size_t n_utterances = 0;
};

// Exact Vendi quantities on one fixed sample (no rarefaction).
VendiResult vendi_exact(const std::vector<Embedding>& utterances);

// Rarefied Vendi: `resamples` draws of m utterances without replacement,
// quantities averaged across draws. Windows with fewer than m utterances are
// reported as skipped.
VendiResult vendi(const std::vector<Embedding>& utterances, std::size_t m = 30,
                  int resamples = 200, std::uint64_t seed = 1);

// Per-window Vendi over a series (requires utterance embeddings).
std::vector<VendiResult> vendi_trace(const EmbeddedWindowSeries& series,
                                     std::size_t m = 30, int resamples = 200,
                                     std::uint64_t seed = 1);

// ---------------------------------------------------------------------------
// Token survival

struct SurvivalReport {
    std::set<std::string> head_tokens;
    std::set<std::string> tail_tokens;
    std::vector<double> head_survival;  // per window, non-increasing
    std::vector<double> tail_survival;
    double delta_auc = 0.0;        // sum_w head(w) - tail(w)
    double half_survival_lag = 0.0;  // first-window-below-0.5: head minus tail
    double terminal_gap = 0.0;
    std::size_t budget = 0;  // common per-window token budget used
};

// Head/tail sets come from the pooled downsampled counts of the first
// `early_windows` windows (top and bottom `mass_frac` of cumulative
// frequency mass) and are frozen thereafter. budget = 0 selects the smallest
// window token count.
SurvivalReport token_survival(const WindowSeries& series, int early_windows = 4,
                              double mass_frac = 0.10, std::size_t budget = 0,
                              std::uint64_t seed = 1);

// ---------------------------------------------------------------------------
// Conditional compression

struct CompressionPoint {
    int window = 0;       // t >= 2
    bool skipped = false;  // empty window
    std::size_t raw_len = 0;
    double delta_hist = 0.0;  // C(H || W_t) - C(H)
    double ratio = 0.0;       // |W_t| / delta_hist
    // True-history advantage per control: (control cost - true cost) / |W_t|.
    double advantage_wrong = 0.0;
    double advantage_shuffled = 0.0;
    double advantage_reversed = 0.0;
    bool has_wrong = false;
};

struct CompressionTrace {
    std::string compressor_id;  // e.g. "deflate-6"
    std::vector<CompressionPoint> points;
};

// `wrong_history` supplies another run of the same condition for the
// wrong-history control (pass nullptr to skip it). `history_budget` caps the
// conditioning history to its most recent bytes (0 = full history).
CompressionTrace compression_trace(const WindowSeries& series,
                                   const WindowSeries* wrong_history = nullptr,
                                   int level = 6,
                                   std::size_t history_budget = 0,
                                   std::uint64_t seed = 1);

// DEFLATE-compressed byte count at the given level (the fixed compressor
// identity behind every compression metric here).
std::size_t deflate_size(const std::string& bytes, int level = 6);

// ---------------------------------------------------------------------------
// Cultural-axis projection

struct AntonymPair {
    std::string positive;
    std::string negative;
};

struct CulturalAxisSpec {
    std::string name;
    std::vector<AntonymPair> pairs;
};

// The shipped bipolar probe axes (>= 8 antonym pairs each).
const std::vector<CulturalAxisSpec>& default_cultural_axes();

// normalize(mean_p(embed(pos_p) - embed(neg_p))) over the axis pairs, with
// unit-normalized term embeddings.
Embedding build_axis_vector(const CulturalAxisSpec& axis, Embedder& provider);

struct AxisShift {
    std::string axis;
    double mean_shift = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;  // bootstrap 95%
    double t = 0.0;
    double p = 1.0;          // two-sided one-sample t test across runs
    std::string stars;       // "***", "**", "*", "†" or ""
    std::vector<double> run_shifts;
};

// Early/late centroids are normalized means of the first/last `edge_windows`
// window embeddings of each run; the shift is the projection difference
// <c_late, a> - <c_early, a>, summarized across runs.
std::vector<AxisShift> cultural_projection(
    const std::vector<EmbeddedWindowSeries>& runs,
    const std::vector<CulturalAxisSpec>& axes, Embedder& provider,
    int edge_windows = 3, int bootstrap_resamples = 10000,
    std::uint64_t seed = 1);

std::string significance_stars(double p);

// ---------------------------------------------------------------------------
// Model-attribution probe

struct AttributionProbe {
    std::vector<std::string> classes;
    std::vector<Embedding> centroids;  // per class, raw mean (not unit)
    double temperature = 1.0;
};

// Train centroids on utterance-level embeddings and fit the softmax
// temperature on a held-out split; the probe is then frozen.
AttributionProbe train_attribution_probe(
    const std::map<std::string, std::vector<Embedding>>& train,
    double holdout_fraction = 0.2, std::uint64_t seed = 1,
    std::size_t min_per_class = 50);

// Posterior over classes via softmax of negative squared distances.
std::vector<double> attribution_posterior(const AttributionProbe& probe,
                                          const Embedding& x);

struct AttributionTrajectory {
    std::vector<double> mean_true_posterior;  // per probe window
    std::vector<double> accuracy;             // per probe window
    double pooled_posterior = 0.0;
    double pooled_accuracy = 0.0;
};

// Evaluate a frozen probe on per-window batches of (embedding, true class).
AttributionTrajectory evaluate_attribution(
    const AttributionProbe& probe,
    const std::vector<std::vector<std::pair<Embedding, std::string>>>& windows);

}  // namespace semdrift
