#pragma once
// Inference layer: window-level fixed-effects regressions with clustered
// errors and multiplicity correction, saturating-exponential fits with
// early-window plateau prediction, late-stage plateau tests, rank tests,
// and run-level percentile bootstraps.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "semdrift/common.hpp"

namespace semdrift {

// ---------------------------------------------------------------------------
// Probability helpers (exposed for reuse in metrics and tests)

double normal_cdf(double z);
double incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double df);

// ---------------------------------------------------------------------------
// Fixed-effects OLS with cluster-robust covariance

struct RegressionObservation {
    double outcome = 0.0;
    std::string level;    // intervention level D_i
    int window = 0;       // window position W_i (fixed effect)
    std::string cluster;  // run id (within-run) or run-pair id (cross-run)
};

enum class MultiplicityCorrection { Bonferroni, Holm };

struct RegressionSpec {
    std::string outcome_layer;  // "within_run" | "cross_run"
    std::string factor;
    std::string model_group;
    std::string reference_level;  // omitted baseline category b_f
    std::vector<RegressionObservation> observations;
    bool cr0 = false;  // default CR1 finite-sample scaling
    MultiplicityCorrection correction = MultiplicityCorrection::Bonferroni;
};

struct CoefficientRow {
    std::string factor;
    std::string model_group;
    std::string level;
    double raw_p = 1.0;
    double adjusted_p = 1.0;
    double coefficient = 0.0;
    double se = 0.0;
    double t_stat = 0.0;
    double df = 0.0;
};

struct OlsFit {
    std::vector<CoefficientRow> level_rows;  // one per non-reference level
    double intercept = 0.0;
    std::vector<std::string> column_names;  // full design-column names
    std::vector<double> beta;               // full coefficient vector
    std::vector<double> residuals;
    std::size_t n_clusters = 0;
    std::size_t n_obs = 0;
};

// Estimates Y = a + sum_l b_l 1(D=l) + sum_t d_t 1(W=t) + e with the
// reference level and the first window omitted. Covariance is CR1 by default
// (c = G/(G-1) * (N-1)/(N-K)); p-values use a t distribution with G-1 df.
// Multiplicity correction is applied across the level rows of this spec
// (one comparison family = outcome layer x factor x model group).
OlsFit fixed_effects_ols(const RegressionSpec& spec);

// min(1, m*p) within a family; pass-through helper used by fixed_effects_ols.
std::vector<double> bonferroni_adjust(const std::vector<double>& raw);
std::vector<double> holm_adjust(const std::vector<double>& raw);

// ---------------------------------------------------------------------------
// Saturating-exponential contraction fit: D(t) = d_inf * (1 - exp(-g (t-1)))

struct ExponentialFit {
    double d_inf = 0.0;
    double gamma = 0.0;
    double rmse = 0.0;
    double r_squared = 0.0;
    double sse = 0.0;
    int fit_first = 1;  // first t index used (1-based)
    int fit_last = 0;   // last t index used
    bool gamma_identified = true;  // false for degenerate flat-zero traces
};

// Fits by trust-region Levenberg-Marquardt with an analytic Jacobian and a
// log parameterization of gamma (so gamma > 0 always). Multi-start over
// gamma0 in {0.005, 0.02, 0.1, 0.5}; best SSE wins. `trace[i]` is D(t) at
// t = i+1; pass fit_first/fit_last (1-based, inclusive) to restrict range.
ExponentialFit fit_exponential(const std::vector<double>& trace,
                               int fit_first = 1, int fit_last = -1);

double exponential_model(double d_inf, double gamma, double t);

struct PlateauPrediction {
    ExponentialFit early_fit;
    double predicted_plateau = 0.0;  // mean fitted value over the tail range
    double observed_plateau = 0.0;   // mean observed value over the tail range
    double abs_error = 0.0;
};

// Fit on the first `early_points` trace entries only; evaluate the fitted
// curve on the final `tail_points` indices and compare with the observed
// mean there.
PlateauPrediction predict_plateau_from_early(const std::vector<double>& trace,
                                             int early_points = 50,
                                             int tail_points = 50);

struct PlateauCohortSummary {
    std::vector<PlateauPrediction> runs;
    double observed_mean = 0.0, observed_sd = 0.0;
    double predicted_mean = 0.0, predicted_sd = 0.0;
    double mae_mean = 0.0, mae_sd = 0.0;
    double mae_ci_lo = 0.0, mae_ci_hi = 0.0;  // run-level percentile bootstrap
};

PlateauCohortSummary summarize_plateau_cohort(
    const std::vector<std::vector<double>>& traces, int early_points = 50,
    int tail_points = 50, int bootstrap_resamples = 10000,
    std::uint64_t seed = 1);

// ---------------------------------------------------------------------------
// Late-stage plateau test: pooled OLS of similarity on position with
// run-clustered standard errors.

struct PlateauSegment {
    std::string run_id;
    std::vector<double> positions;
    std::vector<double> values;
};

struct PlateauTestResult {
    double slope = 0.0;
    double slope_per_100 = 0.0;
    double se = 0.0;
    double p_two_sided = 1.0;
    double fraction_negative = 0.0;   // share of runs with negative own slope
    double end_to_end_change = 0.0;   // pooled slope times position span
    std::size_t n_runs = 0;
};

PlateauTestResult plateau_test(const std::vector<PlateauSegment>& segments,
                               bool cr0 = false);

// ---------------------------------------------------------------------------
// Rank and t tests on run-level differences

// One-sided (greater) Wilcoxon signed-rank p. Zeros dropped, ties get
// mid-ranks. Exact distribution for n <= 25 (conditional on the observed
// ranks), normal approximation with continuity correction above.
double wilcoxon_signed_rank_one_sided(const std::vector<double>& differences);

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    std::size_t n = 0;
};

// One-sample, one-sided (greater) t test on differences.
TTestResult paired_t_one_sided(const std::vector<double>& differences);

// ---------------------------------------------------------------------------
// Run-level percentile bootstrap

struct BootstrapCi {
    double lo = 0.0;
    double hi = 0.0;
    double point = 0.0;  // statistic on the original sample
};

BootstrapCi bootstrap_ci(
    const std::vector<double>& run_values, int resamples = 10000,
    std::uint64_t seed = 1,
    const std::function<double(const std::vector<double>&)>& statistic = {});

// Convenience basics
double mean(const std::vector<double>& v);
double sample_sd(const std::vector<double>& v);

}  // namespace semdrift
