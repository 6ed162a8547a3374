#include "semdrift/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include <Eigen/Dense>

#include "semdrift/rng.hpp"

namespace semdrift {

double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

namespace {

// Continued fraction for the regularized incomplete beta function.
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kFpMin = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                         a * std::log(x) + b * std::log1p(-x);
    const double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return bt * betacf(a, b, x) / a;
    }
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
    if (df <= 0.0) throw Error("bad_df", "t distribution needs df > 0");
    const double x = df / (df + t * t);
    const double p = 0.5 * incomplete_beta(df / 2.0, 0.5, x);
    return t >= 0.0 ? 1.0 - p : p;
}

std::vector<double> bonferroni_adjust(const std::vector<double>& raw) {
    const double m = static_cast<double>(raw.size());
    std::vector<double> adj(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        adj[i] = std::min(1.0, m * raw[i]);
    }
    return adj;
}

std::vector<double> holm_adjust(const std::vector<double>& raw) {
    const std::size_t m = raw.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return raw[a] < raw[b]; });
    std::vector<double> adj(m, 0.0);
    double running = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double scaled = static_cast<double>(m - k) * raw[order[k]];
        running = std::max(running, std::min(1.0, scaled));
        adj[order[k]] = running;
    }
    return adj;
}

OlsFit fixed_effects_ols(const RegressionSpec& spec) {
    const auto& obs = spec.observations;
    if (obs.empty()) throw Error("no_observations", "empty regression spec");

    std::set<std::string> level_set;
    std::set<int> window_set;
    std::map<std::string, int> cluster_index;
    bool has_reference = false;
    for (const auto& o : obs) {
        level_set.insert(o.level);
        window_set.insert(o.window);
        cluster_index.emplace(o.cluster, 0);
        if (o.level == spec.reference_level) has_reference = true;
    }
    if (!has_reference) {
        throw Error("missing_reference",
                    "reference level '" + spec.reference_level +
                        "' absent from observations");
    }
    {
        int idx = 0;
        for (auto& [k, v] : cluster_index) v = idx++;
    }
    const std::size_t n_clusters = cluster_index.size();
    if (n_clusters < 2) {
        throw Error("single_cluster",
                    "cluster-robust inference needs at least 2 clusters");
    }

    std::vector<std::string> levels;
    for (const auto& l : level_set) {
        if (l != spec.reference_level) levels.push_back(l);
    }
    std::vector<int> windows(window_set.begin(), window_set.end());
    // First window is the omitted fixed-effect category.
    std::vector<int> window_dummies(windows.begin() + 1, windows.end());

    const std::size_t n = obs.size();
    const std::size_t k = 1 + levels.size() + window_dummies.size();

    std::vector<std::string> column_names;
    column_names.reserve(k);
    column_names.push_back("(intercept)");
    for (const auto& l : levels) column_names.push_back("level:" + l);
    for (int w : window_dummies) column_names.push_back("window:" + std::to_string(w));

    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                              static_cast<Eigen::Index>(k));
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    std::map<std::string, std::size_t> level_col;
    for (std::size_t i = 0; i < levels.size(); ++i) level_col[levels[i]] = 1 + i;
    std::map<int, std::size_t> window_col;
    for (std::size_t i = 0; i < window_dummies.size(); ++i) {
        window_col[window_dummies[i]] = 1 + levels.size() + i;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto& o = obs[i];
        const auto ei = static_cast<Eigen::Index>(i);
        X(ei, 0) = 1.0;
        if (auto it = level_col.find(o.level); it != level_col.end()) {
            X(ei, static_cast<Eigen::Index>(it->second)) = 1.0;
        }
        if (auto it = window_col.find(o.window); it != window_col.end()) {
            X(ei, static_cast<Eigen::Index>(it->second)) = 1.0;
        }
        y(ei) = o.outcome;
    }
    if (n <= k) {
        throw Error("too_few_observations",
                    "need more observations than design columns");
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (static_cast<std::size_t>(qr.rank()) < k) {
        const auto perm = qr.colsPermutation().indices();
        const std::size_t bad =
            static_cast<std::size_t>(perm(static_cast<Eigen::Index>(k - 1)));
        throw Error("rank_deficient",
                    "design matrix is rank deficient; collinear column: " +
                        column_names[bad]);
    }
    const Eigen::VectorXd beta = qr.solve(y);
    const Eigen::VectorXd resid = y - X * beta;

    const Eigen::MatrixXd xtx_inv =
        (X.transpose() * X)
            .ldlt()
            .solve(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(k),
                                             static_cast<Eigen::Index>(k)));

    // Cluster "meat": sum over clusters of (X_g' e_g)(X_g' e_g)'.
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k),
                                                 static_cast<Eigen::Index>(k));
    std::vector<Eigen::VectorXd> scores(
        n_clusters, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k)));
    for (std::size_t i = 0; i < n; ++i) {
        const auto ei = static_cast<Eigen::Index>(i);
        scores[static_cast<std::size_t>(cluster_index[obs[i].cluster])] +=
            X.row(ei).transpose() * resid(ei);
    }
    for (const auto& s : scores) meat += s * s.transpose();

    const double g = static_cast<double>(n_clusters);
    const double nn = static_cast<double>(n);
    const double kk = static_cast<double>(k);
    const double c =
        spec.cr0 ? 1.0 : (g / (g - 1.0)) * ((nn - 1.0) / (nn - kk));
    const Eigen::MatrixXd vcov = c * xtx_inv * meat * xtx_inv;

    OlsFit fit;
    fit.intercept = beta(0);
    fit.column_names = column_names;
    fit.beta.assign(beta.data(), beta.data() + beta.size());
    fit.residuals.assign(resid.data(), resid.data() + resid.size());
    fit.n_clusters = n_clusters;
    fit.n_obs = n;

    const double df = g - 1.0;
    std::vector<double> raw_ps;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const auto col = static_cast<Eigen::Index>(1 + i);
        CoefficientRow row;
        row.factor = spec.factor;
        row.model_group = spec.model_group;
        row.level = levels[i];
        row.coefficient = beta(col);
        row.se = std::sqrt(std::max(0.0, vcov(col, col)));
        row.df = df;
        const double scale = std::max(1e-300, y.cwiseAbs().maxCoeff());
        if (row.se <= 1e-13 * scale) {
            row.t_stat = 0.0;
            row.raw_p = std::fabs(row.coefficient) <= 1e-12 * scale ? 1.0 : 0.0;
        } else {
            row.t_stat = row.coefficient / row.se;
            row.raw_p = 2.0 * (1.0 - student_t_cdf(std::fabs(row.t_stat), df));
        }
        raw_ps.push_back(row.raw_p);
        fit.level_rows.push_back(std::move(row));
    }
    const auto adjusted = spec.correction == MultiplicityCorrection::Holm
                              ? holm_adjust(raw_ps)
                              : bonferroni_adjust(raw_ps);
    for (std::size_t i = 0; i < fit.level_rows.size(); ++i) {
        fit.level_rows[i].adjusted_p = adjusted[i];
    }
    return fit;
}

// ---------------------------------------------------------------------------

double exponential_model(double d_inf, double gamma, double t) {
    return d_inf * (1.0 - std::exp(-gamma * (t - 1.0)));
}

namespace {

struct LmOutcome {
    double d_inf = 0.0;
    double log_gamma = 0.0;
    double sse = std::numeric_limits<double>::infinity();
    bool converged = false;
    int iterations = 0;
};

// Levenberg-Marquardt on (d_inf, u = log gamma) with analytic Jacobian.
LmOutcome lm_fit(const std::vector<double>& t, const std::vector<double>& y,
                 double d0, double gamma0) {
    const std::size_t n = t.size();
    double d = d0;
    double u = std::log(gamma0);

    auto sse_at = [&](double dd, double uu) {
        const double gg = std::exp(uu);
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = exponential_model(dd, gg, t[i]) - y[i];
            s += r * r;
        }
        return s;
    };

    double sse = sse_at(d, u);
    double lambda = 1e-3;
    LmOutcome out;
    for (int iter = 0; iter < 200; ++iter) {
        const double g = std::exp(u);
        // Normal equations for the 2x2 system.
        double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = std::exp(-g * (t[i] - 1.0));
            const double f = d * (1.0 - e);
            const double r = f - y[i];
            const double jd = 1.0 - e;                      // df/d d_inf
            const double jg = d * (t[i] - 1.0) * e;         // df/d gamma
            const double ju = jg * g;                       // chain rule to u
            a11 += jd * jd;
            a12 += jd * ju;
            a22 += ju * ju;
            b1 += jd * r;
            b2 += ju * r;
        }
        bool stepped = false;
        for (int tries = 0; tries < 25; ++tries) {
            const double m11 = a11 * (1.0 + lambda);
            const double m22 = a22 * (1.0 + lambda);
            const double det = m11 * m22 - a12 * a12;
            if (std::fabs(det) < 1e-300) {
                lambda *= 10.0;
                continue;
            }
            const double dd = (-b1 * m22 + b2 * a12) / det;
            const double du = (-b2 * m11 + b1 * a12) / det;
            const double nd = d + dd;
            const double nu = std::clamp(u + du, -30.0, 10.0);
            const double nsse = sse_at(nd, nu);
            if (nsse <= sse) {
                const double improvement = sse - nsse;
                d = nd;
                u = nu;
                sse = nsse;
                lambda = std::max(lambda / 3.0, 1e-12);
                stepped = true;
                if (improvement < 1e-15 * (1.0 + sse) &&
                    std::fabs(dd) + std::fabs(du) < 1e-12) {
                    out.converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        out.iterations = iter + 1;
        if (!stepped || out.converged) {
            out.converged = true;
            break;
        }
    }
    out.d_inf = d;
    out.log_gamma = u;
    out.sse = sse;
    return out;
}

}  // namespace

ExponentialFit fit_exponential(const std::vector<double>& trace, int fit_first,
                               int fit_last) {
    const int n_total = static_cast<int>(trace.size());
    if (fit_last < 0) fit_last = n_total;
    if (fit_first < 1 || fit_last > n_total || fit_last - fit_first + 1 < 5) {
        throw Error("bad_fit_range",
                    "fit range must contain at least 5 points within the trace");
    }
    std::vector<double> t, y;
    for (int i = fit_first; i <= fit_last; ++i) {
        t.push_back(static_cast<double>(i));
        y.push_back(trace[static_cast<std::size_t>(i - 1)]);
    }

    const double y_max = *std::max_element(y.begin(), y.end());
    const double y_abs_max =
        std::max(std::fabs(*std::min_element(y.begin(), y.end())),
                 std::fabs(y_max));

    ExponentialFit fit;
    fit.fit_first = fit_first;
    fit.fit_last = fit_last;

    // Degenerate flat-zero trace: d_inf = 0 and gamma is unidentified.
    if (y_abs_max < 1e-12) {
        fit.d_inf = 0.0;
        fit.gamma = 0.0;
        fit.gamma_identified = false;
        fit.rmse = 0.0;
        fit.r_squared = 1.0;
        return fit;
    }

    const double d0 = y_max > 0.0 ? y_max : y_abs_max;
    static constexpr double kGammaStarts[] = {0.005, 0.02, 0.1, 0.5};
    LmOutcome best;
    std::string diagnostics;
    for (double g0 : kGammaStarts) {
        const LmOutcome o = lm_fit(t, y, d0, g0);
        diagnostics += "start gamma=" + fmt_double(g0) +
                       " sse=" + fmt_double(o.sse) +
                       (o.converged ? " converged; " : " not converged; ");
        if (o.sse < best.sse) best = o;
    }
    if (!std::isfinite(best.sse)) {
        throw Error("fit_failed", "exponential fit failed: " + diagnostics);
    }

    fit.d_inf = best.d_inf;
    fit.gamma = std::exp(best.log_gamma);
    fit.sse = best.sse;
    // A rate pinned at the parameter bounds is a boundary solution (step-like
    // or flat trace), not an identified rate.
    if (best.log_gamma >= 9.9 || best.log_gamma <= -29.9) {
        fit.gamma_identified = false;
    }
    const auto n = static_cast<double>(y.size());
    fit.rmse = std::sqrt(best.sse / n);
    const double ym = mean(y);
    double sst = 0.0;
    for (double v : y) sst += (v - ym) * (v - ym);
    fit.r_squared = sst > 0.0 ? 1.0 - best.sse / sst : 1.0;
    return fit;
}

PlateauPrediction predict_plateau_from_early(const std::vector<double>& trace,
                                             int early_points,
                                             int tail_points) {
    const int n = static_cast<int>(trace.size());
    if (early_points + tail_points > n) {
        throw Error("trace_too_short",
                    "trace must contain both the early and the tail range");
    }
    PlateauPrediction pred;
    pred.early_fit = fit_exponential(trace, 1, early_points);

    double pred_sum = 0.0, obs_sum = 0.0;
    for (int i = n - tail_points + 1; i <= n; ++i) {
        pred_sum += exponential_model(pred.early_fit.d_inf,
                                      pred.early_fit.gamma,
                                      static_cast<double>(i));
        obs_sum += trace[static_cast<std::size_t>(i - 1)];
    }
    pred.predicted_plateau = pred_sum / tail_points;
    pred.observed_plateau = obs_sum / tail_points;
    pred.abs_error = std::fabs(pred.predicted_plateau - pred.observed_plateau);
    return pred;
}

PlateauCohortSummary summarize_plateau_cohort(
    const std::vector<std::vector<double>>& traces, int early_points,
    int tail_points, int bootstrap_resamples, std::uint64_t seed) {
    PlateauCohortSummary s;
    std::vector<double> obs, pred, errs;
    for (const auto& trace : traces) {
        s.runs.push_back(predict_plateau_from_early(trace, early_points, tail_points));
        obs.push_back(s.runs.back().observed_plateau);
        pred.push_back(s.runs.back().predicted_plateau);
        errs.push_back(s.runs.back().abs_error);
    }
    s.observed_mean = mean(obs);
    s.observed_sd = sample_sd(obs);
    s.predicted_mean = mean(pred);
    s.predicted_sd = sample_sd(pred);
    s.mae_mean = mean(errs);
    s.mae_sd = sample_sd(errs);
    const BootstrapCi ci = bootstrap_ci(errs, bootstrap_resamples, seed);
    s.mae_ci_lo = ci.lo;
    s.mae_ci_hi = ci.hi;
    return s;
}

// ---------------------------------------------------------------------------

PlateauTestResult plateau_test(const std::vector<PlateauSegment>& segments,
                               bool cr0) {
    if (segments.size() < 2) {
        throw Error("too_few_runs", "plateau test needs at least 2 runs");
    }
    std::size_t n = 0;
    for (const auto& seg : segments) {
        if (seg.positions.size() != seg.values.size()) {
            throw Error("bad_segment", "positions/values size mismatch");
        }
        n += seg.values.size();
    }
    Eigen::MatrixXd X(static_cast<Eigen::Index>(n), 2);
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    std::vector<std::size_t> cluster_of(n);
    double pos_min = std::numeric_limits<double>::infinity();
    double pos_max = -std::numeric_limits<double>::infinity();
    {
        std::size_t i = 0;
        for (std::size_t g = 0; g < segments.size(); ++g) {
            for (std::size_t j = 0; j < segments[g].values.size(); ++j, ++i) {
                const auto ei = static_cast<Eigen::Index>(i);
                X(ei, 0) = 1.0;
                X(ei, 1) = segments[g].positions[j];
                y(ei) = segments[g].values[j];
                cluster_of[i] = g;
                pos_min = std::min(pos_min, segments[g].positions[j]);
                pos_max = std::max(pos_max, segments[g].positions[j]);
            }
        }
    }
    const Eigen::MatrixXd xtx = X.transpose() * X;
    const Eigen::MatrixXd xtx_inv = xtx.ldlt().solve(Eigen::MatrixXd::Identity(2, 2));
    const Eigen::VectorXd beta = xtx_inv * (X.transpose() * y);
    const Eigen::VectorXd resid = y - X * beta;

    std::vector<Eigen::Vector2d> scores(segments.size(), Eigen::Vector2d::Zero());
    for (std::size_t i = 0; i < n; ++i) {
        const auto ei = static_cast<Eigen::Index>(i);
        scores[cluster_of[i]] += X.row(ei).transpose() * resid(ei);
    }
    Eigen::Matrix2d meat = Eigen::Matrix2d::Zero();
    for (const auto& s : scores) meat += s * s.transpose();
    const double g = static_cast<double>(segments.size());
    const double c = cr0 ? 1.0
                         : (g / (g - 1.0)) * ((static_cast<double>(n) - 1.0) /
                                              (static_cast<double>(n) - 2.0));
    const Eigen::Matrix2d vcov = c * xtx_inv * meat * xtx_inv;

    PlateauTestResult r;
    r.slope = beta(1);
    r.slope_per_100 = beta(1) * 100.0;
    r.se = std::sqrt(std::max(0.0, vcov(1, 1)));
    const double df = g - 1.0;
    const double y_scale = std::max(1e-300, y.cwiseAbs().maxCoeff());
    if (r.se <= 1e-13 * y_scale) {
        // Exactly flat segments: residuals vanish to rounding noise.
        r.p_two_sided = std::fabs(r.slope) <= 1e-12 * y_scale ? 1.0 : 0.0;
    } else {
        r.p_two_sided =
            2.0 * (1.0 - student_t_cdf(std::fabs(r.slope / r.se), df));
    }
    r.end_to_end_change = r.slope * (pos_max - pos_min);
    r.n_runs = segments.size();

    std::size_t negative = 0;
    for (const auto& seg : segments) {
        // Per-run OLS slope sign.
        const double mx = mean(seg.positions);
        const double my = mean(seg.values);
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t j = 0; j < seg.values.size(); ++j) {
            sxx += (seg.positions[j] - mx) * (seg.positions[j] - mx);
            sxy += (seg.positions[j] - mx) * (seg.values[j] - my);
        }
        if (sxx > 0.0 && sxy / sxx < 0.0) ++negative;
    }
    r.fraction_negative = static_cast<double>(negative) / g;
    return r;
}

// ---------------------------------------------------------------------------

double wilcoxon_signed_rank_one_sided(const std::vector<double>& differences) {
    std::vector<double> d;
    for (double x : differences) {
        if (x != 0.0) d.push_back(x);
    }
    const std::size_t n = d.size();
    if (n < 5) {
        throw Error("too_few_differences",
                    "need at least 5 non-zero differences");
    }

    // Mid-ranks of |d|.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::fabs(d[a]) < std::fabs(d[b]);
    });
    std::vector<double> rank(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n &&
               std::fabs(d[order[j + 1]]) == std::fabs(d[order[i]])) {
            ++j;
        }
        const double mid = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t q = i; q <= j; ++q) rank[order[q]] = mid;
        i = j + 1;
    }

    double w_plus = 0.0;
    for (std::size_t q = 0; q < n; ++q) {
        if (d[q] > 0.0) w_plus += rank[q];
    }

    if (n <= 25) {
        // Exact conditional distribution over sign assignments. Ranks are
        // multiples of 1/2 after mid-ranking, so work in doubled units.
        std::vector<int> r2(n);
        int total2 = 0;
        for (std::size_t q = 0; q < n; ++q) {
            r2[q] = static_cast<int>(std::llround(2.0 * rank[q]));
            total2 += r2[q];
        }
        std::vector<double> dist(static_cast<std::size_t>(total2) + 1, 0.0);
        dist[0] = 1.0;
        int upper = 0;
        for (std::size_t q = 0; q < n; ++q) {
            upper += r2[q];
            for (int s = upper; s >= r2[q]; --s) {
                dist[static_cast<std::size_t>(s)] +=
                    dist[static_cast<std::size_t>(s - r2[q])];
            }
        }
        const double denom = std::pow(2.0, static_cast<double>(n));
        const int w2 = static_cast<int>(std::llround(2.0 * w_plus));
        double tail = 0.0;
        for (int s = w2; s <= total2; ++s) {
            tail += dist[static_cast<std::size_t>(s)];
        }
        return tail / denom;
    }

    // Normal approximation with continuity correction and tie correction.
    const double nn = static_cast<double>(n);
    const double mu = nn * (nn + 1.0) / 4.0;
    double tie_term = 0.0;
    {
        std::map<double, int> tie_counts;
        for (std::size_t q = 0; q < n; ++q) tie_counts[std::fabs(d[q])]++;
        for (const auto& [v, t] : tie_counts) {
            (void)v;
            if (t > 1) {
                const double td = static_cast<double>(t);
                tie_term += td * td * td - td;
            }
        }
    }
    const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
    const double z = (w_plus - mu - 0.5) / std::sqrt(var);
    return 1.0 - normal_cdf(z);
}

TTestResult paired_t_one_sided(const std::vector<double>& differences) {
    if (differences.size() < 2) {
        throw Error("too_few_differences", "t test needs n >= 2");
    }
    TTestResult r;
    r.n = differences.size();
    const double m = mean(differences);
    const double sd = sample_sd(differences);
    if (sd == 0.0) {
        r.t = m > 0.0 ? std::numeric_limits<double>::infinity()
                      : (m < 0.0 ? -std::numeric_limits<double>::infinity() : 0.0);
        r.p = m > 0.0 ? 0.0 : (m < 0.0 ? 1.0 : 0.5);
        return r;
    }
    r.t = m / (sd / std::sqrt(static_cast<double>(r.n)));
    r.p = 1.0 - student_t_cdf(r.t, static_cast<double>(r.n - 1));
    return r;
}

BootstrapCi bootstrap_ci(
    const std::vector<double>& run_values, int resamples, std::uint64_t seed,
    const std::function<double(const std::vector<double>&)>& statistic) {
    if (run_values.size() < 2) {
        throw Error("too_few_runs", "bootstrap needs at least 2 run values");
    }
    const auto stat = statistic ? statistic
                                : std::function<double(const std::vector<double>&)>(
                                      [](const std::vector<double>& v) {
                                          return mean(v);
                                      });
    BootstrapCi ci;
    ci.point = stat(run_values);
    Rng rng(seed);
    const std::size_t n = run_values.size();
    std::vector<double> draws(static_cast<std::size_t>(resamples));
    std::vector<double> sample(n);
    for (int b = 0; b < resamples; ++b) {
        for (std::size_t j = 0; j < n; ++j) {
            sample[j] = run_values[static_cast<std::size_t>(rng.next_below(n))];
        }
        draws[static_cast<std::size_t>(b)] = stat(sample);
    }
    std::sort(draws.begin(), draws.end());
    const auto m = static_cast<double>(resamples);
    const auto lo_idx = static_cast<std::size_t>(std::floor(0.025 * m));
    auto hi_idx = static_cast<std::size_t>(std::floor(0.975 * m));
    if (hi_idx >= draws.size()) hi_idx = draws.size() - 1;
    ci.lo = draws[lo_idx];
    ci.hi = draws[hi_idx];
    return ci;
}

}  // namespace semdrift
