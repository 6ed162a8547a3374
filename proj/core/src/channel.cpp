#include "semdrift/channel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include <nlohmann/json.hpp>

namespace semdrift {

ChannelModel make_channel(const Eigen::MatrixXd& transition, double beta) {
    if (transition.rows() != transition.cols() || transition.rows() < 1) {
        throw Error("bad_matrix", "transition matrix must be square");
    }
    for (Eigen::Index i = 0; i < transition.rows(); ++i) {
        double row_sum = 0.0;
        for (Eigen::Index j = 0; j < transition.cols(); ++j) {
            if (transition(i, j) < 0.0) {
                throw Error("bad_matrix", "negative transition probability");
            }
            row_sum += transition(i, j);
        }
        if (std::fabs(row_sum - 1.0) > 1e-12) {
            throw Error("bad_matrix",
                        "row " + std::to_string(i) + " sums to " +
                            fmt_double(row_sum) + ", not 1");
        }
    }
    if (beta <= 0.0) throw Error("bad_beta", "sharpening exponent must be > 0");
    return ChannelModel{transition, beta};
}

Eigen::VectorXd sharpen(const Eigen::VectorXd& p, double beta) {
    if (beta == 1.0) return p;
    Eigen::VectorXd q(p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        q(i) = p(i) > 0.0 ? std::pow(p(i), beta) : 0.0;
    }
    const double z = q.sum();
    if (z <= 0.0) throw Error("degenerate_distribution", "sharpen: zero mass");
    return q / z;
}

double shannon_entropy(const Eigen::VectorXd& p) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p(i) > 0.0) h -= p(i) * std::log(p(i));
    }
    return h;
}

std::vector<Eigen::VectorXd> iterate(const ChannelModel& channel,
                                     const Eigen::VectorXd& p0, int steps,
                                     IterationMode mode) {
    if (p0.size() != channel.transition.rows()) {
        throw Error("dim_mismatch", "initial distribution has wrong size");
    }
    double sum = 0.0;
    for (Eigen::Index i = 0; i < p0.size(); ++i) {
        if (p0(i) < 0.0) {
            throw Error("bad_distribution", "negative probability in P0");
        }
        sum += p0(i);
    }
    if (std::fabs(sum - 1.0) > 1e-9) {
        throw Error("bad_distribution", "P0 must sum to 1");
    }
    std::vector<Eigen::VectorXd> out;
    out.reserve(static_cast<std::size_t>(steps) + 1);
    Eigen::VectorXd p = p0 / sum;
    out.push_back(p);
    for (int t = 0; t < steps; ++t) {
        p = (p.transpose() * channel.transition).transpose();
        if (mode == IterationMode::Sharpened) p = sharpen(p, channel.beta);
        p /= p.sum();  // keep the 1e-12 stochasticity contract under rounding
        out.push_back(p);
    }
    return out;
}

bool is_irreducible(const Eigen::MatrixXd& m) {
    const auto n = static_cast<std::size_t>(m.rows());
    auto reachable = [&](bool forward) {
        std::vector<bool> seen(n, false);
        std::vector<std::size_t> stack{0};
        seen[0] = true;
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            for (std::size_t v = 0; v < n; ++v) {
                const double w = forward ? m(static_cast<Eigen::Index>(u),
                                             static_cast<Eigen::Index>(v))
                                         : m(static_cast<Eigen::Index>(v),
                                             static_cast<Eigen::Index>(u));
                if (w > 0.0 && !seen[v]) {
                    seen[v] = true;
                    stack.push_back(v);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
    };
    return reachable(true) && reachable(false);
}

bool is_aperiodic(const Eigen::MatrixXd& m) {
    // Period = gcd over edges (u -> v) of depth(u) + 1 - depth(v) on a BFS
    // tree from state 0 (valid within one strongly connected component).
    const auto n = static_cast<std::size_t>(m.rows());
    std::vector<int> depth(n, -1);
    std::vector<std::size_t> queue{0};
    depth[0] = 0;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        const std::size_t u = queue[qi];
        for (std::size_t v = 0; v < n; ++v) {
            if (m(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) >
                    0.0 &&
                depth[v] < 0) {
                depth[v] = depth[u] + 1;
                queue.push_back(v);
            }
        }
    }
    int g = 0;
    for (std::size_t u = 0; u < n; ++u) {
        if (depth[u] < 0) continue;
        for (std::size_t v = 0; v < n; ++v) {
            if (m(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) >
                    0.0 &&
                depth[v] >= 0) {
                g = std::gcd(g, std::abs(depth[u] + 1 - depth[v]));
            }
        }
    }
    return g == 1;
}

StationaryResult stationary_and_gap(const ChannelModel& channel) {
    const Eigen::MatrixXd& m = channel.transition;
    if (!is_irreducible(m) || !is_aperiodic(m)) {
        throw Error("not_ergodic", "no unique stationary distribution");
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(m.transpose());
    if (solver.info() != Eigen::Success) {
        throw Error("eigen_failure", "eigendecomposition failed");
    }
    const auto& values = solver.eigenvalues();
    std::vector<std::size_t> order(static_cast<std::size_t>(values.size()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(values(static_cast<Eigen::Index>(a))) >
               std::abs(values(static_cast<Eigen::Index>(b)));
    });

    StationaryResult result;
    const auto top = static_cast<Eigen::Index>(order[0]);
    Eigen::VectorXcd v = solver.eigenvectors().col(top);
    Eigen::VectorXd stationary(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) stationary(i) = v(i).real();
    if (stationary.sum() < 0.0) stationary = -stationary;
    for (Eigen::Index i = 0; i < stationary.size(); ++i) {
        stationary(i) = std::max(stationary(i), 0.0);
    }
    result.stationary = stationary / stationary.sum();
    result.lambda2_modulus =
        order.size() > 1
            ? std::abs(values(static_cast<Eigen::Index>(order[1])))
            : 0.0;
    result.lambda3_modulus =
        order.size() > 2
            ? std::abs(values(static_cast<Eigen::Index>(order[2])))
            : 0.0;
    result.spectral_gap = 1.0 - result.lambda2_modulus;
    return result;
}

EntropyTrajectory entropy_trajectory_and_fit(const ChannelModel& channel,
                                             const Eigen::VectorXd& p0,
                                             int steps) {
    const StationaryResult st = stationary_and_gap(channel);
    const auto dists = iterate(channel, p0, steps, IterationMode::Linear);

    EntropyTrajectory out;
    out.h_stationary = shannon_entropy(st.stationary);
    out.spectral_gap = st.spectral_gap;
    for (const auto& p : dists) out.entropy.push_back(shannon_entropy(p));

    // Map onto the saturating-exponential form with the relaxation direction
    // taken from the stationary entropy: D(t) = s (H_{t-1} - H0) rises from
    // zero to |H* - H0| whether entropy contracts or expands toward H*.
    const double h0 = out.entropy.front();
    const double direction = out.h_stationary >= h0 ? 1.0 : -1.0;
    std::vector<double> d;
    d.reserve(out.entropy.size());
    for (double h : out.entropy) d.push_back(direction * (h - h0));
    const double span =
        *std::max_element(d.begin(), d.end()) -
        *std::min_element(d.begin(), d.end());
    if (span < 1e-14) {
        // Already at (or indistinguishable from) the fixed point.
        out.gamma_fit = 0.0;
        out.h_limit_fit = h0;
        out.r_squared = 1.0;
        out.fit_ok = true;
        return out;
    }
    const ExponentialFit fit = fit_exponential(d);
    out.gamma_fit = fit.gamma;
    out.h_limit_fit = h0 + direction * fit.d_inf;
    out.r_squared = fit.r_squared;
    out.fit_ok = fit.gamma_identified;
    return out;
}

DpiResult dpi_check(const ChannelModel& channel, const Eigen::VectorXd& p0,
                    int steps, double tolerance) {
    const auto n = channel.transition.rows();
    DpiResult out;
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);  // M^t
    for (int t = 0; t <= steps; ++t) {
        // Marginal of S_t and mutual information from the exact joint.
        Eigen::VectorXd marginal = (p0.transpose() * power).transpose();
        double mi = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (p0(i) <= 0.0) continue;
            for (Eigen::Index j = 0; j < n; ++j) {
                const double joint = p0(i) * power(i, j);
                if (joint > 0.0 && marginal(j) > 0.0) {
                    mi += joint * std::log(joint / (p0(i) * marginal(j)));
                }
            }
        }
        out.mutual_information.push_back(mi);
        power *= channel.transition;
    }
    for (std::size_t t = 1; t < out.mutual_information.size(); ++t) {
        const double step =
            out.mutual_information[t] - out.mutual_information[t - 1];
        if (step > out.max_violation) out.max_violation = step;
        if (step > tolerance) out.non_increasing = false;
    }
    return out;
}

FisherDecay fisher_decay(
    const std::function<Eigen::VectorXd(double)>& initial_family,
    double theta0, const ChannelModel& channel, int steps, double h) {
    const auto plus = iterate(channel, initial_family(theta0 + h), steps);
    const auto minus = iterate(channel, initial_family(theta0 - h), steps);
    const auto center = iterate(channel, initial_family(theta0), steps);

    FisherDecay out;
    for (int t = 0; t <= steps; ++t) {
        const auto& p = center[static_cast<std::size_t>(t)];
        const auto& pp = plus[static_cast<std::size_t>(t)];
        const auto& pm = minus[static_cast<std::size_t>(t)];
        double info = 0.0;
        for (Eigen::Index x = 0; x < p.size(); ++x) {
            if (p(x) < 1e-12) {
                out.any_skipped = true;
                continue;
            }
            const double dp = (pp(x) - pm(x)) / (2.0 * h);
            info += dp * dp / p(x);
        }
        out.information.push_back(info);
    }

    // Fitted decay factor from the log-linear tail (positive entries only).
    std::vector<double> ts, logs;
    for (std::size_t t = 0; t < out.information.size(); ++t) {
        if (out.information[t] > 1e-300) {
            ts.push_back(static_cast<double>(t));
            logs.push_back(std::log(out.information[t]));
        }
    }
    if (ts.size() >= 2) {
        const double mt = mean(ts);
        const double ml = mean(logs);
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            sxx += (ts[i] - mt) * (ts[i] - mt);
            sxy += (ts[i] - mt) * (logs[i] - ml);
        }
        out.eta_hat = sxx > 0.0 ? std::exp(sxy / sxx) : 1.0;
    } else {
        out.eta_hat = 0.0;
    }
    return out;
}

HorizonResult creativity_horizon(double h0, double h_star, double gamma,
                                 double dh_threshold) {
    if (gamma <= 0.0) throw Error("bad_gamma", "gamma must be positive");
    if (dh_threshold <= 0.0) {
        throw Error("bad_threshold", "entropy threshold must be positive");
    }
    HorizonResult r;
    const double margin = h0 - h_star;
    if (margin <= 0.0) {
        r.t_star = 0.0;
        r.clamped = true;
        return r;
    }
    r.t_star = std::log(margin / dh_threshold) / gamma;
    if (r.t_star < 0.0) {
        r.t_star = 0.0;
        r.clamped = true;
    }
    return r;
}

ChannelModel channel_from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const std::exception& ex) {
        throw Error("bad_channel_spec", std::string("invalid JSON: ") + ex.what());
    }
    const double beta = j.value("beta", 1.0);
    if (j.contains("preset")) {
        const std::string preset = j["preset"].get<std::string>();
        if (preset == "two_state") {
            const double a = j.at("a").get<double>();
            const double b = j.at("b").get<double>();
            Eigen::MatrixXd m(2, 2);
            m << 1.0 - a, a, b, 1.0 - b;
            return make_channel(m, beta);
        }
        throw Error("bad_channel_spec", "unknown preset '" + preset + "'");
    }
    if (!j.contains("matrix")) {
        throw Error("bad_channel_spec", "spec needs 'matrix' or 'preset'");
    }
    const auto& rows = j["matrix"];
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(row.size()) != n) {
            throw Error("bad_channel_spec", "matrix must be square");
        }
        for (Eigen::Index jj = 0; jj < n; ++jj) {
            m(i, jj) = row[static_cast<std::size_t>(jj)].get<double>();
        }
    }
    return make_channel(m, beta);
}

}  // namespace semdrift
