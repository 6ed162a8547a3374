#pragma once
// Discrete-alphabet model of a recursive generation channel: stochastic
// matrix iteration, stationary distribution and spectral gap, entropy
// relaxation, mutual-information monotonicity, Fisher-information decay,
// and the entropy-margin horizon.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "semdrift/common.hpp"
#include "semdrift/stats.hpp"

namespace semdrift {

struct ChannelModel {
    Eigen::MatrixXd transition;  // row-stochastic: M(i, j) = P(next=j | i)
    double beta = 1.0;           // sharpening exponent for the nonlinear mode

    std::size_t n() const { return static_cast<std::size_t>(transition.rows()); }
};

// Validates row sums within 1e-12 and non-negative entries.
ChannelModel make_channel(const Eigen::MatrixXd& transition, double beta = 1.0);

// p' proportional to p^beta; beta = 1 is the identity map.
Eigen::VectorXd sharpen(const Eigen::VectorXd& p, double beta);

double shannon_entropy(const Eigen::VectorXd& p);  // natural log

enum class IterationMode { Linear, Sharpened };

// P_{t+1} = P_t M (linear) or sharpen(P_t M, beta). Returns P_0 .. P_T,
// each renormalized to sum 1 within 1e-12.
std::vector<Eigen::VectorXd> iterate(const ChannelModel& channel,
                                     const Eigen::VectorXd& p0, int steps,
                                     IterationMode mode = IterationMode::Linear);

struct StationaryResult {
    Eigen::VectorXd stationary;
    double spectral_gap = 0.0;    // 1 - |lambda_2|
    double lambda2_modulus = 0.0;
    double lambda3_modulus = 0.0;
};

// Requires ergodicity (irreducible and aperiodic, checked on the positive-
// entry graph); throws "no unique stationary distribution" otherwise.
StationaryResult stationary_and_gap(const ChannelModel& channel);

bool is_irreducible(const Eigen::MatrixXd& transition);
bool is_aperiodic(const Eigen::MatrixXd& transition);

struct EntropyTrajectory {
    std::vector<double> entropy;   // H(P_t), t = 0..T
    double h_stationary = 0.0;     // H(P*)
    double gamma_fit = 0.0;        // fitted relaxation rate
    double h_limit_fit = 0.0;      // fitted asymptote
    double r_squared = 0.0;
    double spectral_gap = 0.0;     // 1 - |lambda_2| prediction
    bool fit_ok = false;
};

// Shannon entropies of the iterated distributions plus an exponential
// relaxation fit |H_t - H*| ~ e^{-gamma t} performed through the shared
// saturating-exponential fitter.
EntropyTrajectory entropy_trajectory_and_fit(const ChannelModel& channel,
                                             const Eigen::VectorXd& p0,
                                             int steps);

struct DpiResult {
    std::vector<double> mutual_information;  // I(S_0; S_t), t = 0..T
    bool non_increasing = true;
    double max_violation = 0.0;  // largest positive step within tolerance
};

// Joint P(S_0 = i, S_t = j) = P_0(i) (M^t)_{ij}; exact mutual information.
DpiResult dpi_check(const ChannelModel& channel, const Eigen::VectorXd& p0,
                    int steps, double tolerance = 1e-12);

struct FisherDecay {
    std::vector<double> information;  // I(theta; t), t = 0..T
    double eta_hat = 0.0;             // fitted per-step decay factor
    bool any_skipped = false;         // mass below threshold at some state
};

// Fisher information of the iterated family P_t(theta) at theta0 via central
// finite differences (step h). States with mass below 1e-12 are skipped and
// flagged.
FisherDecay fisher_decay(
    const std::function<Eigen::VectorXd(double)>& initial_family,
    double theta0, const ChannelModel& channel, int steps, double h = 1e-5);

struct HorizonResult {
    double t_star = 0.0;
    bool clamped = false;  // initial margin at or below the floor
};

// T* = (1/gamma) ln((H0 - Hstar) / dH_threshold).
HorizonResult creativity_horizon(double h0, double h_star, double gamma,
                                 double dh_threshold);

// JSON-driven channel construction for the CLI (schema documented in the
// README): {"n": int, "matrix": [[..]], "beta": optional double} or
// {"preset": "two_state", "a": .., "b": ..}.
ChannelModel channel_from_json(const std::string& json_text);

}  // namespace semdrift
