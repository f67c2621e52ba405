#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "rex/errors.hpp"
#include "rex/rng.hpp"

namespace rex {

struct gbm_params {
    double s0 = 1.0;
    double drift = 0.0;
    double sigma = 0.0;
    double dt = 1.0;
    int steps = 1;
};

struct mv_gbm_params {
    Eigen::VectorXd s0;
    double rate = 0.0;           // shared risk-free drift
    Eigen::VectorXd dividend;    // per-asset continuous yield (empty = zero)
    Eigen::VectorXd sigma;
    Eigen::MatrixXd correlation;
    double dt = 1.0;
    int steps = 1;
};

struct binomial_params {
    double s0 = 1.0;
    double strike = 1.0;
    double sigma = 0.0;
    double rate = 0.0;
    double dividend = 0.0;
    double dt = 1.0;
    int steps = 1;
};

// Up/down factors and the risk-neutral up probability. arbitrage_free flags
// whether p_rn landed inside [0, 1]; callers decide how to treat violations.
struct lattice_factors {
    double u = 1.0;
    double d = 1.0;
    double p_rn = 0.5;
    bool arbitrage_free = true;
};

struct hmm_spec {
    int n_modes = 0;
    Eigen::MatrixXd transition;     // rows sum to one
    Eigen::MatrixXd emission_mean;  // one row per mode
    double emission_noise = 0.0;    // stddev of additive Gaussian noise; 0 = noiseless
    Eigen::VectorXd initial;
};

using belief = Eigen::VectorXd;

// Equal-width histogram over the pooled values; masses sum to one and are
// zero outside [lo, hi].
struct histogram {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> mass;

    [[nodiscard]] int bins() const { return static_cast<int>(mass.size()); }
    [[nodiscard]] int bin_of(double x) const;
    [[nodiscard]] double mass_at(double x) const;
    [[nodiscard]] double center(int bin) const;
};

// Simulates S_{k+1} = S_k * exp((drift - sigma^2/2) dt + sigma sqrt(dt) Z).
// Returns steps+1 values; element 0 is s0. Draws are keyed on the step index.
Eigen::VectorXd gbm_path(const gbm_params& params, counter_rng rng);

// Correlated risk-neutral paths, one row per asset, steps+1 columns. Per-asset
// drift is rate - dividend[i]. Throws non_psd_correlation when the correlation
// matrix has no Cholesky factor.
Eigen::MatrixXd mv_gbm_path(const mv_gbm_params& params, counter_rng rng);

// u = exp(sigma sqrt(dt)), d = 1/u, p_rn = (exp((rate - dividend) dt) - d) / (u - d).
// Throws degenerate_lattice when sigma sqrt(dt) == 0.
lattice_factors binomial_factors(const binomial_params& params);

// Samples the successor mode and its emission.
std::pair<int, Eigen::VectorXd> hmm_step(const hmm_spec& hmm, int mode, counter_rng& rng);

// One Bayes step: predict through the transition, weight by the emission
// likelihood of obs, renormalize. Throws zero_likelihood when no mode could
// have produced obs.
belief belief_update(const hmm_spec& hmm, const belief& b, const Eigen::VectorXd& obs);

// Pools every value of every path into an equal-width histogram.
histogram price_density(const std::vector<Eigen::VectorXd>& paths, int n_bins);

// Validation helpers shared by the config loaders.
void validate_hmm(const hmm_spec& hmm);

}  // namespace rex
