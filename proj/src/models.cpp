#include "rex/models.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rex {

int histogram::bin_of(double x) const {
    if (mass.empty() || x < lo || x > hi) return -1;
    if (hi == lo) return 0;
    const double w = (hi - lo) / bins();
    const int b = static_cast<int>((x - lo) / w);
    return std::min(b, bins() - 1);
}

double histogram::mass_at(double x) const {
    const int b = bin_of(x);
    return b < 0 ? 0.0 : mass[static_cast<std::size_t>(b)];
}

double histogram::center(int bin) const {
    if (bin < 0 || bin >= bins()) throw index_out_of_range("histogram: bin outside range");
    if (hi == lo) return lo;
    const double w = (hi - lo) / bins();
    return lo + (bin + 0.5) * w;
}

Eigen::VectorXd gbm_path(const gbm_params& params, counter_rng rng) {
    if (params.s0 <= 0.0) throw invalid_spec({"gbm: initial value must be positive"});
    if (params.sigma < 0.0) throw invalid_spec({"gbm: volatility must be nonnegative"});
    if (params.dt <= 0.0) throw invalid_spec({"gbm: step size must be positive"});
    if (params.steps < 0) throw invalid_spec({"gbm: steps must be nonnegative"});

    Eigen::VectorXd out(params.steps + 1);
    out[0] = params.s0;
    const double loc = (params.drift - 0.5 * params.sigma * params.sigma) * params.dt;
    const double scale = params.sigma * std::sqrt(params.dt);
    for (int k = 1; k <= params.steps; ++k) {
        counter_rng step_rng = rng.split(static_cast<std::uint64_t>(k));
        out[k] = out[k - 1] * std::exp(loc + scale * step_rng.normal());
    }
    return out;
}

Eigen::MatrixXd mv_gbm_path(const mv_gbm_params& params, counter_rng rng) {
    const Eigen::Index n = params.s0.size();
    if (n < 1) throw invalid_spec({"mv gbm: needs at least one asset"});
    if (params.sigma.size() != n) throw dimension_mismatch("mv gbm: sigma size differs from s0");
    if (params.correlation.rows() != n || params.correlation.cols() != n)
        throw dimension_mismatch("mv gbm: correlation shape differs from asset count");
    Eigen::VectorXd dividend = params.dividend;
    if (dividend.size() == 0) dividend = Eigen::VectorXd::Zero(n);
    if (dividend.size() != n) throw dimension_mismatch("mv gbm: dividend size differs from s0");
    if (params.dt <= 0.0 || params.steps < 0)
        throw invalid_spec({"mv gbm: step size must be positive and steps nonnegative"});

    Eigen::LLT<Eigen::MatrixXd> llt(params.correlation);
    if (llt.info() != Eigen::Success)
        throw non_psd_correlation("mv gbm: correlation matrix has no Cholesky factor");
    const Eigen::MatrixXd chol = llt.matrixL();

    Eigen::MatrixXd out(n, params.steps + 1);
    out.col(0) = params.s0;
    const double sqrt_dt = std::sqrt(params.dt);
    for (int k = 1; k <= params.steps; ++k) {
        counter_rng step_rng = rng.split(static_cast<std::uint64_t>(k));
        Eigen::VectorXd z(n);
        for (Eigen::Index i = 0; i < n; ++i) z[i] = step_rng.normal();
        const Eigen::VectorXd corr = chol * z;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double drift = params.rate - dividend[i];
            const double loc = (drift - 0.5 * params.sigma[i] * params.sigma[i]) * params.dt;
            out(i, k) = out(i, k - 1) * std::exp(loc + params.sigma[i] * sqrt_dt * corr[i]);
        }
    }
    return out;
}

lattice_factors binomial_factors(const binomial_params& params) {
    const double step_vol = params.sigma * std::sqrt(params.dt);
    if (step_vol <= 0.0)
        throw degenerate_lattice("binomial_factors: sigma * sqrt(dt) must be positive");
    lattice_factors f;
    f.u = std::exp(step_vol);
    f.d = 1.0 / f.u;
    f.p_rn = (std::exp((params.rate - params.dividend) * params.dt) - f.d) / (f.u - f.d);
    f.arbitrage_free = f.p_rn >= 0.0 && f.p_rn <= 1.0;
    return f;
}

void validate_hmm(const hmm_spec& hmm) {
    std::vector<std::string> violations;
    const int n = hmm.n_modes;
    if (n < 1) violations.push_back("mode count must be >= 1");
    if (hmm.transition.rows() != n || hmm.transition.cols() != n) {
        violations.push_back("transition matrix shape differs from mode count");
    } else {
        for (int i = 0; i < n; ++i) {
            if (hmm.transition.row(i).minCoeff() < -1e-12) {
                violations.push_back("transition row " + std::to_string(i) + " has negative entries");
            } else if (std::abs(hmm.transition.row(i).sum() - 1.0) > 1e-12) {
                violations.push_back("transition row " + std::to_string(i) + " does not sum to one");
            }
        }
    }
    if (hmm.emission_mean.rows() != n)
        violations.push_back("emission mean row count differs from mode count");
    if (hmm.emission_noise < 0.0) violations.push_back("emission noise must be nonnegative");
    if (hmm.initial.size() != n) {
        violations.push_back("initial distribution size differs from mode count");
    } else if (hmm.initial.minCoeff() < -1e-12 || std::abs(hmm.initial.sum() - 1.0) > 1e-12) {
        violations.push_back("initial distribution is not a probability vector");
    }
    if (!violations.empty()) throw invalid_spec(std::move(violations));
}

std::pair<int, Eigen::VectorXd> hmm_step(const hmm_spec& hmm, int mode, counter_rng& rng) {
    if (mode < 0 || mode >= hmm.n_modes)
        throw index_out_of_range("hmm_step: mode outside 0..n_modes-1");
    std::vector<double> row(static_cast<std::size_t>(hmm.n_modes));
    for (int j = 0; j < hmm.n_modes; ++j) row[static_cast<std::size_t>(j)] = hmm.transition(mode, j);
    const int next = static_cast<int>(rng.categorical(row));
    Eigen::VectorXd obs = hmm.emission_mean.row(next).transpose();
    if (hmm.emission_noise > 0.0)
        for (Eigen::Index i = 0; i < obs.size(); ++i) obs[i] += hmm.emission_noise * rng.normal();
    return {next, obs};
}

belief belief_update(const hmm_spec& hmm, const belief& b, const Eigen::VectorXd& obs) {
    if (b.size() != hmm.n_modes)
        throw dimension_mismatch("belief_update: belief size differs from mode count");
    const Eigen::VectorXd predicted = hmm.transition.transpose() * b;

    Eigen::VectorXd likelihood(hmm.n_modes);
    for (int m = 0; m < hmm.n_modes; ++m) {
        const Eigen::VectorXd mean = hmm.emission_mean.row(m).transpose();
        if (mean.size() != obs.size())
            throw dimension_mismatch("belief_update: observation size differs from emissions");
        if (hmm.emission_noise > 0.0) {
            const double d2 = (obs - mean).squaredNorm();
            likelihood[m] = std::exp(-0.5 * d2 / (hmm.emission_noise * hmm.emission_noise));
        } else {
            likelihood[m] = (obs - mean).cwiseAbs().maxCoeff() <= 1e-9 ? 1.0 : 0.0;
        }
    }

    Eigen::VectorXd posterior = predicted.cwiseProduct(likelihood);
    const double total = posterior.sum();
    if (total <= 0.0)
        throw zero_likelihood("belief_update: no mode could have produced the observation");
    return posterior / total;
}

histogram price_density(const std::vector<Eigen::VectorXd>& paths, int n_bins) {
    if (n_bins < 1) throw invalid_spec({"price_density: bin count must be >= 1"});
    histogram h;
    std::size_t total = 0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& p : paths) {
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            lo = std::min(lo, p[i]);
            hi = std::max(hi, p[i]);
            ++total;
        }
    }
    if (total == 0) throw invalid_spec({"price_density: no values to pool"});
    h.lo = lo;
    h.hi = hi;
    h.mass.assign(static_cast<std::size_t>(n_bins), 0.0);
    const double unit = 1.0 / static_cast<double>(total);
    for (const auto& p : paths)
        for (Eigen::Index i = 0; i < p.size(); ++i)
            h.mass[static_cast<std::size_t>(h.bin_of(p[i]))] += unit;
    return h;
}

}  // namespace rex
