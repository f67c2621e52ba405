#include "rex/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace rex {

namespace {

double leg_intrinsic(const option_leg& leg, double price) {
    return leg.is_call ? std::max(price - leg.strike, 0.0) : std::max(leg.strike - price, 0.0);
}

}  // namespace

bool ls_result::exercise_now(const option_instance& inst, int t, double price) const {
    if (t < 1 || t > static_cast<int>(coefficients.size()))
        throw index_out_of_range("exercise rule queried outside the decision epochs");
    const double payoff = leg_intrinsic(inst.leg, price);
    if (payoff <= 0.0) return false;
    const std::size_t idx = static_cast<std::size_t>(t - 1);
    if (!fitted[idx]) return false;
    const Eigen::Vector3d& beta = coefficients[idx];
    const double continuation = beta[0] + beta[1] * price + beta[2] * price * price;
    return payoff > continuation;
}

ls_result longstaff_schwartz(const option_instance& inst, int n_paths, std::uint64_t seed) {
    validate_instance(inst);
    if (n_paths < 100)
        throw invalid_spec({"regression pricing needs at least 100 paths"});

    const int steps = inst.steps();
    gbm_params dynamics;
    dynamics.s0 = inst.leg.s0;
    dynamics.drift = inst.rate - inst.leg.dividend;
    dynamics.sigma = inst.leg.sigma;
    dynamics.dt = inst.dt;
    dynamics.steps = steps;

    Eigen::MatrixXd prices(n_paths, steps + 1);
    const counter_rng base(seed);
    for (int i = 0; i < n_paths; ++i)
        prices.row(i) = gbm_path(dynamics, base.split(static_cast<std::uint64_t>(i))).transpose();

    // cash[i] is the payoff realized at exercise step ex[i] (undiscounted).
    std::vector<double> cash(static_cast<std::size_t>(n_paths));
    std::vector<int> ex(static_cast<std::size_t>(n_paths), steps);
    for (int i = 0; i < n_paths; ++i)
        cash[static_cast<std::size_t>(i)] = leg_intrinsic(inst.leg, prices(i, steps));

    ls_result res;
    res.coefficients.assign(static_cast<std::size_t>(steps),
                            Eigen::Vector3d::Constant(std::numeric_limits<double>::quiet_NaN()));
    res.fitted.assign(static_cast<std::size_t>(steps), false);

    for (int tau = steps - 1; tau >= 0; --tau) {
        std::vector<int> itm;
        for (int i = 0; i < n_paths; ++i)
            if (leg_intrinsic(inst.leg, prices(i, tau)) > 0.0) itm.push_back(i);
        if (itm.empty()) continue;

        Eigen::VectorXd y(static_cast<Eigen::Index>(itm.size()));
        for (std::size_t j = 0; j < itm.size(); ++j) {
            const std::size_t i = static_cast<std::size_t>(itm[j]);
            y[static_cast<Eigen::Index>(j)] =
                cash[i] * std::exp(-inst.rate * (ex[i] - tau) * inst.dt);
        }

        bool fitted = false;
        Eigen::Vector3d beta = Eigen::Vector3d::Zero();
        if (itm.size() >= 3) {
            Eigen::MatrixXd x(static_cast<Eigen::Index>(itm.size()), 3);
            for (std::size_t j = 0; j < itm.size(); ++j) {
                const double s = prices(itm[j], tau);
                x(static_cast<Eigen::Index>(j), 0) = 1.0;
                x(static_cast<Eigen::Index>(j), 1) = s;
                x(static_cast<Eigen::Index>(j), 2) = s * s;
            }
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
            if (qr.rank() == 3) {
                beta = qr.solve(y);
                fitted = true;
            }
        }
        const double fallback = y.mean();
        if (fitted) {
            res.coefficients[static_cast<std::size_t>(tau)] = beta;
            res.fitted[static_cast<std::size_t>(tau)] = true;
        }

        for (int i : itm) {
            const double s = prices(i, tau);
            const double payoff = leg_intrinsic(inst.leg, s);
            const double continuation =
                fitted ? beta[0] + beta[1] * s + beta[2] * s * s : fallback;
            if (payoff > continuation) {
                cash[static_cast<std::size_t>(i)] = payoff;
                ex[static_cast<std::size_t>(i)] = tau;
            }
        }
    }

    res.exercise_time.resize(static_cast<std::size_t>(n_paths));
    double mean = 0.0;
    std::vector<double> discounted(static_cast<std::size_t>(n_paths));
    for (std::size_t i = 0; i < static_cast<std::size_t>(n_paths); ++i) {
        discounted[i] = cash[i] * std::exp(-inst.rate * ex[i] * inst.dt);
        res.exercise_time[i] = ex[i] * inst.dt;
        mean += discounted[i];
    }
    mean /= static_cast<double>(n_paths);
    double ss = 0.0;
    for (double v : discounted) ss += (v - mean) * (v - mean);
    res.price = mean;
    res.std_error = std::sqrt(ss / (n_paths - 1.0)) / std::sqrt(static_cast<double>(n_paths));
    return res;
}

namespace {

void compositions(int coords, int total, Eigen::VectorXd& current, int at,
                  std::vector<Eigen::VectorXd>& out, int denom) {
    if (at == coords - 1) {
        current[at] = static_cast<double>(total) / denom;
        out.push_back(current);
        return;
    }
    for (int take = 0; take <= total; ++take) {
        current[at] = static_cast<double>(take) / denom;
        compositions(coords, total - take, current, at + 1, out, denom);
    }
}

struct obs_group {
    std::vector<int> modes;
};

// Modes sharing a mileage row are indistinguishable to the observer.
std::vector<obs_group> group_by_emission(const Eigen::MatrixXd& mileage) {
    std::vector<obs_group> groups;
    for (int m = 0; m < mileage.rows(); ++m) {
        bool placed = false;
        for (auto& g : groups) {
            if ((mileage.row(m) - mileage.row(g.modes.front())).cwiseAbs().maxCoeff() <= 1e-9) {
                g.modes.push_back(m);
                placed = true;
                break;
            }
        }
        if (!placed) groups.push_back({{m}});
    }
    return groups;
}

}  // namespace

int belief_vi_result::nearest(const belief& b) const {
    if (grid.empty()) throw index_out_of_range("belief grid is empty");
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double d = (grid[i] - b).cwiseAbs().sum();
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

int belief_vi_result::act(const belief& b, int epochs_left) const {
    const int h = std::clamp(epochs_left, 0, sweeps);
    return policy[static_cast<std::size_t>(h)][static_cast<std::size_t>(nearest(b))];
}

double belief_vi_result::value(const belief& b, int epochs_left) const {
    const int h = std::clamp(epochs_left, 0, sweeps);
    return values[static_cast<std::size_t>(h)][nearest(b)];
}

belief_vi_result belief_value_iteration(const hybrid_instance& inst, int grid_per_edge,
                                        double discount, int max_sweeps, double tol) {
    validate_instance(inst);
    if (grid_per_edge < 2) throw invalid_spec({"belief grid needs at least two points per edge"});
    if (max_sweeps < 1) throw invalid_spec({"need at least one value sweep"});

    const int modes = static_cast<int>(inst.mileage.rows());
    const int fuels = static_cast<int>(inst.mileage.cols());
    const int g = grid_per_edge - 1;

    belief_vi_result res;
    Eigen::VectorXd scratch(modes);
    compositions(modes, g, scratch, 0, res.grid, g);
    const int points = static_cast<int>(res.grid.size());

    // Per-mode reward of committing the quantum to one fuel; braking pays 0.
    Eigen::MatrixXd reward = inst.mileage * inst.quantum;
    if (inst.braking_mode >= 0) reward.row(inst.braking_mode).setZero();

    const auto groups = group_by_emission(inst.mileage);

    // Successor mixture per grid point: (nearest next point, probability).
    std::vector<std::vector<std::pair<int, double>>> succ(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        const Eigen::VectorXd predicted = inst.transition.transpose() * res.grid[i];
        for (const auto& grp : groups) {
            double p = 0.0;
            for (int m : grp.modes) p += predicted[m];
            if (p <= 1e-15) continue;
            belief next = Eigen::VectorXd::Zero(modes);
            for (int m : grp.modes) next[m] = predicted[m] / p;
            succ[static_cast<std::size_t>(i)].push_back({res.nearest(next), p});
        }
    }

    res.values.push_back(Eigen::VectorXd::Zero(points));
    res.policy.push_back(std::vector<int>(static_cast<std::size_t>(points), 0));
    res.final_delta = std::numeric_limits<double>::infinity();

    for (int h = 1; h <= max_sweeps; ++h) {
        const Eigen::VectorXd& prev = res.values.back();
        Eigen::VectorXd cur(points);
        std::vector<int> pol(static_cast<std::size_t>(points), 0);
        for (int i = 0; i < points; ++i) {
            double future = 0.0;
            for (const auto& [j, p] : succ[static_cast<std::size_t>(i)]) future += p * prev[j];
            double best = -std::numeric_limits<double>::infinity();
            int arg = 0;
            for (int f = 0; f < fuels; ++f) {
                const double v = res.grid[static_cast<std::size_t>(i)].dot(reward.col(f)) +
                                 discount * future;
                if (v > best) {
                    best = v;
                    arg = f;
                }
            }
            cur[i] = best;
            pol[static_cast<std::size_t>(i)] = arg;
        }
        res.final_delta = (cur - prev).cwiseAbs().maxCoeff();
        res.values.push_back(std::move(cur));
        res.policy.push_back(std::move(pol));
        res.sweeps = h;
        if (res.final_delta < tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

scenario_dp_result scenario_dp_bunkering(const maritime_instance& inst, int n_scenarios,
                                         int price_bins, std::uint64_t seed) {
    validate_instance(inst);
    if (n_scenarios < 1) throw invalid_spec({"need at least one price scenario"});
    if (price_bins < 1) throw invalid_spec({"need at least one price bin"});

    const int ports = static_cast<int>(inst.route.size());
    const int fuel_max = static_cast<int>(std::floor(inst.tank_capacity + 1e-9));
    std::vector<int> legs(static_cast<std::size_t>(ports), 0);
    for (int p = 0; p + 1 < ports; ++p)
        legs[static_cast<std::size_t>(p)] = static_cast<int>(
            std::llround(inst.distance(inst.route[static_cast<std::size_t>(p)] - 1,
                                       inst.route[static_cast<std::size_t>(p) + 1] - 1)));

    gbm_params dynamics = inst.price;
    dynamics.steps = ports - 1;
    Eigen::MatrixXd prices(n_scenarios, ports);
    const counter_rng base(seed);
    for (int i = 0; i < n_scenarios; ++i)
        prices.row(i) = gbm_path(dynamics, base.split(static_cast<std::uint64_t>(i))).transpose();

    scenario_dp_result res;
    res.port_prices.reserve(static_cast<std::size_t>(ports));
    for (int p = 0; p < ports; ++p)
        res.port_prices.push_back(price_density({prices.col(p)}, price_bins));

    res.bin_transitions.assign(static_cast<std::size_t>(ports),
                               Eigen::MatrixXd::Zero(price_bins, price_bins));
    for (int p = 0; p + 1 < ports; ++p) {
        Eigen::MatrixXd& trans = res.bin_transitions[static_cast<std::size_t>(p)];
        for (int i = 0; i < n_scenarios; ++i) {
            const int a = res.port_prices[static_cast<std::size_t>(p)].bin_of(prices(i, p));
            const int b = res.port_prices[static_cast<std::size_t>(p) + 1].bin_of(prices(i, p + 1));
            if (a >= 0 && b >= 0) trans(a, b) += 1.0;
        }
        for (int r = 0; r < price_bins; ++r) {
            const double total = trans.row(r).sum();
            if (total > 0.0)
                trans.row(r) /= total;
            else
                trans.row(r).setConstant(1.0 / price_bins);
        }
    }

    const auto dims = [&](double fill) {
        return std::vector<std::vector<double>>(
            static_cast<std::size_t>(fuel_max + 1),
            std::vector<double>(static_cast<std::size_t>(price_bins), fill));
    };
    res.cost_to_go.assign(static_cast<std::size_t>(ports), dims(0.0));
    res.refuel.assign(static_cast<std::size_t>(ports),
                      std::vector<std::vector<int>>(
                          static_cast<std::size_t>(fuel_max + 1),
                          std::vector<int>(static_cast<std::size_t>(price_bins), 0)));

    for (int p = ports - 2; p >= 0; --p) {
        const int leg = legs[static_cast<std::size_t>(p)];
        const auto& next_ctg = res.cost_to_go[static_cast<std::size_t>(p) + 1];
        const Eigen::MatrixXd& trans = res.bin_transitions[static_cast<std::size_t>(p)];

        // ev(f', j) = expected next-port cost-to-go from fuel f' seen from bin j.
        std::vector<std::vector<double>> ev(
            static_cast<std::size_t>(fuel_max + 1),
            std::vector<double>(static_cast<std::size_t>(price_bins), 0.0));
        for (int f = 0; f <= fuel_max; ++f)
            for (int j = 0; j < price_bins; ++j) {
                double acc = 0.0;
                for (int j2 = 0; j2 < price_bins; ++j2)
                    acc += trans(j, j2) * next_ctg[static_cast<std::size_t>(f)][static_cast<std::size_t>(j2)];
                ev[static_cast<std::size_t>(f)][static_cast<std::size_t>(j)] = acc;
            }

        for (int f = 0; f <= fuel_max; ++f) {
            const int q_lo = std::max(0, leg - f);
            const int q_hi = fuel_max - f;
            for (int j = 0; j < price_bins; ++j) {
                const double unit = res.port_prices[static_cast<std::size_t>(p)].center(j);
                double best = std::numeric_limits<double>::infinity();
                int arg = q_lo;
                for (int q = q_lo; q <= q_hi; ++q) {
                    const int f_next = f + q - leg;
                    double cost = unit * q +
                                  ev[static_cast<std::size_t>(f_next)][static_cast<std::size_t>(j)];
                    if (q > 0) cost += inst.fixed_cost;
                    if (cost < best) {
                        best = cost;
                        arg = q;
                    }
                }
                res.cost_to_go[static_cast<std::size_t>(p)][static_cast<std::size_t>(f)]
                              [static_cast<std::size_t>(j)] = best;
                res.refuel[static_cast<std::size_t>(p)][static_cast<std::size_t>(f)]
                          [static_cast<std::size_t>(j)] = arg;
            }
        }
    }

    const int root_bin = std::max(0, res.port_prices.front().bin_of(inst.price.s0));
    res.expected_cost = res.cost_to_go[0][0][static_cast<std::size_t>(root_bin)];
    return res;
}

int scenario_dp_result::act(int port, double fuel, double price) const {
    if (port < 1 || port > static_cast<int>(refuel.size()))
        throw index_out_of_range("refuel rule queried outside the route");
    const std::size_t p = static_cast<std::size_t>(port - 1);
    const int fuel_max = static_cast<int>(refuel[p].size()) - 1;
    const int f = std::clamp(static_cast<int>(std::floor(fuel + 1e-9)), 0, fuel_max);
    const histogram& h = port_prices[p];
    int bin = h.bin_of(price);
    if (bin < 0) bin = price < h.lo ? 0 : h.bins() - 1;
    return refuel[p][static_cast<std::size_t>(f)][static_cast<std::size_t>(bin)];
}

}  // namespace rex
