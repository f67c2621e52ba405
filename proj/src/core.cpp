#include "rex/core.hpp"

#include <algorithm>
#include <numeric>

namespace rex {

namespace {

constexpr double kTinyWeight = 1e-12;

bool is_diagonal(const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (i != j && std::abs(m(i, j)) > 1e-12) return false;
    return true;
}

double admissibility_tol(double bound) {
    return 1e-9 + 1e-12 * std::abs(bound);
}

// Allocates total consumption across coordinates to maximize sum of
// rate[i] * c[i] subject to lp_norm(c, p) == total, 0 <= c <= cap.
// For p == 1 this is the fractional knapsack greedy; for p > 1 the
// unconstrained optimum weights coordinates by rate^(1/(p-1)) and caps are
// handled by fixing saturated coordinates and re-solving on the rest.
Eigen::VectorXd allocate_consumption(const Eigen::VectorXd& rate, const Eigen::VectorXd& cap,
                                     const std::vector<bool>& usable, double total, double p) {
    const Eigen::Index d = rate.size();
    Eigen::VectorXd c = Eigen::VectorXd::Zero(d);
    if (total <= 0.0) return c;

    std::vector<Eigen::Index> order;
    for (Eigen::Index i = 0; i < d; ++i)
        if (usable[static_cast<std::size_t>(i)]) order.push_back(i);
    if (order.empty()) throw infeasible_window("extreme_actions: no coordinate can carry consumption");

    if (p == 1.0) {
        std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
            if (rate[a] != rate[b]) return rate[a] > rate[b];
            return a < b;
        });
        double remaining = total;
        for (Eigen::Index i : order) {
            const double take = std::min(remaining, cap[i]);
            c[i] = take;
            remaining -= take;
            if (remaining <= 1e-15 * (1.0 + total)) return c;
        }
        throw infeasible_window("extreme_actions: per-coordinate capacity cannot carry the window");
    }

    const double best_rate = rate(order.front());
    double max_rate = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i : order) max_rate = std::max(max_rate, rate[i]);
    (void)best_rate;

    if (max_rate <= 0.0) {
        // Nothing pays: route everything through the least costly coordinates.
        std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
            if (rate[a] != rate[b]) return rate[a] > rate[b];
            return a < b;
        });
        double norm_left_p = std::pow(total, p);
        for (Eigen::Index i : order) {
            const double take = std::min(std::pow(norm_left_p, 1.0 / p), cap[i]);
            c[i] = take;
            norm_left_p -= std::pow(take, p);
            if (norm_left_p <= 1e-15) return c;
        }
        throw infeasible_window("extreme_actions: per-coordinate capacity cannot carry the window");
    }

    std::vector<bool> fixed(static_cast<std::size_t>(d), false);
    double norm_budget_p = std::pow(total, p);
    for (int pass = 0; pass < static_cast<int>(order.size()) + 1; ++pass) {
        double denom = 0.0;
        for (Eigen::Index i : order) {
            if (fixed[static_cast<std::size_t>(i)]) continue;
            const double r = std::max(rate[i], 0.0);
            denom += std::pow(r, p / (p - 1.0));
        }
        if (denom <= 0.0) break;
        const double scale = std::pow(norm_budget_p / denom, 1.0 / p);
        bool newly_fixed = false;
        for (Eigen::Index i : order) {
            if (fixed[static_cast<std::size_t>(i)]) continue;
            const double r = std::max(rate[i], 0.0);
            const double want = scale * std::pow(r, 1.0 / (p - 1.0));
            if (want > cap[i] + 1e-15) {
                c[i] = cap[i];
                fixed[static_cast<std::size_t>(i)] = true;
                norm_budget_p -= std::pow(cap[i], p);
                newly_fixed = true;
            } else {
                c[i] = want;
            }
        }
        if (!newly_fixed) return c;
        if (norm_budget_p <= 0.0) return c;
    }
    return c;
}

}  // namespace

void validate_spec(const problem_spec& spec) {
    std::vector<std::string> violations;
    const int d = spec.dimension;

    if (d < 1) violations.push_back("dimension must be >= 1");
    if (spec.horizon < 1) violations.push_back("horizon must be >= 1");
    if (!(spec.norm_p >= 1.0)) violations.push_back("norm order must be >= 1");

    if (spec.reward_scale.rows() != d || spec.reward_scale.cols() != d) {
        violations.push_back("reward scale has wrong shape");
    } else {
        if (!spec.reward_scale.isApprox(spec.reward_scale.transpose(), 1e-9)) {
            violations.push_back("reward scale is not symmetric");
        } else {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(spec.reward_scale);
            if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() < -1e-9)
                violations.push_back("reward scale is not positive semidefinite");
        }
    }

    if (spec.consumption_scale.rows() != d || spec.consumption_scale.cols() != d) {
        violations.push_back("consumption scale has wrong shape");
    } else {
        for (int i = 0; i < d; ++i)
            if (spec.consumption_scale(i, i) > 1e-12) {
                violations.push_back("consumption scale must oppose the reward direction (nonpositive diagonal)");
                break;
            }
    }

    if (spec.utility_map.dimension() != d) violations.push_back("utility map arity differs from dimension");
    if (spec.consumption_map.dimension() != d) violations.push_back("consumption map arity differs from dimension");

    if (!spec.increment_lower || !spec.increment_upper) {
        violations.push_back("increment schedules missing");
    } else {
        for (int t = 1; t <= spec.horizon; ++t) {
            const double lo = spec.increment_lower(t);
            const double hi = spec.increment_upper(t);
            if (lo < 0.0) {
                violations.push_back("increment floor negative at epoch " + std::to_string(t));
                break;
            }
            if (lo > hi + 1e-12) {
                violations.push_back("increment floor exceeds ceiling at epoch " + std::to_string(t));
                break;
            }
        }
    }

    if (spec.total_lower < 0.0) violations.push_back("cumulative floor negative");
    if (spec.total_lower > spec.total_upper + 1e-12)
        violations.push_back("cumulative floor exceeds cumulative ceiling");

    if (spec.natural_drift) {
        if (spec.natural_drift(1).size() != d) violations.push_back("drift vector has wrong size");
    }

    if (!violations.empty()) throw invalid_spec(std::move(violations));
}

double reward(const problem_spec& spec, const Eigen::Ref<const Eigen::VectorXd>& context,
              const Eigen::Ref<const Eigen::VectorXd>& action) {
    if (context.size() != spec.dimension || action.size() != spec.dimension)
        throw dimension_mismatch("reward: context/action size differs from spec dimension");
    return (spec.reward_scale * spec.utility_map(context)).dot(action);
}

Eigen::VectorXd consumption_delta(const problem_spec& spec,
                                  const Eigen::Ref<const Eigen::VectorXd>& context,
                                  const Eigen::Ref<const Eigen::VectorXd>& action) {
    if (context.size() != spec.dimension || action.size() != spec.dimension)
        throw dimension_mismatch("consumption: context/action size differs from spec dimension");
    return spec.consumption_scale * spec.consumption_map(context).cwiseProduct(action).eval();
}

double consumption(const problem_spec& spec, const Eigen::Ref<const Eigen::VectorXd>& context,
                   const Eigen::Ref<const Eigen::VectorXd>& action) {
    return lp_norm(consumption_delta(spec, context, action), spec.norm_p);
}

action_window admissible_window(const problem_spec& spec, int t, double consumed,
                                const Eigen::Ref<const Eigen::VectorXd>& capacity) {
    action_window w;
    double future_floor = 0.0;
    double future_ceiling = 0.0;
    for (int i = t + 1; i <= spec.horizon; ++i) {
        future_floor += spec.increment_lower(i);
        future_ceiling += spec.increment_upper(i);
    }
    // Consumption the endpoint constraint still forces now (everything later
    // epochs cannot absorb) and the most it can still tolerate now.
    w.path_lower = spec.total_lower - consumed - future_ceiling;
    w.path_upper = spec.total_upper - consumed - future_floor;
    w.lower = std::max(w.path_lower, spec.increment_lower(t));
    w.upper = std::min({w.path_upper, lp_norm(capacity, spec.norm_p), spec.increment_upper(t)});
    w.feasible = w.lower <= w.upper + 1e-12;
    return w;
}

action_pair extreme_actions(const problem_spec& spec, const action_window& window,
                            const Eigen::Ref<const Eigen::VectorXd>& context) {
    const Eigen::VectorXd unbounded =
        Eigen::VectorXd::Constant(spec.dimension, std::numeric_limits<double>::infinity());
    return extreme_actions(spec, window, context, unbounded);
}

action_pair extreme_actions(const problem_spec& spec, const action_window& window,
                            const Eigen::Ref<const Eigen::VectorXd>& context,
                            const Eigen::Ref<const Eigen::VectorXd>& capacity) {
    if (!window.feasible)
        throw infeasible_window("extreme_actions: window is infeasible");
    if (context.size() != spec.dimension)
        throw dimension_mismatch("extreme_actions: context size differs from spec dimension");
    if (!is_diagonal(spec.consumption_scale))
        throw error("extreme_actions: consumption scale must be diagonal");

    const Eigen::VectorXd reward_rate = spec.reward_scale * spec.utility_map(context);
    const Eigen::VectorXd cons_rate = spec.consumption_map(context);

    const Eigen::Index d = spec.dimension;
    Eigen::VectorXd weight(d);  // consumption per unit of action, per coordinate
    std::vector<bool> usable(static_cast<std::size_t>(d), false);
    Eigen::VectorXd ratio = Eigen::VectorXd::Zero(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        weight[i] = std::abs(spec.consumption_scale(i, i) * cons_rate[i]);
        if (weight[i] > kTinyWeight) {
            usable[static_cast<std::size_t>(i)] = true;
            ratio[i] = reward_rate[i] / weight[i];
        }
    }

    auto solve_level = [&](double level) {
        action_vector a = action_vector::Zero(d);
        if (level <= 0.0) return std::make_pair(a, 0.0);
        const Eigen::VectorXd c =
            allocate_consumption(ratio, capacity, usable, level, spec.norm_p);
        double value = 0.0;
        for (Eigen::Index i = 0; i < d; ++i) {
            if (c[i] > 0.0) {
                a[i] = c[i] / weight[i];
                value += reward_rate[i] * a[i];
            }
        }
        return std::make_pair(a, value);
    };

    action_pair pair;
    auto [hi_a, hi_v] = solve_level(window.upper);
    auto [lo_a, lo_v] = solve_level(window.lower);
    pair.at_upper = std::move(hi_a);
    pair.reward_at_upper = hi_v;
    pair.at_lower = std::move(lo_a);
    pair.reward_at_lower = lo_v;
    return pair;
}

state step(const problem_spec& spec, const state& s,
           const Eigen::Ref<const Eigen::VectorXd>& action,
           const Eigen::Ref<const Eigen::VectorXd>& next_context) {
    if (s.t < 1 || s.t > spec.horizon)
        throw inadmissible_action("step: epoch outside 1..horizon");

    const action_window window = admissible_window(spec, s.t, s.consumed, s.capacity);
    const double used = consumption(spec, s.context, action);
    if (!window.feasible)
        throw inadmissible_action("step: window infeasible at epoch " + std::to_string(s.t));
    if (used < window.lower - admissibility_tol(window.lower) ||
        used > window.upper + admissibility_tol(window.upper))
        throw inadmissible_action("step: consumption outside the admissible window");

    state next;
    next.t = s.t + 1;
    next.context = next_context;
    next.consumed = s.consumed + used;
    next.tag = s.tag;

    Eigen::VectorXd cap = s.capacity + consumption_delta(spec, s.context, action);
    if (spec.natural_drift) cap += spec.natural_drift(s.t);
    for (Eigen::Index i = 0; i < cap.size(); ++i) {
        if (cap[i] < -1e-9)
            throw capacity_underflow("step: capacity coordinate " + std::to_string(i) +
                                     " driven below zero");
        if (cap[i] < 0.0) cap[i] = 0.0;
    }
    next.capacity = std::move(cap);
    return next;
}

}  // namespace rex
