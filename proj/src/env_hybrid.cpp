#include "rex/env_hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace rex {

namespace {

constexpr double kTol = 1e-9;

// Largest reward obtainable by splitting `budget` across fuels at the given
// per-fuel rates, respecting per-fuel caps. Returns the split.
Eigen::VectorXd greedy_split(const Eigen::VectorXd& rates, const Eigen::VectorXd& caps,
                             double budget) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(rates.size());
    std::vector<int> order(static_cast<std::size_t>(rates.size()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (rates[a] != rates[b]) return rates[a] > rates[b];
        return a < b;
    });
    double left = budget;
    for (int i : order) {
        if (left <= kTol) break;
        const double take = std::min(left, caps[i]);
        out[i] = take;
        left -= take;
    }
    return out;
}

}  // namespace

void validate_instance(const hybrid_instance& inst) {
    std::vector<std::string> violations;
    const int modes = static_cast<int>(inst.mileage.rows());
    const int fuels = static_cast<int>(inst.mileage.cols());
    if (modes < 1) violations.push_back("need at least one mode");
    if (fuels != 2) violations.push_back("exactly two fuel coordinates are supported");
    if (inst.mileage.size() > 0 && inst.mileage.minCoeff() < 0.0)
        violations.push_back("negative mileage entry");
    if (inst.transition.rows() != modes || inst.transition.cols() != modes) {
        violations.push_back("transition matrix shape does not match the mode count");
    } else {
        for (int m = 0; m < modes; ++m) {
            if (inst.transition.row(m).minCoeff() < 0.0)
                violations.push_back("negative transition probability in row " + std::to_string(m));
            if (std::abs(inst.transition.row(m).sum() - 1.0) > 1e-9)
                violations.push_back("transition row " + std::to_string(m) + " does not sum to 1");
        }
    }
    if (inst.horizon < 1) violations.push_back("horizon must be at least 1");
    if (inst.quantum <= 0.0) violations.push_back("consumption quantum must be positive");
    if (inst.brake_gain < 0.0) violations.push_back("negative brake gain");
    if (inst.braking_mode < -1 || inst.braking_mode >= modes)
        violations.push_back("braking mode outside the mode set");
    if (inst.battery_coordinate < 0 || inst.battery_coordinate >= fuels)
        violations.push_back("battery coordinate outside the fuel set");
    if (inst.capacity0.size() != 0) {
        if (inst.capacity0.size() != fuels)
            violations.push_back("initial capacity length does not match the fuel count");
        else if (inst.capacity0.minCoeff() < 0.0)
            violations.push_back("negative initial capacity");
    }
    if (inst.initial_mode_dist.size() != 0) {
        if (inst.initial_mode_dist.size() != modes)
            violations.push_back("initial mode distribution length does not match the mode count");
        else if (inst.initial_mode_dist.minCoeff() < 0.0 ||
                 std::abs(inst.initial_mode_dist.sum() - 1.0) > 1e-9)
            violations.push_back("initial mode distribution is not a probability vector");
    }
    if (!violations.empty()) throw invalid_spec(violations);
}

hybrid_env::hybrid_env(hybrid_instance inst) : inst_(std::move(inst)) {
    validate_instance(inst_);
}

Eigen::VectorXd hybrid_env::full_capacity() const {
    if (inst_.capacity0.size() != 0) return inst_.capacity0;
    return Eigen::VectorXd::Constant(dimension(), 0.6 * inst_.horizon * inst_.quantum);
}

int hybrid_env::mode_of_context(const Eigen::VectorXd& context) const {
    const int fuels = dimension();
    if (context.size() != fuels + 1)
        throw dimension_mismatch("hybrid: context must carry the mileage row plus the mode");
    const int mode = static_cast<int>(std::llround(context[fuels]));
    if (mode < 0 || mode >= static_cast<int>(inst_.mileage.rows()))
        throw index_out_of_range("hybrid: context names mode " + std::to_string(mode));
    return mode;
}

state hybrid_env::initial_state(counter_rng& rng) const {
    const int modes = static_cast<int>(inst_.mileage.rows());
    std::vector<double> weights(static_cast<std::size_t>(modes), 1.0);
    if (inst_.initial_mode_dist.size() != 0)
        for (int m = 0; m < modes; ++m) weights[static_cast<std::size_t>(m)] = inst_.initial_mode_dist[m];
    const int mode = static_cast<int>(rng.categorical(weights));

    state s;
    s.t = 1;
    s.tag = mode;
    s.context = Eigen::VectorXd(dimension() + 1);
    s.context.head(dimension()) = inst_.mileage.row(mode).transpose();
    s.context[dimension()] = mode;
    s.capacity = full_capacity();
    return s;
}

action_window hybrid_env::window(const state& s) const {
    if (braking(s.tag)) return action_window{};  // zero point window
    return window_at(s.t, s.consumed, s.capacity);
}

action_window hybrid_env::window_at(int t, double consumed,
                                    const Eigen::VectorXd& capacity) const {
    (void)consumed;
    if (t < 1 || t > horizon())
        throw index_out_of_range("hybrid: window requested outside the episode");
    action_window w;
    w.lower = inst_.quantum;
    w.upper = std::min(inst_.quantum, capacity.sum());
    w.path_lower = w.lower;
    w.path_upper = w.upper;
    w.feasible = w.lower <= w.upper + 1e-12;
    return w;
}

action_pair hybrid_env::extremes_at(int t, const Eigen::VectorXd& context,
                                    const action_window& window,
                                    const Eigen::VectorXd& capacity) const {
    (void)t;
    if (!window.feasible)
        throw infeasible_window("hybrid: remaining fuel cannot cover the consumption quantum");
    const Eigen::VectorXd rates = context.head(dimension());
    action_pair pair;
    pair.at_upper = greedy_split(rates, capacity, window.upper);
    pair.at_lower = greedy_split(rates, capacity, window.lower);
    pair.reward_at_upper = rates.dot(pair.at_upper);
    pair.reward_at_lower = rates.dot(pair.at_lower);
    return pair;
}

double hybrid_env::consumption_of(int t, const Eigen::VectorXd& context,
                                  const action_vector& action) const {
    (void)t;
    (void)context;
    return action.cwiseAbs().sum();
}

Eigen::VectorXd hybrid_env::capacity_after(int t, const Eigen::VectorXd& capacity,
                                           const Eigen::VectorXd& context,
                                           const action_vector& action) const {
    (void)t;
    Eigen::VectorXd cap = (capacity - action).cwiseMax(0.0);
    if (inst_.braking_mode >= 0 && mode_of_context(context) == inst_.braking_mode) {
        const int b = inst_.battery_coordinate;
        cap[b] = std::min(cap[b] + inst_.brake_gain, full_capacity()[b]);
    }
    return cap;
}

std::vector<action_vector> hybrid_env::actions(const state& s) const {
    const int fuels = dimension();
    if (braking(s.tag)) return {Eigen::VectorXd::Zero(fuels)};

    std::vector<action_vector> out;
    for (int f = 0; f < fuels; ++f) {
        if (s.capacity[f] >= inst_.quantum - kTol) {
            Eigen::VectorXd a = Eigen::VectorXd::Zero(fuels);
            a[f] = inst_.quantum;
            out.push_back(std::move(a));
        }
    }
    if (out.empty()) {
        const action_window w = window(s);
        out.push_back(greedy_split(s.context.head(fuels), s.capacity, w.upper));
    }
    return out;
}

double hybrid_env::reward(const state& s, const action_vector& action) const {
    return s.context.head(dimension()).dot(action);
}

std::optional<std::vector<weighted_state>> hybrid_env::successors(
    const state& s, const action_vector& action) const {
    state base;
    base.t = s.t + 1;
    base.capacity = capacity_after(s.t, s.capacity, s.context, action);
    base.consumed = s.consumed + consumption_of(s.t, s.context, action);

    std::vector<weighted_state> out;
    if (s.t >= horizon()) {
        base.context = s.context;
        base.tag = s.tag;
        out.push_back({std::move(base), 1.0});
        return out;
    }
    const int modes = static_cast<int>(inst_.mileage.rows());
    for (int m = 0; m < modes; ++m) {
        const double p = inst_.transition(s.tag, m);
        if (p <= 0.0) continue;
        state next = base;
        next.tag = m;
        next.context = Eigen::VectorXd(dimension() + 1);
        next.context.head(dimension()) = inst_.mileage.row(m).transpose();
        next.context[dimension()] = m;
        out.push_back({std::move(next), p});
    }
    return out;
}

state hybrid_env::sample_next(const state& s, const action_vector& action,
                              counter_rng& rng) const {
    const auto children = successors(s, action);
    std::vector<double> weights(children->size());
    for (std::size_t i = 0; i < children->size(); ++i) weights[i] = (*children)[i].prob;
    return (*children)[rng.categorical(weights)].next;
}

std::vector<Eigen::VectorXd> hybrid_env::sample_context_suffix(const state& s,
                                                               counter_rng& rng) const {
    std::vector<Eigen::VectorXd> out;
    if (s.t > horizon()) return out;
    out.push_back(s.context);
    const int modes = static_cast<int>(inst_.mileage.rows());
    int mode = s.tag;
    std::vector<double> weights(static_cast<std::size_t>(modes));
    for (int t = s.t + 1; t <= horizon(); ++t) {
        for (int m = 0; m < modes; ++m) weights[static_cast<std::size_t>(m)] = inst_.transition(mode, m);
        mode = static_cast<int>(rng.categorical(weights));
        Eigen::VectorXd ctx(dimension() + 1);
        ctx.head(dimension()) = inst_.mileage.row(mode).transpose();
        ctx[dimension()] = mode;
        out.push_back(std::move(ctx));
    }
    return out;
}

double hybrid_env::hindsight_value_at(const state& s,
                                      const std::vector<Eigen::VectorXd>& realized) const {
    if (s.t > horizon() || realized.empty()) return 0.0;
    const int b = inst_.battery_coordinate;
    const int g = 1 - b;

    // Pin the mode sequence, relax regeneration timing: all braking epochs
    // contribute their charge up front. What remains is one two-resource
    // assignment over the driving epochs, solved exactly by sorting the
    // battery-minus-gas mileage differences.
    double base = 0.0;
    double battery = s.capacity[b];
    std::vector<double> deltas;
    for (const auto& ctx : realized) {
        const int mode = mode_of_context(ctx);
        if (braking(mode)) {
            battery += inst_.brake_gain;
            continue;
        }
        base += ctx[g] * inst_.quantum;
        deltas.push_back(ctx[b] - ctx[g]);
    }
    const double n = static_cast<double>(deltas.size());
    const double need = n * inst_.quantum;
    const double lo = std::max(0.0, need - s.capacity[g]);
    const double hi = std::min(battery, need);
    if (lo > hi + kTol)
        throw no_feasible_allocation("hybrid: driving epochs exceed the combined fuel budget");

    std::sort(deltas.begin(), deltas.end(), std::greater<>());
    double total = 0.0;
    double gain = 0.0;
    for (double d : deltas) {
        double take = 0.0;
        if (d > 0.0 && total < hi)
            take = std::min(inst_.quantum, hi - total);
        else if (total < lo)
            take = std::min(inst_.quantum, lo - total);
        gain += d * take;
        total += take;
    }
    return base + gain;
}

double hybrid_env::anticipative_value_at(const state& s,
                                         const std::vector<Eigen::VectorXd>& means) const {
    (void)means;
    if (s.t > horizon()) return 0.0;
    const int modes = static_cast<int>(inst_.mileage.rows());
    const int fuels = dimension();

    // Deterministic counterpart on the analytic mode distribution: each epoch
    // consumes the quantum scaled by its driving probability, at the mean
    // driving mileage, from the initial budgets alone (no regeneration).
    Eigen::VectorXd p = Eigen::VectorXd::Zero(modes);
    p[s.tag] = 1.0;
    Eigen::VectorXd caps = s.capacity;
    double value = 0.0;
    for (int t = s.t; t <= horizon(); ++t) {
        double p_drive = 0.0;
        Eigen::VectorXd rates = Eigen::VectorXd::Zero(fuels);
        for (int m = 0; m < modes; ++m) {
            if (braking(m)) continue;
            p_drive += p[m];
            rates += p[m] * inst_.mileage.row(m).transpose();
        }
        if (p_drive > kTol) {
            rates /= p_drive;
            const double budget = std::min(inst_.quantum * p_drive, caps.sum());
            const Eigen::VectorXd a = greedy_split(rates, caps, budget);
            value += rates.dot(a);
            caps -= a;
        }
        p = inst_.transition.transpose() * p;
    }
    return value;
}

}  // namespace rex
