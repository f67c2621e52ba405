#include "rex/env_options.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace rex {

namespace {

double intrinsic(const option_leg& leg, double price) {
    return leg.is_call ? std::max(price - leg.strike, 0.0) : std::max(leg.strike - price, 0.0);
}

double step_price(double price, const option_leg& leg, double rate, double dt,
                  counter_rng& rng) {
    const double drift = rate - leg.dividend;
    const double loc = (drift - 0.5 * leg.sigma * leg.sigma) * dt;
    return price * std::exp(loc + leg.sigma * std::sqrt(dt) * rng.normal());
}

void check_leg(const option_leg& leg, const std::string& label,
               std::vector<std::string>& violations) {
    if (leg.s0 <= 0.0) violations.push_back(label + ": spot must be positive");
    if (leg.strike < 0.0) violations.push_back(label + ": negative strike");
    if (leg.sigma < 0.0) violations.push_back(label + ": negative volatility");
    if (leg.dividend < 0.0) violations.push_back(label + ": negative dividend yield");
}

void check_grid(double maturity, double dt, std::vector<std::string>& violations) {
    if (maturity <= 0.0) violations.push_back("maturity must be positive");
    if (dt <= 0.0) {
        violations.push_back("decision interval must be positive");
        return;
    }
    const double steps = std::llround(maturity / dt);
    if (steps < 1.0 || std::abs(maturity - steps * dt) > 1e-9)
        violations.push_back("decision interval does not divide the maturity");
}

}  // namespace

int option_instance::steps() const { return static_cast<int>(std::llround(maturity / dt)); }
int basket_instance::steps() const { return static_cast<int>(std::llround(maturity / dt)); }

void validate_instance(const option_instance& inst) {
    std::vector<std::string> violations;
    check_leg(inst.leg, "leg", violations);
    check_grid(inst.maturity, inst.dt, violations);
    if (!violations.empty()) throw invalid_spec(violations);
}

void validate_instance(const basket_instance& inst) {
    std::vector<std::string> violations;
    if (inst.legs.empty()) violations.push_back("basket has no legs");
    for (std::size_t i = 0; i < inst.legs.size(); ++i)
        check_leg(inst.legs[i], "leg " + std::to_string(i + 1), violations);
    check_grid(inst.maturity, inst.dt, violations);
    if (inst.exercise_cap < 1) violations.push_back("exercise cap must be at least 1");
    if (!violations.empty()) throw invalid_spec(violations);
}

options_env::options_env(option_instance inst) : inst_(inst) { validate_instance(inst_); }

double options_env::discounted_payoff(int t, double price) const {
    return std::exp(-inst_.rate * (t - 1) * inst_.dt) * intrinsic(inst_.leg, price);
}

state options_env::initial_state(counter_rng& rng) const {
    (void)rng;
    state s;
    s.t = 1;
    s.context = Eigen::VectorXd::Constant(1, inst_.leg.s0);
    s.capacity = Eigen::VectorXd::Ones(1);
    return s;
}

bool options_env::is_terminal(const state& s) const { return s.t > horizon() || s.tag == 1; }

action_window options_env::window_at(int t, double consumed,
                                     const Eigen::VectorXd& capacity) const {
    (void)consumed;
    if (t < 1 || t > horizon())
        throw index_out_of_range("options: window requested outside the episode");
    action_window w;
    if (capacity[0] < 0.5) return w;  // dead leg, nothing to decide
    w.upper = 1.0;
    if (t == horizon()) w.lower = 1.0;  // maturity settles the leg
    w.path_lower = w.lower;
    w.path_upper = w.upper;
    return w;
}

action_pair options_env::extremes_at(int t, const Eigen::VectorXd& context,
                                     const action_window& window,
                                     const Eigen::VectorXd& capacity) const {
    (void)capacity;
    if (!window.feasible) throw infeasible_window("options: infeasible exercise window");
    const double payoff = discounted_payoff(t, context[0]);
    action_pair pair;
    pair.at_upper = Eigen::VectorXd::Constant(1, window.upper);
    pair.at_lower = Eigen::VectorXd::Constant(1, window.lower);
    pair.reward_at_upper = window.upper * payoff;
    pair.reward_at_lower = window.lower * payoff;
    return pair;
}

double options_env::consumption_of(int t, const Eigen::VectorXd& context,
                                   const action_vector& action) const {
    (void)t;
    (void)context;
    return action.cwiseAbs().sum();
}

Eigen::VectorXd options_env::capacity_after(int t, const Eigen::VectorXd& capacity,
                                            const Eigen::VectorXd& context,
                                            const action_vector& action) const {
    (void)t;
    (void)context;
    return (capacity - action).cwiseMax(0.0);
}

double options_env::reward(const state& s, const action_vector& action) const {
    if (action[0] > 1e-12 && s.capacity[0] < 0.5)
        throw exercise_of_dead_leg("options: exercise requested on a settled leg");
    return action[0] * discounted_payoff(s.t, s.context[0]);
}

state options_env::sample_next(const state& s, const action_vector& action,
                               counter_rng& rng) const {
    const bool exercised = action[0] > 0.5;
    state next;
    next.t = s.t + 1;
    next.tag = exercised ? 1 : s.tag;
    next.capacity = capacity_after(s.t, s.capacity, s.context, action);
    next.consumed = s.consumed + consumption_of(s.t, s.context, action);
    next.context = s.t >= horizon() || exercised
                       ? s.context
                       : Eigen::VectorXd::Constant(
                             1, step_price(s.context[0], inst_.leg, inst_.rate, inst_.dt, rng));
    return next;
}

std::vector<Eigen::VectorXd> options_env::sample_context_suffix(const state& s,
                                                                counter_rng& rng) const {
    std::vector<Eigen::VectorXd> out;
    if (s.t > horizon()) return out;
    out.push_back(s.context);
    double price = s.context[0];
    for (int t = s.t + 1; t <= horizon(); ++t) {
        price = step_price(price, inst_.leg, inst_.rate, inst_.dt, rng);
        out.push_back(Eigen::VectorXd::Constant(1, price));
    }
    return out;
}

basket_env::basket_env(basket_instance inst) : inst_(std::move(inst)) { validate_instance(inst_); }

double basket_env::discounted_payoff(int t, int leg, double price) const {
    if (leg < 0 || leg >= dimension())
        throw index_out_of_range("basket: payoff requested for leg " + std::to_string(leg));
    return std::exp(-inst_.rate * (t - 1) * inst_.dt) *
           intrinsic(inst_.legs[static_cast<std::size_t>(leg)], price);
}

state basket_env::initial_state(counter_rng& rng) const {
    (void)rng;
    state s;
    s.t = 1;
    s.context = Eigen::VectorXd(dimension());
    for (int i = 0; i < dimension(); ++i) s.context[i] = inst_.legs[static_cast<std::size_t>(i)].s0;
    s.capacity = Eigen::VectorXd::Ones(dimension());
    return s;
}

bool basket_env::is_terminal(const state& s) const {
    return s.t > horizon() || s.capacity.sum() < 0.5;
}

action_window basket_env::window_at(int t, double consumed,
                                    const Eigen::VectorXd& capacity) const {
    (void)consumed;
    if (t < 1 || t > horizon())
        throw index_out_of_range("basket: window requested outside the episode");
    const double live = std::round(capacity.sum());
    action_window w;
    if (t == horizon()) {
        w.lower = live;
        w.upper = live;
    } else {
        w.upper = std::min(static_cast<double>(inst_.exercise_cap), live);
    }
    w.path_lower = w.lower;
    w.path_upper = w.upper;
    return w;
}

action_pair basket_env::extremes_at(int t, const Eigen::VectorXd& context,
                                    const action_window& window,
                                    const Eigen::VectorXd& capacity) const {
    if (!window.feasible) throw infeasible_window("basket: infeasible exercise window");

    std::vector<int> live;
    for (int i = 0; i < dimension(); ++i)
        if (capacity[i] > 0.5) live.push_back(i);
    std::sort(live.begin(), live.end(), [&](int a, int b) {
        const double pa = discounted_payoff(t, a, context[a]);
        const double pb = discounted_payoff(t, b, context[b]);
        if (pa != pb) return pa > pb;
        return a < b;
    });

    const auto pick = [&](double count) {
        action_vector a = Eigen::VectorXd::Zero(dimension());
        double reward_sum = 0.0;
        const int n = std::min(static_cast<int>(std::llround(count)), static_cast<int>(live.size()));
        for (int j = 0; j < n; ++j) {
            a[live[static_cast<std::size_t>(j)]] = 1.0;
            reward_sum += discounted_payoff(t, live[static_cast<std::size_t>(j)],
                                            context[live[static_cast<std::size_t>(j)]]);
        }
        return std::make_pair(a, reward_sum);
    };

    action_pair pair;
    std::tie(pair.at_upper, pair.reward_at_upper) = pick(window.upper);
    std::tie(pair.at_lower, pair.reward_at_lower) = pick(window.lower);
    return pair;
}

double basket_env::consumption_of(int t, const Eigen::VectorXd& context,
                                  const action_vector& action) const {
    (void)t;
    (void)context;
    return action.cwiseAbs().sum();
}

Eigen::VectorXd basket_env::capacity_after(int t, const Eigen::VectorXd& capacity,
                                           const Eigen::VectorXd& context,
                                           const action_vector& action) const {
    (void)t;
    (void)context;
    return (capacity - action).cwiseMax(0.0);
}

std::vector<action_vector> basket_env::actions(const state& s) const {
    std::vector<action_vector> out;
    if (s.t == horizon()) {
        out.push_back((s.capacity.array() > 0.5).cast<double>().matrix());
        return out;
    }
    std::vector<int> live;
    for (int i = 0; i < dimension(); ++i)
        if (s.capacity[i] > 0.5) live.push_back(i);
    const int n = static_cast<int>(live.size());
    for (int mask = 0; mask < (1 << n); ++mask) {
        if (__builtin_popcount(static_cast<unsigned>(mask)) > inst_.exercise_cap) continue;
        action_vector a = Eigen::VectorXd::Zero(dimension());
        for (int j = 0; j < n; ++j)
            if (mask & (1 << j)) a[live[static_cast<std::size_t>(j)]] = 1.0;
        out.push_back(std::move(a));
    }
    return out;
}

double basket_env::reward(const state& s, const action_vector& action) const {
    double total = 0.0;
    for (int i = 0; i < dimension(); ++i) {
        if (action[i] <= 1e-12) continue;
        if (s.capacity[i] < 0.5)
            throw exercise_of_dead_leg("basket: exercise requested on settled leg " +
                                       std::to_string(i));
        total += action[i] * discounted_payoff(s.t, i, s.context[i]);
    }
    return total;
}

state basket_env::sample_next(const state& s, const action_vector& action,
                              counter_rng& rng) const {
    state next;
    next.t = s.t + 1;
    next.tag = s.tag;
    next.capacity = capacity_after(s.t, s.capacity, s.context, action);
    next.consumed = s.consumed + consumption_of(s.t, s.context, action);
    if (s.t >= horizon()) {
        next.context = s.context;
    } else {
        next.context = Eigen::VectorXd(dimension());
        for (int i = 0; i < dimension(); ++i)
            next.context[i] = step_price(s.context[i], inst_.legs[static_cast<std::size_t>(i)],
                                         inst_.rate, inst_.dt, rng);
    }
    return next;
}

std::vector<Eigen::VectorXd> basket_env::sample_context_suffix(const state& s,
                                                               counter_rng& rng) const {
    std::vector<Eigen::VectorXd> out;
    if (s.t > horizon()) return out;
    out.push_back(s.context);
    Eigen::VectorXd prices = s.context;
    for (int t = s.t + 1; t <= horizon(); ++t) {
        Eigen::VectorXd next(dimension());
        for (int i = 0; i < dimension(); ++i)
            next[i] = step_price(prices[i], inst_.legs[static_cast<std::size_t>(i)], inst_.rate,
                                 inst_.dt, rng);
        prices = next;
        out.push_back(prices);
    }
    return out;
}

double basket_env::hindsight_value_at(const state& s,
                                      const std::vector<Eigen::VectorXd>& realized) const {
    if (s.t > horizon() || realized.empty()) return 0.0;
    double total = 0.0;
    for (int i = 0; i < dimension(); ++i) {
        if (s.capacity[i] < 0.5) continue;
        double best = 0.0;
        for (std::size_t j = 0; j < realized.size(); ++j)
            best = std::max(best, discounted_payoff(s.t + static_cast<int>(j), i, realized[j][i]));
        total += best;
    }
    return total;
}

}  // namespace rex
