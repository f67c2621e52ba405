#include "rex/env_maritime.hpp"

#include <cmath>
#include <string>

namespace rex {

namespace {

double step_price(double price, const gbm_params& p, counter_rng& rng) {
    const double loc = (p.drift - 0.5 * p.sigma * p.sigma) * p.dt;
    const double scale = p.sigma * std::sqrt(p.dt);
    return price * std::exp(loc + scale * rng.normal());
}

}  // namespace

void validate_instance(const maritime_instance& inst) {
    if (inst.route.size() < 2)
        throw infeasible_instance("maritime: route must visit at least two ports");
    if (inst.distance.rows() != inst.distance.cols())
        throw infeasible_instance("maritime: distance matrix must be square");
    if (inst.tank_capacity <= 0.0)
        throw infeasible_instance("maritime: tank capacity must be positive");
    if (inst.fixed_cost < 0.0)
        throw infeasible_instance("maritime: negative fixed cost");
    if (inst.price.s0 <= 0.0 || inst.price.dt <= 0.0 || inst.price.sigma < 0.0)
        throw infeasible_instance("maritime: degenerate price process");
    const int n = static_cast<int>(inst.distance.rows());
    for (int id : inst.route)
        if (id < 1 || id > n)
            throw infeasible_instance("maritime: route references port " + std::to_string(id) +
                                      " outside the distance matrix");
    for (std::size_t i = 0; i + 1 < inst.route.size(); ++i) {
        const double leg = inst.distance(inst.route[i] - 1, inst.route[i + 1] - 1);
        if (leg < 0.0)
            throw infeasible_instance("maritime: negative distance on leg " + std::to_string(i + 1));
        if (leg > inst.tank_capacity + 1e-9)
            throw infeasible_leg("maritime: leg " + std::to_string(i + 1) +
                                 " exceeds the tank capacity");
    }
}

maritime_env::maritime_env(maritime_instance inst) : inst_(std::move(inst)) {
    validate_instance(inst_);
    legs_.assign(inst_.route.size(), 0.0);
    for (std::size_t i = 0; i + 1 < inst_.route.size(); ++i)
        legs_[i] = inst_.distance(inst_.route[i] - 1, inst_.route[i + 1] - 1);
}

double maritime_env::leg_distance(int t) const {
    if (t < 1 || t > horizon())
        throw index_out_of_range("maritime: no leg at epoch " + std::to_string(t));
    return legs_[static_cast<std::size_t>(t - 1)];
}

double maritime_env::route_distance() const {
    double total = 0.0;
    for (double leg : legs_) total += leg;
    return total;
}

state maritime_env::initial_state(counter_rng& rng) const {
    (void)rng;
    state s;
    s.t = 1;
    s.context = Eigen::VectorXd::Constant(1, inst_.price.s0);
    // Capacity tracks tank headroom; the voyage starts with an empty tank.
    s.capacity = Eigen::VectorXd::Constant(1, inst_.tank_capacity);
    return s;
}

action_window maritime_env::window_at(int t, double consumed,
                                      const Eigen::VectorXd& capacity) const {
    (void)consumed;
    if (t < 1 || t > horizon())
        throw index_out_of_range("maritime: window requested outside the route");
    action_window w;
    if (t == horizon()) return w;  // no departure from the final port
    const double headroom = capacity[0];
    const double fuel = inst_.tank_capacity - headroom;
    w.lower = std::max(0.0, legs_[static_cast<std::size_t>(t - 1)] - fuel);
    w.upper = headroom;
    w.path_lower = w.lower;
    w.path_upper = w.upper;
    w.feasible = w.lower <= w.upper + 1e-12;
    return w;
}

action_pair maritime_env::extremes_at(int t, const Eigen::VectorXd& context,
                                      const action_window& window,
                                      const Eigen::VectorXd& capacity) const {
    (void)t;
    (void)capacity;
    if (!window.feasible)
        throw infeasible_window("maritime: no purchase satisfies the next leg");
    action_pair pair;
    pair.at_upper = Eigen::VectorXd::Constant(1, window.upper);
    pair.at_lower = Eigen::VectorXd::Constant(1, window.lower);
    state probe;
    probe.context = context;
    pair.reward_at_upper = reward(probe, pair.at_upper);
    pair.reward_at_lower = reward(probe, pair.at_lower);
    return pair;
}

double maritime_env::consumption_of(int t, const Eigen::VectorXd& context,
                                    const action_vector& action) const {
    (void)t;
    (void)context;
    return action.cwiseAbs().sum();
}

Eigen::VectorXd maritime_env::capacity_after(int t, const Eigen::VectorXd& capacity,
                                             const Eigen::VectorXd& context,
                                             const action_vector& action) const {
    (void)context;
    const double leg = t >= 1 && t <= horizon() ? legs_[static_cast<std::size_t>(t - 1)] : 0.0;
    const double headroom =
        std::clamp(capacity[0] - action[0] + leg, 0.0, inst_.tank_capacity);
    return Eigen::VectorXd::Constant(1, headroom);
}

double maritime_env::reward(const state& s, const action_vector& action) const {
    const double amount = action[0];
    double cost = s.context[0] * amount;
    if (amount > 1e-12) cost += inst_.fixed_cost;
    return -cost;
}

state maritime_env::sample_next(const state& s, const action_vector& action,
                                counter_rng& rng) const {
    const action_window w = window(s);
    const double tol = 1e-9 + 1e-12 * std::abs(w.upper);
    if (!w.feasible || action[0] < w.lower - tol || action[0] > w.upper + tol)
        throw inadmissible_action("maritime: purchase outside the admissible window");
    state next;
    next.t = s.t + 1;
    next.capacity = capacity_after(s.t, s.capacity, s.context, action);
    next.consumed = s.consumed + consumption_of(s.t, s.context, action);
    next.tag = s.tag;
    next.context = s.t == horizon()
                       ? s.context
                       : Eigen::VectorXd::Constant(1, step_price(s.context[0], inst_.price, rng));
    return next;
}

std::vector<Eigen::VectorXd> maritime_env::sample_context_suffix(const state& s,
                                                                 counter_rng& rng) const {
    std::vector<Eigen::VectorXd> out;
    if (s.t > horizon()) return out;
    out.push_back(s.context);
    double price = s.context[0];
    for (int t = s.t + 1; t <= horizon(); ++t) {
        price = step_price(price, inst_.price, rng);
        out.push_back(Eigen::VectorXd::Constant(1, price));
    }
    return out;
}

}  // namespace rex
