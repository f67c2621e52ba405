#include "rex/env_toy.hpp"

#include <cmath>
#include <string>

namespace rex {

namespace {

problem_spec spec_of(const toy_instance& inst) {
    problem_spec spec(1, inst.horizon);
    spec.increment_lower = [lo = inst.inc_lower](int) { return lo; };
    spec.increment_upper = [hi = inst.inc_upper](int) { return hi; };
    spec.total_lower = inst.total_lower;
    spec.total_upper = inst.total_upper;
    return spec;
}

void validate(const toy_instance& inst) {
    std::vector<std::string> violations;
    if (inst.horizon < 1) violations.push_back("horizon must be at least 1");
    if (inst.support.size() != static_cast<std::size_t>(inst.horizon))
        violations.push_back("need one context support per epoch");
    if (!inst.support.empty() && inst.support.front().size() != 1)
        violations.push_back("the first epoch's support must be a single known point");
    for (std::size_t t = 0; t < inst.support.size(); ++t) {
        const auto& pts = inst.support[t];
        if (pts.empty()) {
            violations.push_back("empty support at epoch " + std::to_string(t + 1));
            continue;
        }
        double total = 0.0;
        for (const auto& [value, prob] : pts) {
            (void)value;
            if (prob <= 0.0)
                violations.push_back("nonpositive probability at epoch " + std::to_string(t + 1));
            total += prob;
        }
        if (std::abs(total - 1.0) > 1e-9)
            violations.push_back("support probabilities at epoch " + std::to_string(t + 1) +
                                 " do not sum to 1");
    }
    if (inst.inc_lower > inst.inc_upper) violations.push_back("increment bounds inverted");
    if (inst.total_lower > inst.total_upper) violations.push_back("cumulative bounds inverted");
    if (inst.capacity0 < 0.0) violations.push_back("negative initial capacity");
    if (!violations.empty()) throw invalid_spec(violations);
}

}  // namespace

toy_env::toy_env(toy_instance inst) : inst_(std::move(inst)) {
    validate(inst_);
}

state toy_env::initial_state(counter_rng& rng) const {
    (void)rng;
    state s;
    s.t = 1;
    s.context = Eigen::VectorXd::Constant(1, inst_.support.front().front().first);
    s.capacity = Eigen::VectorXd::Constant(1, inst_.capacity0);
    return s;
}

action_window toy_env::window_at(int t, double consumed, const Eigen::VectorXd& capacity) const {
    return admissible_window(spec_of(inst_), t, consumed, capacity);
}

action_pair toy_env::extremes_at(int t, const Eigen::VectorXd& context,
                                 const action_window& window,
                                 const Eigen::VectorXd& capacity) const {
    (void)t;
    return extreme_actions(spec_of(inst_), window, context, capacity);
}

double toy_env::consumption_of(int t, const Eigen::VectorXd& context,
                               const action_vector& action) const {
    (void)t;
    return consumption(spec_of(inst_), context, action);
}

Eigen::VectorXd toy_env::capacity_after(int t, const Eigen::VectorXd& capacity,
                                        const Eigen::VectorXd& context,
                                        const action_vector& action) const {
    (void)t;
    return (capacity + consumption_delta(spec_of(inst_), context, action)).cwiseMax(0.0);
}

double toy_env::reward(const state& s, const action_vector& action) const {
    return rex::reward(spec_of(inst_), s.context, action);
}

std::optional<std::vector<weighted_state>> toy_env::successors(const state& s,
                                                               const action_vector& action) const {
    const problem_spec spec = spec_of(inst_);
    std::vector<weighted_state> out;
    if (s.t >= inst_.horizon) {
        out.push_back({step(spec, s, action, s.context), 1.0});
        return out;
    }
    const auto& pts = inst_.support[static_cast<std::size_t>(s.t)];
    out.reserve(pts.size());
    for (const auto& [value, prob] : pts) {
        const Eigen::VectorXd ctx = Eigen::VectorXd::Constant(1, value);
        out.push_back({step(spec, s, action, ctx), prob});
    }
    return out;
}

state toy_env::sample_next(const state& s, const action_vector& action, counter_rng& rng) const {
    const problem_spec spec = spec_of(inst_);
    if (s.t >= inst_.horizon) return step(spec, s, action, s.context);
    const auto& pts = inst_.support[static_cast<std::size_t>(s.t)];
    std::vector<double> weights(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) weights[i] = pts[i].second;
    const std::size_t pick = rng.categorical(weights);
    return step(spec, s, action, Eigen::VectorXd::Constant(1, pts[pick].first));
}

std::vector<Eigen::VectorXd> toy_env::sample_context_suffix(const state& s,
                                                            counter_rng& rng) const {
    std::vector<Eigen::VectorXd> out;
    if (s.t > inst_.horizon) return out;
    out.push_back(s.context);
    for (int t = s.t + 1; t <= inst_.horizon; ++t) {
        const auto& pts = inst_.support[static_cast<std::size_t>(t - 1)];
        std::vector<double> weights(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) weights[i] = pts[i].second;
        out.push_back(Eigen::VectorXd::Constant(1, pts[rng.categorical(weights)].first));
    }
    return out;
}

}  // namespace rex
