#include "rex/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "rex/environment.hpp"

namespace rex {

ranked_contexts rank_contexts(const planning_model& model, const state& from,
                              const std::vector<Eigen::VectorXd>& contexts) {
    const int horizon = model.horizon();
    if (from.t + static_cast<int>(contexts.size()) - 1 > horizon)
        throw index_out_of_range("rank_contexts: more contexts than remaining epochs");

    ranked_contexts out;
    out.entries.reserve(contexts.size());
    for (std::size_t i = 0; i < contexts.size(); ++i) {
        const int t = from.t + static_cast<int>(i);
        action_window w = model.window_at(t, from.consumed, from.capacity);
        if (!w.feasible) {
            // Root-conditioned windows are only ranking proxies; the k-scan
            // re-simulates against true windows, so collapse rather than fail.
            w.lower = w.upper = std::max(0.0, w.upper);
            w.feasible = true;
        }
        const action_pair pair = model.extremes_at(t, contexts[i], w, from.capacity);
        ranked_entry e;
        e.epoch = t;
        e.context = contexts[i];
        e.action_at_upper = pair.at_upper;
        e.action_at_lower = pair.at_lower;
        e.reward_at_upper = pair.reward_at_upper;
        e.reward_at_lower = pair.reward_at_lower;
        out.entries.push_back(std::move(e));
    }

    std::stable_sort(out.entries.begin(), out.entries.end(),
                     [](const ranked_entry& a, const ranked_entry& b) {
                         if (a.reward_at_upper != b.reward_at_upper)
                             return a.reward_at_upper > b.reward_at_upper;
                         return a.epoch < b.epoch;
                     });
    return out;
}

double value_for_k(const ranked_contexts& ranked, int k) {
    const int n = static_cast<int>(ranked.entries.size());
    if (k < 0 || k > n) throw index_out_of_range("value_for_k: k outside 0..entries");
    double total = 0.0;
    for (int i = 0; i < n; ++i)
        total += i < k ? ranked.entries[i].reward_at_upper : ranked.entries[i].reward_at_lower;
    return total;
}

allocation_plan solve_topk(const planning_model& model, const state& from,
                           const std::vector<Eigen::VectorXd>& contexts) {
    const ranked_contexts ranked = rank_contexts(model, from, contexts);
    const int n = static_cast<int>(ranked.entries.size());

    bool found = false;
    allocation_plan best;
    for (int k = 0; k <= n; ++k) {
        std::set<int> at_upper;
        for (int i = 0; i < k; ++i) at_upper.insert(ranked.entries[i].epoch);

        double consumed = from.consumed;
        Eigen::VectorXd capacity = from.capacity;
        double value = 0.0;
        std::vector<action_vector> actions;
        actions.reserve(contexts.size());
        bool feasible = true;

        for (std::size_t j = 0; j < contexts.size(); ++j) {
            const int t = from.t + static_cast<int>(j);
            const action_window w = model.window_at(t, consumed, capacity);
            if (!w.feasible) {
                feasible = false;
                break;
            }
            const action_pair pair = model.extremes_at(t, contexts[j], w, capacity);
            const bool take_upper = at_upper.count(t) > 0;
            const action_vector& a = take_upper ? pair.at_upper : pair.at_lower;
            value += take_upper ? pair.reward_at_upper : pair.reward_at_lower;
            consumed += model.consumption_of(t, contexts[j], a);
            capacity = model.capacity_after(t, capacity, contexts[j], a);
            actions.push_back(a);
        }
        if (!feasible) continue;
        if (!found || value > best.value) {
            found = true;
            best.k = k;
            best.actions = std::move(actions);
            best.value = value;
        }
    }
    if (!found) throw no_feasible_allocation("solve_topk: no k admits a feasible plan");
    return best;
}

double hindsight_value(const planning_model& model, const state& from,
                       const std::vector<Eigen::VectorXd>& realized) {
    if (realized.empty()) return 0.0;
    return solve_topk(model, from, realized).value;
}

value_interval value_bounds(const environment& env, const state& from, int n_samples,
                            counter_rng rng) {
    if (n_samples <= 0) throw error("value_bounds: n_samples must be positive");

    value_interval out;
    out.sample_count = n_samples;
    if (env.is_terminal(from)) return out;

    std::vector<double> draws(static_cast<std::size_t>(n_samples), 0.0);
    std::vector<Eigen::VectorXd> means;
    double total = 0.0;
    for (int i = 0; i < n_samples; ++i) {
        counter_rng traj = rng.split2(1, static_cast<std::uint64_t>(i));
        const std::vector<Eigen::VectorXd> suffix = env.sample_context_suffix(from, traj);
        if (means.empty()) {
            means.resize(suffix.size());
            for (std::size_t j = 0; j < suffix.size(); ++j)
                means[j] = Eigen::VectorXd::Zero(suffix[j].size());
        }
        for (std::size_t j = 0; j < suffix.size(); ++j) means[j] += suffix[j];
        const double h = env.hindsight_value_at(from, suffix);
        draws[static_cast<std::size_t>(i)] = h;
        total += h;
    }
    for (auto& m : means) m /= static_cast<double>(n_samples);

    out.upper = total / n_samples;
    out.lower = env.anticipative_value_at(from, means);
    out.gap = out.upper - out.lower;
    if (n_samples > 1) {
        double ss = 0.0;
        for (double h : draws) ss += (h - out.upper) * (h - out.upper);
        out.spread = std::sqrt(ss / (n_samples - 1));
    }
    return out;
}

std::vector<action_vector> environment::actions(const state& s) const {
    const action_pair pair = extreme_pair(s);
    std::vector<action_vector> out;
    out.push_back(pair.at_upper);
    if ((pair.at_upper - pair.at_lower).cwiseAbs().maxCoeff() > 1e-12)
        out.push_back(pair.at_lower);
    return out;
}

double environment::hindsight_value_at(const state& s,
                                       const std::vector<Eigen::VectorXd>& realized) const {
    if (is_terminal(s)) return 0.0;
    return hindsight_value(*this, s, realized);
}

double environment::anticipative_value_at(const state& s,
                                          const std::vector<Eigen::VectorXd>& means) const {
    if (is_terminal(s) || means.empty()) return 0.0;
    return solve_topk(*this, s, means).value;
}

}  // namespace rex
