#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "rex/allocation.hpp"
#include "rex/environment.hpp"

namespace rex {

enum class search_variant { uct, ments };

struct mcts_config {
    search_variant variant = search_variant::uct;
    bool value_clipped = false;

    double exploration_c = 1.0;    // UCT exploration constant
    double temperature = 0.7;      // soft-indmax temperature
    double exploration_eps = 0.2;  // uniform mixing strength in the soft policy
    // Optional extra decay of the uniform mixing; the mixing weight is
    // multiplied by 1 / (1 + N / ments_decay). Infinity disables it.
    double ments_decay = std::numeric_limits<double>::infinity();

    double clip_probability = 1.0;  // chance a new leaf estimate gets clipped
    bool clip_backed_up = false;    // also clip values as they back up

    int rollout_depth = 100;
    int bound_samples = 32;       // trajectories per leaf value bracket
    std::int64_t iteration_budget = 1000;
    double discount = 1.0;
    std::uint64_t seed = 0;
};

struct search_result {
    int best_action_index = -1;
    action_vector best_action;
    std::vector<double> root_value_trace;  // one entry per iteration
    std::vector<std::int64_t> action_visits;
    double root_value = 0.0;
    value_interval root_bounds;  // populated for value-clipped searches
};

// UCB1 pick: untried actions first (in index order), then
// argmax Q + c sqrt(log N / N(a)); ties resolve to the lowest index.
// Throws no_actions on an empty action set.
int select_uct(const std::vector<double>& q, const std::vector<std::int64_t>& visits,
               std::int64_t total_visits, double c);

// Incremental mean: returns {updated_q, updated_visits}.
std::pair<double, std::int64_t> update_uct(double q, std::int64_t visits, double episode_return);

// alpha * log sum exp(q / alpha), evaluated with a max shift.
double softmax_value(const std::vector<double>& q, double alpha);

// (1 - lambda) * Boltzmann(q; alpha) + lambda * uniform.
std::vector<double> ments_policy(const std::vector<double>& q, double alpha, double lambda);

// Soft Q backup: mu + discount * sum over children of (N(child)/N(edge)) * v(child).
// Throws inconsistent_counts when the child visits do not sum to the edge count.
double soft_q_update(double mu, double discount, const std::vector<std::int64_t>& child_visits,
                     const std::vector<double>& child_values, std::int64_t edge_visits);

// Clips a leaf estimate into [lower, upper]; throws inverted_bounds if
// lower > upper.
double clipped_leaf_value(double v, double lower, double upper);

// Depth-limited simulation that picks uniformly between the two extreme
// actions at every state.
double rollout(const environment& env, const state& from, int depth, double discount,
               counter_rng& rng);

// Full tree search from root. Throws budget_violation when the iteration
// budget is not positive.
search_result search(const environment& env, const state& root, const mcts_config& config);

}  // namespace rex
