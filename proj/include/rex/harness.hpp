#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rex/environment.hpp"
#include "rex/mcts.hpp"

namespace rex {

// Iteration budget rule: effective = min(requested, floor(k_c * (2 D)^T)).
struct budget_decision {
    std::int64_t requested = 0;
    std::int64_t effective = 0;
    bool truncated = false;
    bool refused = false;  // cap came out zero
};

budget_decision enforce_budget(int dimension, int horizon, std::int64_t requested,
                               double k_c = 0.1);

struct experiment_config {
    std::string env;  // maritime | hybrid | hybrid-expanded | options | options-basket
    char config_row = 'A';
    std::vector<std::string> algorithms;  // uct, uct-vc, ments, ments-vc, baseline
    int seed_lo = 0;
    int seed_hi = 99;
    int episodes = 1;
    std::int64_t iteration_budget = 0;  // 0 = table default
    bool override_budget_rule = false;
    int bound_samples = 0;  // 0 = search default
    std::string config_dir;  // empty = compiled default
    std::string out_path;
    int threads = 0;  // 0 = hardware concurrency
};

struct result_row {
    std::string env;
    char config_row = 'A';
    std::string algorithm;
    int seed = 0;
    int episode = 0;
    double cumulative = 0.0;  // reward, or positive cost for cost-sense domains
    std::string sense;        // "reward" | "cost"
    double wall_ms = 0.0;
};

struct convergence_row {
    std::string env;
    char config_row = 'A';
    std::string algorithm;
    int seed = 0;
    std::int64_t iteration = 0;
    double root_value = 0.0;
    double v_lower = 0.0;
    double v_upper = 0.0;
};

// Builds the environment named by an experiment config row.
std::unique_ptr<environment> make_environment(const std::string& env, const std::string& dir,
                                              char row);

// Canonical name of the baseline algorithm paired with an environment family
// (ls-baseline / belief-vi / scenario-dp).
std::string baseline_name(const std::string& env);

// Runs every (algorithm, seed, episode) cell closed-loop and returns rows in
// canonical order. Throws budget_violation when the budget rule refuses the
// run and no override was set.
std::vector<result_row> run_experiment(const experiment_config& cfg);

// One search per seed at the largest budget, sampled at 1,2,5,10,... up to
// budget_max, with the root value bracket attached to every row.
std::vector<convergence_row> track_convergence(const experiment_config& cfg,
                                               std::int64_t budget_max);

// max(0, oracle - estimate) per budget, preserving order.
std::vector<std::pair<std::int64_t, double>> compute_simple_regret(
    double oracle_value, const std::vector<std::pair<std::int64_t, double>>& estimates);

std::vector<std::int64_t> log_spaced(std::int64_t max_value);

void write_results_csv(const std::string& path, const std::vector<result_row>& rows);
void write_convergence_csv(const std::string& path, const std::vector<convergence_row>& rows);

// Closed-loop episode under a fresh search per epoch; used by run_experiment
// and exposed for tests. env_seed drives the environment stream (shared
// across algorithms so comparisons stay paired); search_seed drives the
// per-epoch planners. Returns the cumulative (signed) reward.
double run_search_episode(const environment& env, const mcts_config& base,
                          std::uint64_t env_seed, std::uint64_t search_seed,
                          std::int64_t budget);

}  // namespace rex
