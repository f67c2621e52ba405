#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rex/core.hpp"
#include "rex/rng.hpp"

namespace rex {

// Deterministic planning view of a problem: every stochastic context is
// pinned, and the per-epoch window/extreme-action algebra is exposed so plans
// can be evaluated chronologically. The default implementation wraps a
// problem_spec; environments with state-coupled windows override it.
class planning_model {
  public:
    virtual ~planning_model() = default;
    virtual int horizon() const = 0;

    virtual action_window window_at(int t, double consumed,
                                    const Eigen::VectorXd& capacity) const = 0;
    virtual action_pair extremes_at(int t, const Eigen::VectorXd& context,
                                    const action_window& window,
                                    const Eigen::VectorXd& capacity) const = 0;
    virtual double consumption_of(int t, const Eigen::VectorXd& context,
                                  const action_vector& action) const = 0;
    virtual Eigen::VectorXd capacity_after(int t, const Eigen::VectorXd& capacity,
                                           const Eigen::VectorXd& context,
                                           const action_vector& action) const = 0;
};

// planning_model backed directly by problem_spec algebra.
class spec_planning_model : public planning_model {
  public:
    explicit spec_planning_model(problem_spec spec) : spec_(std::move(spec)) {}

    int horizon() const override { return spec_.horizon; }
    action_window window_at(int t, double consumed,
                            const Eigen::VectorXd& capacity) const override {
        return admissible_window(spec_, t, consumed, capacity);
    }
    action_pair extremes_at(int t, const Eigen::VectorXd& context, const action_window& window,
                            const Eigen::VectorXd& capacity) const override {
        (void)t;
        return extreme_actions(spec_, window, context, capacity);
    }
    double consumption_of(int t, const Eigen::VectorXd& context,
                          const action_vector& action) const override {
        (void)t;
        return consumption(spec_, context, action);
    }
    Eigen::VectorXd capacity_after(int t, const Eigen::VectorXd& capacity,
                                   const Eigen::VectorXd& context,
                                   const action_vector& action) const override {
        Eigen::VectorXd cap = capacity + consumption_delta(spec_, context, action);
        if (spec_.natural_drift) cap += spec_.natural_drift(t);
        return cap.cwiseMax(0.0);
    }
    const problem_spec& spec() const { return spec_; }

  private:
    problem_spec spec_;
};

struct ranked_entry {
    int epoch = 0;  // original epoch the entry belongs to
    Eigen::VectorXd context;
    action_vector action_at_upper;
    action_vector action_at_lower;
    double reward_at_upper = 0.0;
    double reward_at_lower = 0.0;
};

// Entries sorted by reward_at_upper descending; ties break toward the
// earlier epoch.
struct ranked_contexts {
    std::vector<ranked_entry> entries;
};

struct allocation_plan {
    int k = 0;  // how many rank-leading epochs take their window maximum
    std::vector<action_vector> actions;  // per epoch, chronological
    double value = 0.0;
};

// Monte Carlo value bracket around the optimal policy value.
struct value_interval {
    double lower = 0.0;
    double upper = 0.0;
    double gap = 0.0;
    int sample_count = 0;
    double spread = 0.0;  // sample standard deviation of the upper-bound draws
};

// Per-epoch extreme actions/rewards at the idealized root capacity, sorted
// for the k-scan. contexts[i] is the context of epoch from.t + i.
ranked_contexts rank_contexts(const planning_model& model, const state& from,
                              const std::vector<Eigen::VectorXd>& contexts);

// Idealized plan value for a given k: rank-leading rewards at the window
// maximum, the rest at the window minimum. Throws index_out_of_range unless
// 0 <= k <= entries.
double value_for_k(const ranked_contexts& ranked, int k);

// Scans k = 0..T, evaluates each candidate plan chronologically against the
// evolving windows, and returns the best feasible plan. Throws
// no_feasible_allocation when no k admits a feasible plan.
allocation_plan solve_topk(const planning_model& model, const state& from,
                           const std::vector<Eigen::VectorXd>& contexts);

// Optimal-plan value against one realized context sequence.
double hindsight_value(const planning_model& model, const state& from,
                       const std::vector<Eigen::VectorXd>& realized);

class environment;

// Bracket at a state: upper = mean hindsight value over sampled context
// trajectories, lower = plan value on the per-epoch sample means. Trajectory
// draws are keyed by index, so results are schedule-independent.
value_interval value_bounds(const environment& env, const state& from, int n_samples,
                            counter_rng rng);

}  // namespace rex
