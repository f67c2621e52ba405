#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rex/allocation.hpp"
#include "rex/core.hpp"
#include "rex/rng.hpp"

namespace rex {

enum class objective_sense { reward, cost };

struct weighted_state {
    state next;
    double prob = 1.0;
};

// Episodic decision process whose state carries an exogenous context and a
// deterministic capacity vector. Doubles as the planning_model used to price
// plans against fixed context sequences (hindsight / anticipative values).
class environment : public planning_model {
  public:
    virtual std::string name() const = 0;
    virtual objective_sense sense() const { return objective_sense::reward; }

    // Action coordinates, as used by the iteration-budget rule.
    virtual int dimension() const = 0;

    // Epoch count the iteration-budget rule sees. Defaults to the full
    // horizon; environments whose last epoch is forced (no free decision)
    // report only the free ones.
    virtual int budget_horizon() const { return horizon(); }

    virtual state initial_state(counter_rng& rng) const = 0;
    virtual bool is_terminal(const state& s) const { return s.t > horizon(); }

    virtual action_window window(const state& s) const {
        return window_at(s.t, s.consumed, s.capacity);
    }

    virtual action_pair extreme_pair(const state& s) const {
        return extremes_at(s.t, s.context, window(s), s.capacity);
    }

    // Decision-node action set. Defaults to the two reward-extremal actions
    // (deduplicated when the window is a point).
    virtual std::vector<action_vector> actions(const state& s) const;

    virtual double reward(const state& s, const action_vector& action) const = 0;

    // Finite successor distribution, when the chance branching is enumerable.
    virtual std::optional<std::vector<weighted_state>> successors(
        const state& s, const action_vector& action) const {
        (void)s;
        (void)action;
        return std::nullopt;
    }

    virtual state sample_next(const state& s, const action_vector& action,
                              counter_rng& rng) const = 0;

    // Realized context sequence for epochs s.t .. horizon. Element 0 is the
    // state's own context; later elements are sampled.
    virtual std::vector<Eigen::VectorXd> sample_context_suffix(const state& s,
                                                               counter_rng& rng) const = 0;

    // Perfect-information optimum against one realized context sequence and
    // its deterministic counterpart on mean contexts. Environments with
    // structure the generic k-scan cannot express exactly override these.
    virtual double hindsight_value_at(const state& s,
                                      const std::vector<Eigen::VectorXd>& realized) const;
    virtual double anticipative_value_at(const state& s,
                                         const std::vector<Eigen::VectorXd>& means) const;
};

}  // namespace rex
