#pragma once

#include <utility>
#include <vector>

#include "rex/environment.hpp"

namespace rex {

// Small fully enumerable instance: one action coordinate, finite per-epoch
// context supports, constant windows. Exists so searches can be checked
// against exact dynamic programming.
struct toy_instance {
    int horizon = 3;
    // support[t-1] = {(context value, probability), ...}. The first epoch's
    // support must be a single point (the root context is known).
    std::vector<std::vector<std::pair<double, double>>> support;
    double inc_lower = 0.0;
    double inc_upper = 1.0;
    double total_lower = 0.0;
    double total_upper = 2.0;
    double capacity0 = 10.0;

    static toy_instance standard() {
        toy_instance inst;
        inst.horizon = 3;
        inst.support = {
            {{2.0, 1.0}},
            {{1.0, 0.5}, {4.0, 0.5}},
            {{3.0, 0.5}, {0.5, 0.5}},
        };
        return inst;
    }
};

class toy_env : public environment {
  public:
    explicit toy_env(toy_instance inst);

    std::string name() const override { return "toy"; }
    int horizon() const override { return inst_.horizon; }
    int dimension() const override { return 1; }

    state initial_state(counter_rng& rng) const override;
    action_window window_at(int t, double consumed, const Eigen::VectorXd& capacity) const override;
    action_pair extremes_at(int t, const Eigen::VectorXd& context, const action_window& window,
                            const Eigen::VectorXd& capacity) const override;
    double consumption_of(int t, const Eigen::VectorXd& context,
                          const action_vector& action) const override;
    Eigen::VectorXd capacity_after(int t, const Eigen::VectorXd& capacity,
                                   const Eigen::VectorXd& context,
                                   const action_vector& action) const override;
    double reward(const state& s, const action_vector& action) const override;
    std::optional<std::vector<weighted_state>> successors(const state& s,
                                                          const action_vector& action) const override;
    state sample_next(const state& s, const action_vector& action,
                      counter_rng& rng) const override;
    std::vector<Eigen::VectorXd> sample_context_suffix(const state& s,
                                                       counter_rng& rng) const override;

    const toy_instance& instance() const { return inst_; }

  private:
    toy_instance inst_;
};

}  // namespace rex
