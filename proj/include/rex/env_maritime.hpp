#pragma once

#include "rex/environment.hpp"
#include "rex/models.hpp"

namespace rex {

// Port-to-port fuel purchasing along a fixed route under one global spot
// price process. The decision at each port is how much to refuel before the
// next leg; the final port of the route has no departure, so its window is
// pinned to zero.
struct maritime_instance {
    Eigen::MatrixXd distance;  // symmetric, zero diagonal
    std::vector<int> route;    // 1-based port ids in visiting order
    double tank_capacity = 50.0;
    double fixed_cost = 0.0;  // flat charge whenever a positive amount is bought
    gbm_params price;         // spot process; one step per leg
};

// Throws infeasible_leg / infeasible_instance when the table cannot be run.
void validate_instance(const maritime_instance& inst);

class maritime_env : public environment {
  public:
    explicit maritime_env(maritime_instance inst);

    std::string name() const override { return "maritime"; }
    objective_sense sense() const override { return objective_sense::cost; }
    int horizon() const override { return static_cast<int>(inst_.route.size()); }
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
    state sample_next(const state& s, const action_vector& action,
                      counter_rng& rng) const override;
    std::vector<Eigen::VectorXd> sample_context_suffix(const state& s,
                                                       counter_rng& rng) const override;

    const maritime_instance& instance() const { return inst_; }
    double leg_distance(int t) const;  // 0 at the final port
    double route_distance() const;

  private:
    maritime_instance inst_;
    std::vector<double> legs_;
};

}  // namespace rex
