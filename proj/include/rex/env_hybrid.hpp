#pragma once

#include "rex/environment.hpp"
#include "rex/models.hpp"

namespace rex {

// Two-fuel vehicle control: each epoch one consumption quantum is split
// across fuels, paying off at the current mode's per-fuel mileage. Modes
// follow a Markov chain; a braking mode forces zero consumption and returns
// charge to the battery coordinate.
struct hybrid_instance {
    Eigen::MatrixXd mileage;     // modes x fuels
    Eigen::MatrixXd transition;  // modes x modes, rows sum to one
    int horizon = 10;
    double quantum = 4.0;      // consumption per driving epoch
    double brake_gain = 2.0;   // battery replenished per braking epoch
    int braking_mode = -1;     // row index; -1 = no braking mode
    int battery_coordinate = 1;
    Eigen::VectorXd capacity0;  // per-fuel; empty = 0.6 * horizon * quantum each
    Eigen::VectorXd initial_mode_dist;  // empty = uniform
};

void validate_instance(const hybrid_instance& inst);

class hybrid_env : public environment {
  public:
    explicit hybrid_env(hybrid_instance inst);

    std::string name() const override { return "hybrid"; }
    int horizon() const override { return inst_.horizon; }
    int dimension() const override { return static_cast<int>(inst_.mileage.cols()); }

    state initial_state(counter_rng& rng) const override;
    action_window window(const state& s) const override;
    action_window window_at(int t, double consumed, const Eigen::VectorXd& capacity) const override;
    action_pair extremes_at(int t, const Eigen::VectorXd& context, const action_window& window,
                            const Eigen::VectorXd& capacity) const override;
    double consumption_of(int t, const Eigen::VectorXd& context,
                          const action_vector& action) const override;
    Eigen::VectorXd capacity_after(int t, const Eigen::VectorXd& capacity,
                                   const Eigen::VectorXd& context,
                                   const action_vector& action) const override;
    std::vector<action_vector> actions(const state& s) const override;
    double reward(const state& s, const action_vector& action) const override;
    std::optional<std::vector<weighted_state>> successors(const state& s,
                                                          const action_vector& action) const override;
    state sample_next(const state& s, const action_vector& action,
                      counter_rng& rng) const override;
    std::vector<Eigen::VectorXd> sample_context_suffix(const state& s,
                                                       counter_rng& rng) const override;

    // The per-epoch quantum makes the generic k-scan collapse to chronological
    // greedy fuel choice, which undervalues perfect information under
    // per-fuel caps; these exact two-resource assignments replace it.
    double hindsight_value_at(const state& s,
                              const std::vector<Eigen::VectorXd>& realized) const override;
    double anticipative_value_at(const state& s,
                                 const std::vector<Eigen::VectorXd>& means) const override;

    const hybrid_instance& instance() const { return inst_; }
    int mode_of_context(const Eigen::VectorXd& context) const;
    bool braking(int mode) const { return mode == inst_.braking_mode; }

  private:
    Eigen::VectorXd full_capacity() const;
    hybrid_instance inst_;
};

}  // namespace rex
