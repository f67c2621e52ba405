#pragma once

#include "rex/environment.hpp"
#include "rex/models.hpp"

namespace rex {

struct option_leg {
    double s0 = 0.0;
    double strike = 0.0;
    double sigma = 0.0;
    double dividend = 0.0;
    bool is_call = true;
};

// One American-style option exercisable on a fixed grid of dates. Prices
// follow risk-neutral dynamics; payoffs are discounted to time zero inside
// the reward, so episode returns live on the price scale.
struct option_instance {
    option_leg leg;
    double maturity = 1.0;
    double rate = 0.0;
    double dt = 0.1;

    int steps() const;  // exercise decisions before maturity
};

// Throws invalid_spec when dt does not divide the maturity within 1e-9.
void validate_instance(const option_instance& inst);

// Several legs on correlated (here: independent) underlyings with a cap on
// voluntary exercises per epoch. Maturity settles every live leg at once.
struct basket_instance {
    std::vector<option_leg> legs;
    double maturity = 1.0;
    double rate = 0.0;
    double dt = 0.1;
    int exercise_cap = 1;

    int steps() const;
};

void validate_instance(const basket_instance& inst);

class options_env : public environment {
  public:
    explicit options_env(option_instance inst);

    std::string name() const override { return "options"; }
    int horizon() const override { return inst_.steps() + 1; }  // + forced settlement
    int budget_horizon() const override { return inst_.steps(); }
    int dimension() const override { return 1; }

    state initial_state(counter_rng& rng) const override;
    bool is_terminal(const state& s) const override;
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

    double discounted_payoff(int t, double price) const;
    const option_instance& instance() const { return inst_; }

  private:
    option_instance inst_;
};

class basket_env : public environment {
  public:
    explicit basket_env(basket_instance inst);

    std::string name() const override { return "options-basket"; }
    int horizon() const override { return inst_.steps() + 1; }
    int budget_horizon() const override { return inst_.steps(); }
    int dimension() const override { return static_cast<int>(inst_.legs.size()); }

    state initial_state(counter_rng& rng) const override;
    bool is_terminal(const state& s) const override;
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
    state sample_next(const state& s, const action_vector& action,
                      counter_rng& rng) const override;
    std::vector<Eigen::VectorXd> sample_context_suffix(const state& s,
                                                       counter_rng& rng) const override;

    // Valid upper bound that ignores the per-epoch cap: each live leg takes
    // its best discounted payoff independently.
    double hindsight_value_at(const state& s,
                              const std::vector<Eigen::VectorXd>& realized) const override;

    double discounted_payoff(int t, int leg, double price) const;
    const basket_instance& instance() const { return inst_; }

  private:
    basket_instance inst_;
};

}  // namespace rex
