#pragma once

#include <cstdint>
#include <vector>

#include "rex/env_hybrid.hpp"
#include "rex/env_maritime.hpp"
#include "rex/env_options.hpp"

namespace rex {

// Regression-based early-exercise pricer. Prices one leg by backward
// induction over simulated risk-neutral paths, regressing discounted future
// cash flows on (1, S, S^2) over in-the-money paths.
struct ls_result {
    double price = 0.0;
    double std_error = 0.0;
    std::vector<double> exercise_time;          // per path, in years; maturity if never early
    std::vector<Eigen::Vector3d> coefficients;  // per decision epoch; NaN row = no regression
    std::vector<bool> fitted;                   // whether an epoch got a usable regression

    // True when the fitted rule says exercise at (epoch t in 1..steps, price).
    bool exercise_now(const option_instance& inst, int t, double price) const;
};

// Requires n_paths >= 100. Epochs with fewer than 3 in-the-money paths skip
// their regression (continuation falls back to the realized mean).
ls_result longstaff_schwartz(const option_instance& inst, int n_paths, std::uint64_t seed);

// Value iteration over a simplex grid of mode beliefs. Sweeps from zero store
// the whole ladder, so sweep h doubles as the h-epochs-to-go table; the
// iteration stops early once the sup-norm change drops below tol.
struct belief_vi_result {
    std::vector<Eigen::VectorXd> grid;      // belief points
    std::vector<Eigen::VectorXd> values;    // values[h] over the grid (h = 0 .. sweeps)
    std::vector<std::vector<int>> policy;   // policy[h][point] = fuel coordinate
    bool converged = false;
    int sweeps = 0;
    double final_delta = 0.0;

    int nearest(const belief& b) const;
    int act(const belief& b, int epochs_left) const;
    double value(const belief& b, int epochs_left) const;
};

belief_vi_result belief_value_iteration(const hybrid_instance& inst, int grid_per_edge,
                                        double discount, int max_sweeps = 1000,
                                        double tol = 1e-6);

// Backward recursion over (port, integer fuel level, price bin), with bin
// supports and bin-to-bin transition frequencies estimated from simulated
// price paths.
struct scenario_dp_result {
    std::vector<histogram> port_prices;            // one histogram per port
    std::vector<Eigen::MatrixXd> bin_transitions;  // [port] rows: bin -> next-bin probs
    // cost_to_go[port][fuel][bin], refuel[port][fuel][bin]; fuel is integer units.
    std::vector<std::vector<std::vector<double>>> cost_to_go;
    std::vector<std::vector<std::vector<int>>> refuel;
    double expected_cost = 0.0;

    int act(int port, double fuel, double price) const;  // refuel units
};

scenario_dp_result scenario_dp_bunkering(const maritime_instance& inst, int n_scenarios,
                                         int price_bins, std::uint64_t seed);

}  // namespace rex
