#pragma once

// Exact dynamic program for the small enumerable instance the tree searches
// are validated against. Works from plain data over a fixed action grid and
// shares no code with the library.

#include <vector>

namespace oracle {

struct toy_point {
    double context = 0.0;
    double prob = 0.0;
};

struct toy_data {
    int horizon = 3;
    std::vector<std::vector<toy_point>> support;  // per epoch; epoch 1 single point
    double inc_lower = 0.0;
    double inc_upper = 1.0;
    double total_lower = 0.0;
    double total_upper = 2.0;

    static toy_data standard();
};

struct toy_solution {
    double value = 0.0;       // optimal expected return from the root
    double root_action = 0.0; // optimal first-epoch consumption
    double q_at_upper = 0.0;  // root return of consuming the window maximum
    double q_at_lower = 0.0;  // root return of consuming the window minimum
};

// Actions are multiples of 1/grid_per_unit; consumption totals stay on the
// same lattice, so the recursion is exact for bang-bang-optimal instances.
toy_solution solve_toy(const toy_data& data, int grid_per_unit);

}  // namespace oracle
