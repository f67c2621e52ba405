#pragma once

// Reference option pricer: recombining binomial lattice evaluated by plain
// backward induction. Used to pin expected values for the regression-based
// pricer and the lattice helper; shares no code with the library.

namespace oracle {

struct lattice_inputs {
    double s0 = 0.0;
    double strike = 0.0;
    double rate = 0.0;      // continuously compounded risk-free rate
    double dividend = 0.0;  // continuous dividend yield
    double sigma = 0.0;
    double maturity = 0.0;  // years
    int steps = 0;
    bool is_call = true;
    bool american = true;
};

double lattice_price(const lattice_inputs& in);

}  // namespace oracle
