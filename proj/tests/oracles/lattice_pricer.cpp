#include "oracles/lattice_pricer.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

double lattice_price(const lattice_inputs& in) {
    const double dt = in.maturity / in.steps;
    const double u = std::exp(in.sigma * std::sqrt(dt));
    const double d = 1.0 / u;
    const double growth = std::exp((in.rate - in.dividend) * dt);
    const double p = (growth - d) / (u - d);
    const double disc = std::exp(-in.rate * dt);

    auto payoff = [&](double s) {
        return in.is_call ? std::max(s - in.strike, 0.0) : std::max(in.strike - s, 0.0);
    };

    std::vector<double> value(static_cast<std::size_t>(in.steps) + 1);
    for (int j = 0; j <= in.steps; ++j) {
        const double s = in.s0 * std::pow(u, j) * std::pow(d, in.steps - j);
        value[static_cast<std::size_t>(j)] = payoff(s);
    }
    for (int step = in.steps - 1; step >= 0; --step) {
        for (int j = 0; j <= step; ++j) {
            const auto uj = static_cast<std::size_t>(j);
            double cont = disc * (p * value[uj + 1] + (1.0 - p) * value[uj]);
            if (in.american) {
                const double s = in.s0 * std::pow(u, j) * std::pow(d, step - j);
                cont = std::max(cont, payoff(s));
            }
            value[uj] = cont;
        }
    }
    return value[0];
}

}  // namespace oracle
