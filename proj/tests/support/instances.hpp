#pragma once

// Random allocation instances on a 0.25 lattice, expressed both as a
// problem_spec (library form) and as oracle::alloc_instance (plain data for
// the enumeration oracle). Consumption weights are fixed at 1 so the action
// grid and the consumption grid coincide and the two optima are comparable
// without discretization slack.

#include <vector>

#include "oracles/grid_search.hpp"
#include "rex/allocation.hpp"
#include "rex/core.hpp"
#include "rex/rng.hpp"

namespace support {

struct alloc_case {
    rex::problem_spec spec;
    std::vector<Eigen::VectorXd> contexts;  // one per epoch
    oracle::alloc_instance inst;
    rex::state root;
};

// `separable = true` pins the cumulative ceiling at the sum of the increment
// ceilings and keeps capacity slack, so playing every epoch at its ceiling is
// optimal and greedy extreme play, the prefix scan, and the exhaustive grid
// all coincide. The default leaves totals and capacity binding at random.
inline alloc_case random_alloc_case(rex::counter_rng& rng, int max_dim, int max_horizon,
                                    bool separable = false) {
    alloc_case out;
    const int d = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_dim)));
    const int t = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_horizon)));

    rex::problem_spec spec(d, t);
    std::vector<double> inc_lo(static_cast<std::size_t>(t));
    std::vector<double> inc_hi(static_cast<std::size_t>(t));
    double inc_hi_sum = 0.0;
    for (int e = 0; e < t; ++e) {
        const double lo = rng.below(3) == 0 ? 0.25 : 0.0;
        const double hi = lo + 0.25 * static_cast<double>(1 + rng.below(4));
        inc_lo[static_cast<std::size_t>(e)] = lo;
        inc_hi[static_cast<std::size_t>(e)] = hi;
        inc_hi_sum += hi;
    }
    spec.increment_lower = [inc_lo](int epoch) {
        return inc_lo[static_cast<std::size_t>(epoch - 1)];
    };
    spec.increment_upper = [inc_hi](int epoch) {
        return inc_hi[static_cast<std::size_t>(epoch - 1)];
    };

    if (separable) {
        spec.total_upper = inc_hi_sum;
        spec.total_lower = 0.25 * static_cast<double>(rng.below(
                                      static_cast<std::uint64_t>(inc_hi_sum / 0.25) + 1));
    } else {
        // Totals sampled on the lattice around the reachable range; occasionally
        // inconsistent on purpose so infeasibility agreement is exercised too.
        const auto lattice_points = static_cast<std::uint64_t>(inc_hi_sum / 0.25) + 2;
        spec.total_upper = 0.25 * static_cast<double>(rng.below(lattice_points));
        spec.total_lower = 0.25 * static_cast<double>(rng.below(
                                      static_cast<std::uint64_t>(spec.total_upper / 0.25) + 1));
    }

    out.contexts.reserve(static_cast<std::size_t>(t));
    for (int e = 0; e < t; ++e) {
        Eigen::VectorXd ctx(d);
        for (int i = 0; i < d; ++i)
            ctx[i] = 0.25 * static_cast<double>(1 + rng.below(16));
        out.contexts.push_back(ctx);
    }

    Eigen::VectorXd cap0(d);
    if (separable || rng.below(10) < 7) {
        cap0.setConstant(static_cast<double>(t) * 1.5);  // slack capacity
    } else {
        for (int i = 0; i < d; ++i)
            cap0[i] = 0.25 * static_cast<double>(1 + rng.below(
                                 static_cast<std::uint64_t>(t) * 4));
    }

    out.inst.dimension = d;
    out.inst.horizon = t;
    out.inst.inc_lower = inc_lo;
    out.inst.inc_upper = inc_hi;
    out.inst.total_lower = spec.total_lower;
    out.inst.total_upper = spec.total_upper;
    for (int i = 0; i < d; ++i) out.inst.capacity0.push_back(cap0[i]);
    for (int e = 0; e < t; ++e) {
        std::vector<double> rate(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) rate[static_cast<std::size_t>(i)] = out.contexts[e][i];
        out.inst.reward_rate.push_back(rate);
        out.inst.cons_weight.push_back(std::vector<double>(static_cast<std::size_t>(d), 1.0));
        out.inst.drift.push_back(std::vector<double>(static_cast<std::size_t>(d), 0.0));
    }

    out.spec = std::move(spec);
    out.root.t = 1;
    out.root.context = out.contexts.front();
    out.root.capacity = cap0;
    out.root.consumed = 0.0;
    return out;
}

}  // namespace support
