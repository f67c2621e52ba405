#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

#include "rex/errors.hpp"

namespace rex {

using action_vector = Eigen::VectorXd;

// Coordinate-wise map R^D -> R^D, stored as one scalar function per
// coordinate so separability holds by construction.
struct coordinate_map {
    std::vector<std::function<double(double)>> parts;

    static coordinate_map identity(int dimension) {
        coordinate_map m;
        m.parts.assign(static_cast<std::size_t>(dimension),
                       [](double x) { return x; });
        return m;
    }

    static coordinate_map constant(int dimension, double value) {
        coordinate_map m;
        m.parts.assign(static_cast<std::size_t>(dimension),
                       [value](double) { return value; });
        return m;
    }

    [[nodiscard]] int dimension() const { return static_cast<int>(parts.size()); }

    [[nodiscard]] Eigen::VectorXd operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const {
        Eigen::VectorXd out(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i)
            out[i] = parts[static_cast<std::size_t>(i)](x[i]);
        return out;
    }
};

// Sequential allocation problem: the state splits into an exogenous
// stochastic context and a deterministic capacity vector that only actions
// (plus a known drift schedule) can move. Epochs are 1-based.
struct problem_spec {
    int dimension = 1;
    int horizon = 1;
    double norm_p = 1.0;

    Eigen::MatrixXd reward_scale;       // PSD weighting of the utility rate
    Eigen::MatrixXd consumption_scale;  // opposite-signed weighting of the consumption rate

    coordinate_map utility_map;      // context -> per-coordinate reward rate
    coordinate_map consumption_map;  // context -> per-coordinate consumption rate

    std::function<double(int)> increment_lower;  // per-epoch consumption floor
    std::function<double(int)> increment_upper;  // per-epoch consumption ceiling
    double total_lower = 0.0;  // cumulative consumption the episode must reach
    double total_upper = 0.0;  // cumulative consumption the episode must not exceed

    // Per-epoch capacity change applied by the system itself (not by actions).
    std::function<Eigen::VectorXd(int)> natural_drift;

    problem_spec() = default;

    problem_spec(int dim, int t) : dimension(dim), horizon(t) {
        reward_scale = Eigen::MatrixXd::Identity(dim, dim);
        consumption_scale = -Eigen::MatrixXd::Identity(dim, dim);
        utility_map = coordinate_map::identity(dim);
        consumption_map = coordinate_map::constant(dim, 1.0);
        increment_lower = [](int) { return 0.0; };
        increment_upper = [](int) { return 0.0; };
        natural_drift = [dim](int) { return Eigen::VectorXd::Zero(dim).eval(); };
    }
};

struct state {
    int t = 1;                 // epoch in 1..horizon+1
    Eigen::VectorXd context;   // exogenous stochastic part
    Eigen::VectorXd capacity;  // deterministic part, componentwise >= 0
    double consumed = 0.0;     // cumulative consumption so far
    int tag = 0;               // environment-specific discrete annotation
};

// Scalar consumption interval admissible at one epoch. path_lower/path_upper
// are the bounds induced by the endpoint constraint alone (consumption still
// reachable/not exceedable given the remaining increment schedule); lower and
// upper fold in the per-epoch increments and remaining capacity. feasible is
// false when lower > upper; such windows are surfaced, never repaired.
struct action_window {
    double lower = 0.0;
    double upper = 0.0;
    double path_lower = 0.0;
    double path_upper = 0.0;
    bool feasible = true;
};

// Reward-extremal actions at a fixed consumption window: at_upper consumes
// the window maximum, at_lower the window minimum, each maximizing reward at
// its consumption level.
struct action_pair {
    action_vector at_upper;
    action_vector at_lower;
    double reward_at_upper = 0.0;
    double reward_at_lower = 0.0;
};

inline double lp_norm(const Eigen::Ref<const Eigen::VectorXd>& v, double p) {
    if (p == 1.0) return v.cwiseAbs().sum();
    if (p == 2.0) return v.norm();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) acc += std::pow(std::abs(v[i]), p);
    return std::pow(acc, 1.0 / p);
}

// Throws invalid_spec listing every violation found.
void validate_spec(const problem_spec& spec);

// Instantaneous reward <reward_scale * utility_map(context), action>.
double reward(const problem_spec& spec, const Eigen::Ref<const Eigen::VectorXd>& context,
              const Eigen::Ref<const Eigen::VectorXd>& action);

// Signed capacity change caused by an action (componentwise, <= 0 for
// resource-consuming coordinates under the default scales).
Eigen::VectorXd consumption_delta(const problem_spec& spec,
                                  const Eigen::Ref<const Eigen::VectorXd>& context,
                                  const Eigen::Ref<const Eigen::VectorXd>& action);

// Norm of the capacity change: the scalar consumption the windows constrain.
double consumption(const problem_spec& spec, const Eigen::Ref<const Eigen::VectorXd>& context,
                   const Eigen::Ref<const Eigen::VectorXd>& action);

// Admissible consumption interval at epoch t given cumulative consumption and
// remaining capacity. Infeasibility is flagged, not thrown.
action_window admissible_window(const problem_spec& spec, int t, double consumed,
                                const Eigen::Ref<const Eigen::VectorXd>& capacity);

// Reward-extremal actions for a window. capacity, when provided, caps the
// consumption routed through each coordinate. Throws infeasible_window on
// windows flagged infeasible. Requires a diagonal consumption scale.
action_pair extreme_actions(const problem_spec& spec, const action_window& window,
                            const Eigen::Ref<const Eigen::VectorXd>& context);
action_pair extreme_actions(const problem_spec& spec, const action_window& window,
                            const Eigen::Ref<const Eigen::VectorXd>& context,
                            const Eigen::Ref<const Eigen::VectorXd>& capacity);

// Applies an action: checks admissibility against the state's window, moves
// capacity by the action change plus natural drift, advances the epoch, and
// installs next_context verbatim. Componentwise capacity below -1e-9 throws
// capacity_underflow; values in [-1e-9, 0) clamp to zero.
state step(const problem_spec& spec, const state& s,
           const Eigen::Ref<const Eigen::VectorXd>& action,
           const Eigen::Ref<const Eigen::VectorXd>& next_context);

}  // namespace rex
