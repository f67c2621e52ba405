#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles/lattice_pricer.hpp"
#include "rex/baselines.hpp"
#include "rex/models.hpp"
#include "rex/rng.hpp"

namespace {

rex::option_instance make_option(double s0, double strike, double sigma, double rate,
                                 double dividend, double maturity, double dt, bool is_call) {
    rex::option_instance inst;
    inst.leg = {s0, strike, sigma, dividend, is_call};
    inst.maturity = maturity;
    inst.rate = rate;
    inst.dt = dt;
    return inst;
}

rex::hybrid_instance two_mode_belief_car() {
    rex::hybrid_instance inst;
    inst.mileage = Eigen::MatrixXd(2, 2);
    inst.mileage << 2.0, 1.0, 1.0, 3.0;
    inst.transition = Eigen::MatrixXd::Identity(2, 2);
    inst.horizon = 10;
    inst.quantum = 1.0;
    inst.braking_mode = -1;
    return inst;
}

Eigen::VectorXd one_hot(int modes, int m) {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(modes);
    b[m] = 1.0;
    return b;
}

rex::maritime_instance shuttle_route(std::vector<int> route, double sigma, double fixed_cost) {
    rex::maritime_instance inst;
    inst.distance = Eigen::MatrixXd::Zero(2, 2);
    inst.distance(0, 1) = 4.0;
    inst.distance(1, 0) = 4.0;
    inst.route = std::move(route);
    inst.tank_capacity = 12.0;
    inst.fixed_cost = fixed_cost;
    inst.price.s0 = 2.0;
    inst.price.drift = 0.0;
    inst.price.sigma = sigma;
    inst.price.dt = 1.0;
    return inst;
}

}  // namespace

TEST_CASE("regression pricing rejects starved inputs") {
    const auto inst = make_option(40.0, 36.0, 0.2, 0.06, 0.0, 0.5, 0.05, true);
    CHECK_THROWS_AS(rex::longstaff_schwartz(inst, 99, 1u), rex::invalid_spec);
    auto skewed = inst;
    skewed.dt = 0.21;
    CHECK_THROWS_AS(rex::longstaff_schwartz(skewed, 1000, 1u), rex::invalid_spec);
}

TEST_CASE("a riskless deep put exercises immediately at intrinsic value") {
    // Flat paths grow at the riskless rate, so the discounted put payoff
    // K e^{-r tau dt} - s0 shrinks with every epoch and the best stop is now.
    const auto inst = make_option(40.0, 48.0, 0.0, 0.05, 0.0, 1.0, 0.25, false);
    const auto res = rex::longstaff_schwartz(inst, 200, 11u);
    CHECK(res.price == doctest::Approx(8.0));
    CHECK(res.std_error == doctest::Approx(0.0));
    REQUIRE(res.exercise_time.size() == 200);
    for (double t : res.exercise_time) CHECK(t == doctest::Approx(0.0));

    // Identical paths cannot support a rank-3 regression, so no epoch is
    // fitted and the exercise rule abstains.
    for (bool f : res.fitted) CHECK_FALSE(f);
    CHECK_FALSE(res.exercise_now(inst, 1, 30.0));
    CHECK_THROWS_AS(res.exercise_now(inst, 0, 30.0), rex::index_out_of_range);
    CHECK_THROWS_AS(res.exercise_now(inst, 5, 30.0), rex::index_out_of_range);
}

TEST_CASE("call pricing agrees with European sampling when early exercise is idle") {
    const auto inst = make_option(40.0, 36.0, 0.2, 0.06, 0.0, 0.5, 0.05, true);
    const auto res = rex::longstaff_schwartz(inst, 20000, 777u);

    // Without dividends the American call is European, so a plain terminal
    // Monte Carlo estimate must match within sampling error.
    rex::gbm_params dyn;
    dyn.s0 = 40.0;
    dyn.drift = 0.06;
    dyn.sigma = 0.2;
    dyn.dt = 0.05;
    dyn.steps = 10;
    const rex::counter_rng base(888u);
    double sum = 0.0, sum_sq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const auto path = rex::gbm_path(dyn, base.split(static_cast<std::uint64_t>(i)));
        const double pay = std::exp(-0.06 * 0.5) * std::max(path[10] - 36.0, 0.0);
        sum += pay;
        sum_sq += pay * pay;
    }
    const double euro = sum / n;
    const double euro_se = std::sqrt((sum_sq / n - euro * euro) / n);
    const double combined = std::sqrt(euro_se * euro_se + res.std_error * res.std_error);
    CHECK(std::abs(res.price - euro) <= 3.0 * combined + 0.01 * euro);

    oracle::lattice_inputs ref;
    ref.s0 = 40.0;
    ref.strike = 36.0;
    ref.rate = 0.06;
    ref.sigma = 0.2;
    ref.maturity = 0.5;
    ref.steps = 2000;
    ref.is_call = true;
    const double lattice = oracle::lattice_price(ref);
    CHECK(std::abs(res.price - lattice) <= 3.0 * res.std_error + 0.02 * lattice);
}

TEST_CASE("put pricing tracks the lattice benchmark") {
    const auto inst = make_option(36.0, 40.0, 0.3, 0.05, 0.05, 0.5, 0.05, false);
    const auto res = rex::longstaff_schwartz(inst, 20000, 555u);

    oracle::lattice_inputs ref;
    ref.s0 = 36.0;
    ref.strike = 40.0;
    ref.rate = 0.05;
    ref.dividend = 0.05;
    ref.sigma = 0.3;
    ref.maturity = 0.5;
    ref.steps = 2000;
    ref.is_call = false;
    const double lattice = oracle::lattice_price(ref);
    CHECK(std::abs(res.price - lattice) <= 0.02 * lattice + 3.0 * res.std_error);

    CHECK(std::any_of(res.fitted.begin(), res.fitted.end(), [](bool f) { return f; }));
    CHECK_FALSE(res.exercise_now(inst, 3, 1000.0));  // no payoff, no exercise
}

TEST_CASE("belief ladder grows linearly on distinguishable modes") {
    const auto inst = two_mode_belief_car();
    const auto res = rex::belief_value_iteration(inst, 3, 1.0, 4);

    // Identity transitions keep one-hot beliefs put, so each sweep adds the
    // best single-epoch reward of that mode.
    CHECK(res.value(one_hot(2, 0), 2) == doctest::Approx(4.0));
    CHECK(res.value(one_hot(2, 1), 2) == doctest::Approx(6.0));
    Eigen::VectorXd mixed(2);
    mixed << 0.5, 0.5;
    CHECK(res.value(mixed, 2) == doctest::Approx(4.5));

    CHECK(res.act(one_hot(2, 0), 1) == 0);
    CHECK(res.act(one_hot(2, 1), 1) == 1);

    CHECK_FALSE(res.converged);
    CHECK(res.sweeps == 4);
    CHECK(res.final_delta == doctest::Approx(3.0));
    // Horizons past the stored ladder clamp to the deepest sweep.
    CHECK(res.value(one_hot(2, 0), 99) == doctest::Approx(8.0));
}

TEST_CASE("a discounted belief ladder converges to the geometric limit") {
    const auto inst = two_mode_belief_car();
    const auto res = rex::belief_value_iteration(inst, 3, 0.9, 1000);
    CHECK(res.converged);
    CHECK(res.final_delta < 1e-6);
    CHECK(res.value(one_hot(2, 0), res.sweeps) == doctest::Approx(20.0).epsilon(1e-6));
    CHECK(res.value(one_hot(2, 1), res.sweeps) == doctest::Approx(30.0).epsilon(1e-6));
    Eigen::VectorXd mixed(2);
    mixed << 0.5, 0.5;
    CHECK(res.value(mixed, res.sweeps) == doctest::Approx(24.5).epsilon(1e-6));
}

TEST_CASE("braking beliefs earn nothing") {
    rex::hybrid_instance inst;
    inst.mileage = Eigen::MatrixXd(3, 2);
    inst.mileage << 2.0, 1.0, 1.0, 3.0, 0.0, 0.0;
    inst.transition = Eigen::MatrixXd(3, 3);
    inst.transition << 0.4, 0.4, 0.2, 0.3, 0.5, 0.2, 0.5, 0.5, 0.0;
    inst.quantum = 1.0;
    inst.braking_mode = 2;
    const auto res = rex::belief_value_iteration(inst, 2, 1.0, 1);
    CHECK(res.value(one_hot(3, 2), 1) == doctest::Approx(0.0));
    CHECK(res.value(one_hot(3, 0), 1) == doctest::Approx(2.0));
}

TEST_CASE("belief iteration validates its inputs") {
    const auto inst = two_mode_belief_car();
    CHECK_THROWS_AS(rex::belief_value_iteration(inst, 1, 0.9), rex::invalid_spec);
    CHECK_THROWS_AS(rex::belief_value_iteration(inst, 3, 0.9, 0), rex::invalid_spec);
    auto wide = inst;
    wide.mileage = Eigen::MatrixXd::Ones(2, 3);
    CHECK_THROWS_AS(rex::belief_value_iteration(wide, 3, 0.9), rex::invalid_spec);
}

TEST_CASE("flat prices reduce the bunkering recursion to distance times price") {
    SUBCASE("one leg buys exactly the leg") {
        const auto inst = shuttle_route({1, 2}, 0.0, 0.0);
        const auto res = rex::scenario_dp_bunkering(inst, 200, 5, 21u);
        CHECK(res.expected_cost == doctest::Approx(8.0));
        CHECK(res.act(1, 0.0, 2.0) == 4);
        CHECK(res.act(1, 2.0, 2.0) == 2);
        CHECK(res.act(2, 0.0, 2.0) == 0);
        CHECK_THROWS_AS(res.act(0, 0.0, 2.0), rex::index_out_of_range);
        CHECK_THROWS_AS(res.act(3, 0.0, 2.0), rex::index_out_of_range);
    }

    SUBCASE("a docking fee is paid once per forced refuel") {
        const auto inst = shuttle_route({1, 2}, 0.0, 3.0);
        const auto res = rex::scenario_dp_bunkering(inst, 200, 5, 21u);
        CHECK(res.expected_cost == doctest::Approx(11.0));
    }

    SUBCASE("two legs cost the full round trip") {
        const auto inst = shuttle_route({1, 2, 1}, 0.0, 0.0);
        const auto res = rex::scenario_dp_bunkering(inst, 200, 5, 21u);
        CHECK(res.expected_cost == doctest::Approx(16.0));
    }

    SUBCASE("degenerate inputs are rejected") {
        const auto inst = shuttle_route({1, 2}, 0.0, 0.0);
        CHECK_THROWS_AS(rex::scenario_dp_bunkering(inst, 0, 5, 1u), rex::invalid_spec);
        CHECK_THROWS_AS(rex::scenario_dp_bunkering(inst, 200, 0, 1u), rex::invalid_spec);
    }
}

TEST_CASE("replaying the bunkering policy reproduces its own forecast") {
    const auto inst = shuttle_route({1, 2, 1}, 0.3, 0.5);
    const int scenarios = 2000;
    const auto res = rex::scenario_dp_bunkering(inst, scenarios, 20, 313u);

    // Walk the fitted policy over the very scenario paths the recursion was
    // estimated from; the only gap left is within-bin price dispersion at the
    // second port, bounded by half a bin width per unit bought there.
    rex::gbm_params dyn = inst.price;
    dyn.steps = 2;
    const rex::counter_rng base(313u);
    double total = 0.0;
    int max_second_buy = 0;
    for (int i = 0; i < scenarios; ++i) {
        const auto path = rex::gbm_path(dyn, base.split(static_cast<std::uint64_t>(i)));
        double cost = 0.0;
        int fuel = 0;
        const int q1 = res.act(1, fuel, path[0]);
        if (q1 > 0) cost += 2.0 * q1 + 0.5;
        fuel += q1 - 4;
        REQUIRE(fuel >= 0);
        const int q2 = res.act(2, fuel, path[1]);
        if (q2 > 0) cost += path[1] * q2 + 0.5;
        max_second_buy = std::max(max_second_buy, q2);
        fuel += q2 - 4;
        REQUIRE(fuel >= 0);
        total += cost;
    }
    const double replayed = total / scenarios;
    const auto& mid = res.port_prices[1];
    const double half_width = (mid.hi - mid.lo) / (2.0 * mid.bins());
    CHECK(std::abs(replayed - res.expected_cost) <= half_width * max_second_buy + 1e-9);
}
