#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "oracles/toy_dp.hpp"
#include "rex/mcts.hpp"
#include "rex/rng.hpp"
#include "rex/env_toy.hpp"

namespace {

rex::toy_instance single_arm(double rate) {
    rex::toy_instance d;
    d.horizon = 1;
    d.support = {{{rate, 1.0}}};
    d.inc_lower = 0.0;
    d.inc_upper = 1.0;
    d.total_lower = 0.0;
    d.total_upper = 1.0;
    return d;
}

rex::toy_instance forced_chain() {
    rex::toy_instance d;
    d.horizon = 3;
    d.support = {{{2.0, 1.0}}, {{1.0, 1.0}}, {{3.0, 1.0}}};
    d.inc_lower = 1.0;
    d.inc_upper = 1.0;
    d.total_lower = 0.0;
    d.total_upper = 10.0;
    return d;
}

}  // namespace

TEST_CASE("select_uct prefers untried actions, then the UCB score") {
    CHECK(rex::select_uct({0.0, 0.0, 0.0}, {1, 0, 2}, 3, 1.0) == 1);
    CHECK(rex::select_uct({0.0, 0.0}, {0, 0}, 0, 1.0) == 0);
    CHECK(rex::select_uct({1.0, 2.0}, {1, 1}, 2, 0.0) == 1);
    CHECK(rex::select_uct({1.0, 1.0}, {4, 1}, 8, 1.0) == 1);
    CHECK(rex::select_uct({1.0, 1.0}, {2, 2}, 4, 1.0) == 0);
    CHECK_THROWS_AS(rex::select_uct({}, {}, 0, 1.0), rex::no_actions);
}

TEST_CASE("update_uct keeps an exact incremental mean") {
    const auto first = rex::update_uct(0.0, 0, 5.0);
    CHECK(first.first == doctest::Approx(5.0));
    CHECK(first.second == 1);

    const auto second = rex::update_uct(5.0, 1, 3.0);
    CHECK(second.first == doctest::Approx(4.0));
    CHECK(second.second == 2);

    double q = 0.0;
    std::int64_t n = 0;
    for (int i = 0; i < 100; ++i) {
        const auto [nq, nn] = rex::update_uct(q, n, 7.0);
        q = nq;
        n = nn;
    }
    CHECK(n == 100);
    CHECK(q == doctest::Approx(7.0).epsilon(1e-12));
}

TEST_CASE("softmax_value interpolates between mean and max") {
    CHECK(rex::softmax_value({3.5}, 0.7) == doctest::Approx(3.5));
    CHECK(rex::softmax_value({2.0, 2.0}, 0.5) == doctest::Approx(2.0 + 0.5 * std::log(2.0)));
    CHECK(rex::softmax_value({1.0, 3.0}, 1e-4) == doctest::Approx(3.0).epsilon(1e-3));
    CHECK(rex::softmax_value({-50.0, -50.0}, 0.1) ==
          doctest::Approx(-50.0 + 0.1 * std::log(2.0)));
}

TEST_CASE("ments_policy mixes a Boltzmann step with uniform exploration") {
    const auto uniform = rex::ments_policy({9.0, -4.0}, 0.7, 1.0);
    CHECK(uniform[0] == doctest::Approx(0.5));
    CHECK(uniform[1] == doctest::Approx(0.5));

    const auto flat = rex::ments_policy({2.0, 2.0}, 0.7, 0.0);
    CHECK(flat[0] == doctest::Approx(0.5));

    const auto tilted = rex::ments_policy({0.0, std::log(3.0)}, 1.0, 0.0);
    CHECK(tilted[0] == doctest::Approx(0.25));
    CHECK(tilted[1] == doctest::Approx(0.75));

    const auto mixed = rex::ments_policy({0.0, std::log(3.0)}, 1.0, 0.2);
    CHECK(mixed[0] == doctest::Approx(0.3));
    CHECK(mixed[1] == doctest::Approx(0.7));

    rex::counter_rng rng(64u);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> q;
        for (int i = 0; i < 5; ++i) q.push_back(rng.uniform(-10.0, 10.0));
        const auto pi = rex::ments_policy(q, 0.3, 0.1);
        double total = 0.0;
        for (double p : pi) {
            CHECK(p >= 0.0);
            total += p;
        }
        CHECK(total == doctest::Approx(1.0));
    }
}

TEST_CASE("soft_q_update mixes child values by visit share") {
    CHECK(rex::soft_q_update(2.0, 1.0, {1}, {3.0}, 1) == doctest::Approx(5.0));
    CHECK(rex::soft_q_update(2.5, 1.0, {}, {}, 0) == doctest::Approx(2.5));
    CHECK(rex::soft_q_update(1.0, 1.0, {3, 1}, {4.0, 8.0}, 4) == doctest::Approx(6.0));
    CHECK(rex::soft_q_update(1.0, 0.5, {3, 1}, {4.0, 8.0}, 4) == doctest::Approx(3.5));
    CHECK_THROWS_AS(rex::soft_q_update(1.0, 1.0, {1, 1}, {4.0, 8.0}, 3),
                    rex::inconsistent_counts);
}

TEST_CASE("clipped_leaf_value projects into the bracket") {
    CHECK(rex::clipped_leaf_value(10.0, 0.0, 5.0) == doctest::Approx(5.0));
    CHECK(rex::clipped_leaf_value(3.0, 0.0, 5.0) == doctest::Approx(3.0));
    CHECK(rex::clipped_leaf_value(-1.0, 0.0, 5.0) == doctest::Approx(0.0));
    CHECK_THROWS_AS(rex::clipped_leaf_value(1.0, 2.0, 0.0), rex::inverted_bounds);
}

TEST_CASE("rollout walks the extreme actions to the depth limit") {
    rex::toy_env env(forced_chain());
    rex::counter_rng rng(7u);
    const auto root = env.initial_state(rng);

    rex::counter_rng roll(10u);
    CHECK(rex::rollout(env, root, 10, 1.0, roll) == doctest::Approx(6.0));
    CHECK(rex::rollout(env, root, 1, 1.0, roll) == doctest::Approx(2.0));
    CHECK(rex::rollout(env, root, 10, 0.5, roll) == doctest::Approx(3.25));
    CHECK(rex::rollout(env, root, 0, 1.0, roll) == doctest::Approx(0.0));

    rex::state done = root;
    done.t = 4;
    CHECK(rex::rollout(env, done, 10, 1.0, roll) == doctest::Approx(0.0));
}

TEST_CASE("search identifies the better arm of a one-shot bandit") {
    rex::mcts_config cfg;
    cfg.iteration_budget = 100;
    cfg.seed = 5;

    SUBCASE("positive rate favors consuming the maximum") {
        rex::toy_env env(single_arm(2.0));
        rex::counter_rng rng(1u);
        const auto root = env.initial_state(rng);
        const auto r = rex::search(env, root, cfg);
        CHECK(r.best_action_index == 0);
        CHECK(r.best_action(0) == doctest::Approx(1.0));
        CHECK(r.root_value == doctest::Approx(2.0).epsilon(0.2));
    }

    SUBCASE("negative rate favors consuming the minimum") {
        rex::toy_env env(single_arm(-2.0));
        rex::counter_rng rng(1u);
        const auto root = env.initial_state(rng);
        const auto r = rex::search(env, root, cfg);
        CHECK(r.best_action_index == 1);
        CHECK(r.best_action(0) == doctest::Approx(0.0));
    }
}

TEST_CASE("search bookkeeping matches the budget") {
    rex::toy_env env(rex::toy_instance::standard());
    rex::counter_rng rng(3u);
    const auto root = env.initial_state(rng);

    for (const auto variant : {rex::search_variant::uct, rex::search_variant::ments}) {
        rex::mcts_config cfg;
        cfg.variant = variant;
        cfg.iteration_budget = 257;
        cfg.seed = 11;
        const auto r = rex::search(env, root, cfg);
        CHECK(r.root_value_trace.size() == 257);
        std::int64_t visits = 0;
        for (auto v : r.action_visits) visits += v;
        CHECK(visits == 257);
        CHECK(r.best_action_index >= 0);
    }

    rex::mcts_config bad;
    bad.iteration_budget = 0;
    CHECK_THROWS_AS(rex::search(env, root, bad), rex::budget_violation);
    bad.iteration_budget = -3;
    CHECK_THROWS_AS(rex::search(env, root, bad), rex::budget_violation);
}

TEST_CASE("search replays exactly under a fixed seed") {
    rex::toy_env env(rex::toy_instance::standard());
    rex::counter_rng rng(3u);
    const auto root = env.initial_state(rng);

    rex::mcts_config cfg;
    cfg.iteration_budget = 400;
    cfg.seed = 21;
    const auto a = rex::search(env, root, cfg);
    const auto b = rex::search(env, root, cfg);
    CHECK(a.best_action_index == b.best_action_index);
    REQUIRE(a.root_value_trace.size() == b.root_value_trace.size());
    for (std::size_t i = 0; i < a.root_value_trace.size(); ++i)
        CHECK(a.root_value_trace[i] == b.root_value_trace[i]);

    cfg.seed = 22;
    const auto c = rex::search(env, root, cfg);
    bool any_diff = c.best_action_index != a.best_action_index;
    for (std::size_t i = 0; !any_diff && i < a.root_value_trace.size(); ++i)
        any_diff = a.root_value_trace[i] != c.root_value_trace[i];
    CHECK(any_diff);
}

TEST_CASE("both search variants approach the exact optimum") {
    rex::toy_env env(rex::toy_instance::standard());
    rex::counter_rng rng(3u);
    const auto root = env.initial_state(rng);
    const auto exact = oracle::solve_toy(oracle::toy_data::standard(), 10);
    REQUIRE(exact.value == doctest::Approx(4.875));

    rex::mcts_config uct;
    uct.iteration_budget = 20000;
    uct.seed = 40;
    const auto ru = rex::search(env, root, uct);
    CHECK(ru.best_action(0) == doctest::Approx(1.0));
    CHECK(std::abs(ru.root_value - exact.value) <= 0.05 * exact.value);

    rex::mcts_config ments;
    ments.variant = rex::search_variant::ments;
    ments.temperature = 0.05;
    ments.iteration_budget = 20000;
    ments.seed = 41;
    const auto rm = rex::search(env, root, ments);
    CHECK(rm.best_action(0) == doctest::Approx(1.0));
    CHECK(std::abs(rm.root_value - exact.value) <= 0.05 * exact.value);
}

TEST_CASE("value-clipped searches keep the root trace inside the bracket") {
    rex::toy_env env(rex::toy_instance::standard());
    rex::counter_rng rng(3u);
    const auto root = env.initial_state(rng);

    for (const auto variant : {rex::search_variant::uct, rex::search_variant::ments}) {
        rex::mcts_config cfg;
        cfg.variant = variant;
        cfg.value_clipped = true;
        cfg.bound_samples = 16;
        cfg.iteration_budget = 2000;
        cfg.clip_backed_up = true;
        cfg.seed = 77;
        const auto r = rex::search(env, root, cfg);
        CHECK(r.root_bounds.sample_count == 16);
        CHECK(r.root_bounds.lower <= r.root_bounds.upper + 1e-9);
        const double slack = 3.0 * r.root_bounds.spread / std::sqrt(16.0);
        for (double v : r.root_value_trace) {
            CHECK(v >= r.root_bounds.lower - slack - 1e-9);
            CHECK(v <= r.root_bounds.upper + slack + 1e-9);
        }
    }

    SUBCASE("plain searches leave the bracket empty") {
        rex::mcts_config cfg;
        cfg.iteration_budget = 50;
        cfg.seed = 1;
        const auto r = rex::search(env, root, cfg);
        CHECK(r.root_bounds.sample_count == 0);
    }

    SUBCASE("clipping needs a positive sample count") {
        rex::mcts_config cfg;
        cfg.value_clipped = true;
        cfg.bound_samples = 0;
        cfg.iteration_budget = 10;
        CHECK_THROWS_AS(rex::search(env, root, cfg), rex::error);
    }

    SUBCASE("sporadic clipping still completes") {
        rex::mcts_config cfg;
        cfg.value_clipped = true;
        cfg.clip_probability = 0.0;
        cfg.bound_samples = 8;
        cfg.iteration_budget = 200;
        cfg.seed = 5;
        const auto r = rex::search(env, root, cfg);
        CHECK(r.root_value_trace.size() == 200);
        CHECK(std::isfinite(r.root_value));
    }
}
