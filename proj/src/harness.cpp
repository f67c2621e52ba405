#include "rex/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <tuple>

#include "rex/baselines.hpp"
#include "rex/config_io.hpp"
#include "rex/env_hybrid.hpp"
#include "rex/env_maritime.hpp"
#include "rex/env_options.hpp"

namespace rex {

namespace {

constexpr int kScenarioCount = 2000;  // scenario-dp fit paths
constexpr int kScenarioBins = 50;     // scenario-dp price bins
constexpr int kBeliefGrid = 21;       // belief-vi points per simplex edge
constexpr int kLsPaths = 10000;       // regression-pricer fit paths

int algorithm_index(const std::string& name) {
    if (name == "uct") return 0;
    if (name == "uct-vc") return 1;
    if (name == "ments") return 2;
    if (name == "ments-vc") return 3;
    if (name == "baseline") return 4;
    throw config_error("unknown algorithm " + name);
}

mcts_config shape_config(const mcts_config& base, const std::string& algo) {
    mcts_config c = base;
    c.variant = algo.rfind("ments", 0) == 0 ? search_variant::ments : search_variant::uct;
    c.value_clipped = algo.size() > 3 && algo.substr(algo.size() - 3) == "-vc";
    return c;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct loaded_experiment {
    std::string dir;
    std::unique_ptr<environment> env;
    mcts_config base;
    std::int64_t budget = 0;
};

loaded_experiment load_experiment(const experiment_config& cfg) {
    loaded_experiment lx;
    lx.dir = cfg.config_dir.empty() ? default_config_dir() : cfg.config_dir;
    lx.env = make_environment(cfg.env, lx.dir, cfg.config_row);
    lx.base = default_search_config(cfg.env, lx.dir, cfg.config_row);
    if (cfg.bound_samples > 0) lx.base.bound_samples = cfg.bound_samples;

    const std::int64_t requested =
        cfg.iteration_budget > 0 ? cfg.iteration_budget : lx.base.iteration_budget;
    const budget_decision dec =
        enforce_budget(lx.env->dimension(), lx.env->budget_horizon(), requested);
    if (cfg.override_budget_rule) {
        lx.budget = requested;
    } else if (dec.refused) {
        throw budget_violation("budget rule yields a zero cap for " + cfg.env +
                               "; rerun with the override flag to force it");
    } else {
        lx.budget = dec.effective;
    }
    return lx;
}

// Baseline policies, one per environment family. Fit artifacts are cached by
// fit seed so repeated episodes reuse them.
class baseline_runner {
  public:
    baseline_runner(const std::string& family, const std::string& dir, char row)
        : family_(family) {
        if (family == "maritime") {
            maritime_ = load_maritime(dir, row);
        } else if (family == "hybrid" || family == "hybrid-expanded") {
            hybrid_ = load_hybrid(dir, row, family == "hybrid-expanded");
            const mcts_config shared = default_search_config(family, dir, row);
            vi_ = belief_value_iteration(hybrid_, kBeliefGrid, shared.discount);
            hmm_.n_modes = static_cast<int>(hybrid_.mileage.rows());
            hmm_.transition = hybrid_.transition;
            hmm_.emission_mean = hybrid_.mileage;
            hmm_.emission_noise = 0.0;
            hmm_.initial = hybrid_.initial_mode_dist.size() != 0
                               ? hybrid_.initial_mode_dist
                               : Eigen::VectorXd::Constant(hmm_.n_modes, 1.0 / hmm_.n_modes);
        } else if (family == "options") {
            option_ = load_option(dir, row);
        } else if (family == "options-basket") {
            basket_ = load_basket(dir, row);
        } else {
            throw config_error("no baseline for environment " + family);
        }
    }

    double run_episode(const environment& env, std::uint64_t env_seed,
                       std::uint64_t policy_seed) {
        const std::uint64_t fit_seed = counter_rng(policy_seed).split(31).key();
        counter_rng ep_rng = counter_rng(env_seed).split(9001);
        state s = env.initial_state(ep_rng);
        double total = 0.0;

        if (family_ == "maritime") {
            const scenario_dp_result& dp = fit_scenario(fit_seed);
            while (!env.is_terminal(s)) {
                const action_window w = env.window(s);
                const double fuel = maritime_.tank_capacity - s.capacity[0];
                const double q = dp.act(s.t, fuel, s.context[0]);
                const action_vector a =
                    Eigen::VectorXd::Constant(1, std::clamp(q, w.lower, w.upper));
                total += env.reward(s, a);
                s = env.sample_next(s, a, ep_rng);
            }
            return total;
        }

        if (family_ == "hybrid" || family_ == "hybrid-expanded") {
            const auto& henv = static_cast<const hybrid_env&>(env);
            belief b = filter_initial(s.context.head(hmm_.emission_mean.cols()));
            while (!env.is_terminal(s)) {
                action_vector a = Eigen::VectorXd::Zero(env.dimension());
                if (!henv.braking(s.tag)) {
                    const int f = vi_.act(b, env.horizon() - s.t + 1);
                    const double budget = std::min(hybrid_.quantum, s.capacity.sum());
                    a[f] = std::min(budget, s.capacity[f]);
                    double left = budget - a[f];
                    for (int i = 0; i < env.dimension() && left > 1e-12; ++i) {
                        if (i == f) continue;
                        const double take = std::min(left, s.capacity[i]);
                        a[i] = take;
                        left -= take;
                    }
                }
                total += env.reward(s, a);
                s = env.sample_next(s, a, ep_rng);
                if (!env.is_terminal(s))
                    b = belief_update(hmm_, b, s.context.head(hmm_.emission_mean.cols()));
            }
            return total;
        }

        if (family_ == "options") {
            const ls_result& ls = fit_option(fit_seed);
            while (!env.is_terminal(s)) {
                double exercise = 0.0;
                if (s.capacity[0] > 0.5) {
                    if (s.t > option_.steps())
                        exercise = 1.0;  // maturity settles
                    else if (ls.exercise_now(option_, s.t, s.context[0]))
                        exercise = 1.0;
                }
                const action_vector a = Eigen::VectorXd::Constant(1, exercise);
                total += env.reward(s, a);
                s = env.sample_next(s, a, ep_rng);
            }
            return total;
        }

        const std::vector<ls_result>& legs = fit_basket(fit_seed);
        const auto& benv = static_cast<const basket_env&>(env);
        while (!env.is_terminal(s)) {
            action_vector a = Eigen::VectorXd::Zero(env.dimension());
            if (s.t > basket_.steps()) {
                a = (s.capacity.array() > 0.5).cast<double>().matrix();
            } else {
                std::vector<std::pair<double, int>> wanting;
                for (int i = 0; i < env.dimension(); ++i) {
                    if (s.capacity[i] < 0.5) continue;
                    option_instance leg;
                    leg.leg = basket_.legs[static_cast<std::size_t>(i)];
                    leg.maturity = basket_.maturity;
                    leg.rate = basket_.rate;
                    leg.dt = basket_.dt;
                    if (legs[static_cast<std::size_t>(i)].exercise_now(leg, s.t, s.context[i]))
                        wanting.push_back({benv.discounted_payoff(s.t, i, s.context[i]), i});
                }
                std::sort(wanting.begin(), wanting.end(), [](const auto& x, const auto& y) {
                    if (x.first != y.first) return x.first > y.first;
                    return x.second < y.second;
                });
                const int cap = basket_.exercise_cap;
                for (int j = 0; j < static_cast<int>(wanting.size()) && j < cap; ++j)
                    a[wanting[static_cast<std::size_t>(j)].second] = 1.0;
            }
            total += env.reward(s, a);
            s = env.sample_next(s, a, ep_rng);
        }
        return total;
    }

  private:
    const scenario_dp_result& fit_scenario(std::uint64_t seed) {
        auto it = scenario_fits_.find(seed);
        if (it == scenario_fits_.end())
            it = scenario_fits_
                     .emplace(seed, scenario_dp_bunkering(maritime_, kScenarioCount,
                                                          kScenarioBins, seed))
                     .first;
        return it->second;
    }

    const ls_result& fit_option(std::uint64_t seed) {
        auto it = option_fits_.find(seed);
        if (it == option_fits_.end())
            it = option_fits_.emplace(seed, longstaff_schwartz(option_, kLsPaths, seed)).first;
        return it->second;
    }

    const std::vector<ls_result>& fit_basket(std::uint64_t seed) {
        auto it = basket_fits_.find(seed);
        if (it == basket_fits_.end()) {
            std::vector<ls_result> fits;
            for (std::size_t i = 0; i < basket_.legs.size(); ++i) {
                option_instance leg;
                leg.leg = basket_.legs[i];
                leg.maturity = basket_.maturity;
                leg.rate = basket_.rate;
                leg.dt = basket_.dt;
                fits.push_back(longstaff_schwartz(
                    leg, kLsPaths, counter_rng(seed).split(i).key()));
            }
            it = basket_fits_.emplace(seed, std::move(fits)).first;
        }
        return it->second;
    }

    belief filter_initial(const Eigen::VectorXd& obs) const {
        belief b = hmm_.initial;
        for (int m = 0; m < hmm_.n_modes; ++m)
            if ((hmm_.emission_mean.row(m).transpose() - obs).cwiseAbs().maxCoeff() > 1e-9)
                b[m] = 0.0;
        const double total = b.sum();
        if (total <= 0.0) throw zero_likelihood("observation matches no mode");
        return b / total;
    }

    std::string family_;
    maritime_instance maritime_;
    hybrid_instance hybrid_;
    option_instance option_;
    basket_instance basket_;
    belief_vi_result vi_;
    hmm_spec hmm_;
    std::map<std::uint64_t, scenario_dp_result> scenario_fits_;
    std::map<std::uint64_t, ls_result> option_fits_;
    std::map<std::uint64_t, std::vector<ls_result>> basket_fits_;
};

}  // namespace

budget_decision enforce_budget(int dimension, int horizon, std::int64_t requested, double k_c) {
    if (dimension < 1 || horizon < 1)
        throw invalid_spec({"budget rule needs dimension and horizon at least 1"});
    budget_decision d;
    d.requested = requested;
    const double cap_f = std::floor(k_c * std::pow(2.0 * dimension, horizon));
    const std::int64_t cap = cap_f > 9.0e18 ? std::numeric_limits<std::int64_t>::max()
                                            : static_cast<std::int64_t>(cap_f);
    if (cap <= 0) {
        d.effective = 0;
        d.refused = true;
        d.truncated = requested > 0;
        return d;
    }
    d.effective = std::min(requested, cap);
    d.truncated = d.effective < requested;
    return d;
}

std::unique_ptr<environment> make_environment(const std::string& env, const std::string& dir,
                                              char row) {
    if (env == "maritime") return std::make_unique<maritime_env>(load_maritime(dir, row));
    if (env == "hybrid") return std::make_unique<hybrid_env>(load_hybrid(dir, row, false));
    if (env == "hybrid-expanded")
        return std::make_unique<hybrid_env>(load_hybrid(dir, row, true));
    if (env == "options") return std::make_unique<options_env>(load_option(dir, row));
    if (env == "options-basket") return std::make_unique<basket_env>(load_basket(dir, row));
    throw config_error("unknown environment " + env);
}

std::string baseline_name(const std::string& env) {
    if (env == "maritime") return "scenario-dp";
    if (env == "hybrid" || env == "hybrid-expanded") return "belief-vi";
    if (env == "options" || env == "options-basket") return "ls-baseline";
    throw config_error("no baseline for environment " + env);
}

double run_search_episode(const environment& env, const mcts_config& base,
                          std::uint64_t env_seed, std::uint64_t search_seed,
                          std::int64_t budget) {
    counter_rng ep_rng = counter_rng(env_seed).split(9001);
    state s = env.initial_state(ep_rng);
    double total = 0.0;
    int epoch = 0;
    while (!env.is_terminal(s)) {
        mcts_config c = base;
        c.iteration_budget = budget;
        c.seed = counter_rng(search_seed).split2(17, static_cast<std::uint64_t>(epoch)).key();
        const search_result r = search(env, s, c);
        if (r.best_action_index < 0)
            throw no_actions("search returned no action for a non-terminal state");
        total += env.reward(s, r.best_action);
        s = env.sample_next(s, r.best_action, ep_rng);
        ++epoch;
    }
    return total;
}

std::vector<result_row> run_experiment(const experiment_config& cfg) {
    const loaded_experiment lx = load_experiment(cfg);
    const bool cost_sense = lx.env->sense() == objective_sense::cost;

    std::unique_ptr<baseline_runner> baseline;
    std::vector<result_row> rows;
    for (const std::string& algo : cfg.algorithms) {
        const int idx = algorithm_index(algo);
        if (algo == "baseline" && !baseline)
            baseline = std::make_unique<baseline_runner>(cfg.env, lx.dir, cfg.config_row);
        const mcts_config shaped = algo == "baseline" ? lx.base : shape_config(lx.base, algo);

        for (int seed = cfg.seed_lo; seed <= cfg.seed_hi; ++seed) {
            for (int episode = 0; episode < cfg.episodes; ++episode) {
                // Environment randomness is keyed only by (seed, episode) so
                // algorithm comparisons stay paired on the same realizations.
                const std::uint64_t env_seed =
                    counter_rng(static_cast<std::uint64_t>(seed))
                        .split2(1000, static_cast<std::uint64_t>(episode))
                        .key();
                const std::uint64_t policy_seed =
                    counter_rng(static_cast<std::uint64_t>(seed))
                        .split2(static_cast<std::uint64_t>(idx),
                                static_cast<std::uint64_t>(episode))
                        .key();
                const auto started = std::chrono::steady_clock::now();
                double total = 0.0;
                try {
                    total = algo == "baseline"
                                ? baseline->run_episode(*lx.env, env_seed, policy_seed)
                                : run_search_episode(*lx.env, shaped, env_seed, policy_seed,
                                                     lx.budget);
                } catch (const error& e) {
                    throw error(cfg.env + " row " + std::string(1, cfg.config_row) + " " + algo +
                                " seed " + std::to_string(seed) + " episode " +
                                std::to_string(episode) + ": " + e.what());
                }
                const auto ended = std::chrono::steady_clock::now();

                result_row row;
                row.env = cfg.env;
                row.config_row = cfg.config_row;
                row.algorithm = algo == "baseline" ? baseline_name(cfg.env) : algo;
                row.seed = seed;
                row.episode = episode;
                row.cumulative = cost_sense ? -total : total;
                row.sense = cost_sense ? "cost" : "reward";
                row.wall_ms =
                    std::chrono::duration<double, std::milli>(ended - started).count();
                rows.push_back(std::move(row));
            }
        }
    }

    std::sort(rows.begin(), rows.end(), [](const result_row& a, const result_row& b) {
        return std::tie(a.env, a.config_row, a.algorithm, a.seed, a.episode) <
               std::tie(b.env, b.config_row, b.algorithm, b.seed, b.episode);
    });
    if (!cfg.out_path.empty()) write_results_csv(cfg.out_path, rows);
    return rows;
}

std::vector<convergence_row> track_convergence(const experiment_config& cfg,
                                               std::int64_t budget_max) {
    experiment_config adjusted = cfg;
    adjusted.iteration_budget = budget_max;
    const loaded_experiment lx = load_experiment(adjusted);
    const std::vector<std::int64_t> samples = log_spaced(lx.budget);

    std::vector<convergence_row> rows;
    for (const std::string& algo : cfg.algorithms) {
        const int idx = algorithm_index(algo);
        if (algo == "baseline")
            throw config_error("convergence tracking only applies to search variants");
        for (int seed = cfg.seed_lo; seed <= cfg.seed_hi; ++seed) {
            mcts_config c = shape_config(lx.base, algo);
            c.iteration_budget = lx.budget;
            c.seed = counter_rng(static_cast<std::uint64_t>(seed))
                         .split2(static_cast<std::uint64_t>(idx), 0)
                         .key();
            const std::uint64_t env_seed =
                counter_rng(static_cast<std::uint64_t>(seed)).split2(1000, 0).key();
            counter_rng init_rng = counter_rng(env_seed).split(9001);
            const state root = lx.env->initial_state(init_rng);
            const search_result r = search(*lx.env, root, c);

            value_interval bounds = r.root_bounds;
            if (!c.value_clipped)
                bounds = value_bounds(*lx.env, root, c.bound_samples,
                                      counter_rng(c.seed).split(0xB07D).split(0));

            for (std::int64_t it : samples) {
                convergence_row row;
                row.env = cfg.env;
                row.config_row = cfg.config_row;
                row.algorithm = algo;
                row.seed = seed;
                row.iteration = it;
                row.root_value = r.root_value_trace[static_cast<std::size_t>(it - 1)];
                row.v_lower = bounds.lower;
                row.v_upper = bounds.upper;
                rows.push_back(std::move(row));
            }
        }
    }

    std::sort(rows.begin(), rows.end(), [](const convergence_row& a, const convergence_row& b) {
        return std::tie(a.env, a.config_row, a.algorithm, a.seed, a.iteration) <
               std::tie(b.env, b.config_row, b.algorithm, b.seed, b.iteration);
    });
    if (!cfg.out_path.empty()) write_convergence_csv(cfg.out_path, rows);
    return rows;
}

std::vector<std::pair<std::int64_t, double>> compute_simple_regret(
    double oracle_value, const std::vector<std::pair<std::int64_t, double>>& estimates) {
    std::vector<std::pair<std::int64_t, double>> out;
    out.reserve(estimates.size());
    for (const auto& [budget, estimate] : estimates)
        out.push_back({budget, std::max(0.0, oracle_value - estimate)});
    return out;
}

std::vector<std::int64_t> log_spaced(std::int64_t max_value) {
    if (max_value < 1) throw invalid_spec({"log spacing needs a positive maximum"});
    std::vector<std::int64_t> out;
    for (std::int64_t decade = 1;; decade *= 10) {
        for (std::int64_t mult : {1, 2, 5}) {
            const std::int64_t v = decade * mult;
            if (v > max_value) {
                if (out.empty() || out.back() != max_value) out.push_back(max_value);
                return out;
            }
            out.push_back(v);
        }
        if (decade > max_value / 10) {
            if (out.back() != max_value) out.push_back(max_value);
            return out;
        }
    }
}

void write_results_csv(const std::string& path, const std::vector<result_row>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot write " + path);
    out << "env,config_row,algorithm,seed,episode,cumulative_reward,sense,wall_time_ms\n";
    for (const result_row& r : rows)
        out << r.env << ',' << r.config_row << ',' << r.algorithm << ',' << r.seed << ','
            << r.episode << ',' << format_double(r.cumulative) << ',' << r.sense << ','
            << format_double(r.wall_ms) << '\n';
}

void write_convergence_csv(const std::string& path, const std::vector<convergence_row>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot write " + path);
    out << "env,config_row,algorithm,seed,iteration,root_value_estimate,v_lower,v_upper\n";
    for (const convergence_row& r : rows)
        out << r.env << ',' << r.config_row << ',' << r.algorithm << ',' << r.seed << ','
            << r.iteration << ',' << format_double(r.root_value) << ','
            << format_double(r.v_lower) << ',' << format_double(r.v_upper) << '\n';
}

}  // namespace rex
