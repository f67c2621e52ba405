#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rex/config_io.hpp"
#include "rex/harness.hpp"

namespace {

struct seed_range {
    int lo = 0;
    int hi = 99;
};

seed_range parse_seeds(const std::string& text) {
    seed_range r;
    const auto dots = text.find("..");
    try {
        if (dots == std::string::npos) {
            r.lo = r.hi = std::stoi(text);
        } else {
            r.lo = std::stoi(text.substr(0, dots));
            r.hi = std::stoi(text.substr(dots + 2));
        }
    } catch (const std::exception&) {
        throw CLI::ValidationError("--seeds", "expected <n> or <a>..<b>, got " + text);
    }
    if (r.lo > r.hi) throw CLI::ValidationError("--seeds", "range is inverted: " + text);
    return r;
}

void print_summary(const std::vector<rex::result_row>& rows) {
    std::map<std::string, std::pair<double, int>> totals;
    for (const auto& row : rows) {
        auto& [sum, n] = totals[row.algorithm];
        sum += row.cumulative;
        ++n;
    }
    for (const auto& [algo, acc] : totals)
        std::printf("%-12s mean %s over %d episodes: %.6g\n", algo.c_str(),
                    rows.front().sense.c_str(), acc.second, acc.first / acc.second);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Closed-loop planning experiments on stochastic allocation environments"};
    app.require_subcommand(1);

    const std::vector<std::string> env_names = {"maritime", "hybrid", "hybrid-expanded",
                                                "options", "options-basket"};

    rex::experiment_config cfg;
    std::string seeds_text = "0..99";
    std::string config_text = "A";
    cfg.algorithms = {"uct", "uct-vc", "ments", "ments-vc"};

    auto add_shared = [&](CLI::App* cmd) {
        cmd->add_option("--env", cfg.env, "environment name")
            ->required()
            ->check(CLI::IsMember(env_names));
        cmd->add_option("--config", config_text, "config row A..F")
            ->check(CLI::IsMember({"A", "B", "C", "D", "E", "F"}));
        cmd->add_option("--config-dir", cfg.config_dir, "directory holding the config tables");
    };
    auto add_run_shared = [&](CLI::App* cmd) {
        add_shared(cmd);
        cmd->add_option("--algo", cfg.algorithms,
                        "algorithms: uct, uct-vc, ments, ments-vc, baseline")
            ->delimiter(',');
        cmd->add_option("--seeds", seeds_text, "seed range <a>..<b> or single seed");
        cmd->add_option("--budget", cfg.iteration_budget,
                        "iteration budget (0 = table default)");
        cmd->add_flag("--override-budget", cfg.override_budget_rule,
                      "bypass the iteration-budget rule");
        cmd->add_option("--bound-samples", cfg.bound_samples,
                        "trajectories per value bracket (0 = search default)");
        cmd->add_option("--threads", cfg.threads, "worker threads (0 = hardware)");
        cmd->add_option("--out", cfg.out_path, "output CSV path")->required();
    };

    CLI::App* run = app.add_subcommand("run", "closed-loop episodes to a results CSV");
    add_run_shared(run);
    run->add_option("--episodes", cfg.episodes, "episodes per (algorithm, seed)")
        ->check(CLI::PositiveNumber);

    CLI::App* converge = app.add_subcommand("converge", "root-value traces to a CSV");
    add_run_shared(converge);
    std::int64_t budget_max = 0;
    converge->add_option("--budget-max", budget_max, "largest iteration budget")
        ->required()
        ->check(CLI::PositiveNumber);

    CLI::App* oracle =
        app.add_subcommand("oracle", "Monte Carlo value bracket at the initial state");
    add_shared(oracle);
    int oracle_seed = 0;
    int oracle_samples = 1000;
    oracle->add_option("--seed", oracle_seed, "seed for the bracket");
    oracle->add_option("--samples", oracle_samples, "trajectories in the bracket")
        ->check(CLI::PositiveNumber);

    CLI::App* validate = app.add_subcommand("validate", "check a config file");
    std::string validate_path;
    validate->add_option("file", validate_path, "config file to check")->required();

    CLI11_PARSE(app, argc, argv);
    cfg.config_row = config_text[0];
    const seed_range seeds = parse_seeds(seeds_text);
    cfg.seed_lo = seeds.lo;
    cfg.seed_hi = seeds.hi;

    try {
        if (app.got_subcommand(run)) {
            const auto rows = rex::run_experiment(cfg);
            std::printf("wrote %zu rows to %s\n", rows.size(), cfg.out_path.c_str());
            if (!rows.empty()) print_summary(rows);
        } else if (app.got_subcommand(converge)) {
            const auto rows = rex::track_convergence(cfg, budget_max);
            std::printf("wrote %zu rows to %s\n", rows.size(), cfg.out_path.c_str());
        } else if (app.got_subcommand(oracle)) {
            const std::string dir =
                cfg.config_dir.empty() ? rex::default_config_dir() : cfg.config_dir;
            const auto env = rex::make_environment(cfg.env, dir, cfg.config_row);
            const rex::mcts_config base = rex::default_search_config(cfg.env, dir, cfg.config_row);
            rex::counter_rng init_rng =
                rex::counter_rng(static_cast<std::uint64_t>(oracle_seed)).split(9001);
            const rex::state root = env->initial_state(init_rng);
            const rex::value_interval vb = rex::value_bounds(
                *env, root, oracle_samples,
                rex::counter_rng(static_cast<std::uint64_t>(oracle_seed)).split(0xB07D));
            const rex::budget_decision dec = rex::enforce_budget(
                env->dimension(), env->budget_horizon(), base.iteration_budget);
            std::printf("env=%s row=%c seed=%d samples=%d\n", cfg.env.c_str(), cfg.config_row,
                        oracle_seed, oracle_samples);
            std::printf("v_lower=%.10g v_upper=%.10g gap=%.10g spread=%.10g\n", vb.lower,
                        vb.upper, vb.gap, vb.spread);
            std::printf("budget: requested=%lld effective=%lld truncated=%s refused=%s\n",
                        static_cast<long long>(dec.requested),
                        static_cast<long long>(dec.effective), dec.truncated ? "yes" : "no",
                        dec.refused ? "yes" : "no");
        } else if (app.got_subcommand(validate)) {
            const auto violations = rex::validate_config_file(validate_path);
            if (violations.empty()) {
                std::printf("%s: ok\n", validate_path.c_str());
            } else {
                for (const auto& v : violations)
                    std::fprintf(stderr, "%s: %s\n", validate_path.c_str(), v.c_str());
                return 1;
            }
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
