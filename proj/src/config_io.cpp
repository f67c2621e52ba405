#include "rex/config_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace rex {

namespace {

using nlohmann::json;

json parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot read " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw config_error(path + ": " + e.what());
    }
}

json row_of(const json& j, const std::string& path, char row) {
    const std::string key(1, row);
    if (!j.contains("rows") || !j["rows"].is_object())
        throw config_error(path + ": missing rows table");
    if (!j["rows"].contains(key)) throw config_error(path + ": unknown row " + key);
    return j["rows"][key];
}

Eigen::MatrixXd parse_matrix(const json& j, const std::string& what) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw config_error(what + " must be an array of arrays");
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (static_cast<Eigen::Index>(j[r].size()) != cols)
            throw config_error(what + " has ragged rows");
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

double number_at(const json& j, const std::string& path, const std::string& key) {
    if (!j.contains(key) || !j[key].is_number())
        throw config_error(path + ": missing numeric field " + key);
    return j[key].get<double>();
}

option_leg parse_leg(const json& j, const std::string& path) {
    option_leg leg;
    leg.s0 = number_at(j, path, "s0");
    leg.strike = number_at(j, path, "strike");
    leg.sigma = number_at(j, path, "sigma");
    leg.dividend = number_at(j, path, "dividend");
    const std::string type = j.value("type", "");
    if (type != "call" && type != "put")
        throw config_error(path + ": option type must be call or put");
    leg.is_call = type == "call";
    return leg;
}

coordinate_map map_of(const std::string& kind, double slope, double offset, int dim,
                      const std::string& what) {
    if (kind == "identity") return coordinate_map::identity(dim);
    if (kind == "constant") return coordinate_map::constant(dim, offset);
    if (kind == "affine") {
        coordinate_map m;
        m.parts.assign(static_cast<std::size_t>(dim),
                       [slope, offset](double x) { return slope * x + offset; });
        return m;
    }
    throw config_error(what + ": unknown map kind " + kind);
}

}  // namespace

std::string default_config_dir() { return REX_DEFAULT_CONFIG_DIR; }

maritime_instance load_maritime(const std::string& dir, char row) {
    const std::string prices_path = dir + "/maritime_prices.json";
    const std::string shared_path = dir + "/maritime_shared.json";
    const std::string routes_path = dir + "/maritime_routes.json";
    const json prices = parse_file(prices_path);
    const json shared = parse_file(shared_path);
    const json routes = parse_file(routes_path);

    maritime_instance inst;
    inst.distance = parse_matrix(routes.contains("distance") ? routes["distance"] : json(),
                                 routes_path + ": distance");
    const int n_ports = static_cast<int>(number_at(shared, shared_path, "n_ports"));
    if (n_ports < 2 || n_ports > inst.distance.rows())
        throw config_error(shared_path + ": n_ports incompatible with the distance matrix");
    inst.route.resize(static_cast<std::size_t>(n_ports));
    for (int p = 0; p < n_ports; ++p) inst.route[static_cast<std::size_t>(p)] = p + 1;
    inst.tank_capacity = number_at(shared, shared_path, "fuel_capacity");
    inst.fixed_cost = 0.0;

    const json r = row_of(prices, prices_path, row);
    inst.price.s0 = number_at(r, prices_path, "s0");
    inst.price.drift = number_at(r, prices_path, "drift");
    inst.price.sigma = number_at(r, prices_path, "sigma");
    inst.price.steps = n_ports - 1;
    inst.price.dt = 1.0;  // one unit-time price step per leg
    return inst;
}

hybrid_instance load_hybrid(const std::string& dir, char row, bool expanded) {
    const std::string rows_path =
        dir + (expanded ? "/hybrid_expanded_rows.json" : "/hybrid_rows.json");
    const std::string modes_path =
        dir + (expanded ? "/hybrid_expanded_modes.json" : "/hybrid_modes.json");
    const json rows = parse_file(rows_path);
    const json modes = parse_file(modes_path);
    const json r = row_of(rows, rows_path, row);

    hybrid_instance inst;
    inst.mileage = parse_matrix(r.contains("mileage") ? r["mileage"] : json(),
                                rows_path + ": mileage");
    inst.horizon = static_cast<int>(number_at(r, rows_path, "horizon"));
    inst.quantum = number_at(r, rows_path, "quantum");
    const double brake_delta = number_at(r, rows_path, "brake_delta");
    if (brake_delta > 0.0)
        throw config_error(rows_path + ": brake_delta must be nonpositive");
    inst.brake_gain = -brake_delta;
    inst.braking_mode = static_cast<int>(inst.mileage.rows()) - 1;
    inst.battery_coordinate = 1;

    const std::string key(1, row);
    if (!modes.contains("assignment") || !modes["assignment"].contains(key))
        throw config_error(modes_path + ": no transition assignment for row " + key);
    const std::string which = modes["assignment"][key].get<std::string>();
    if (!modes.contains(which))
        throw config_error(modes_path + ": assignment names missing matrix " + which);
    inst.transition = parse_matrix(modes[which], modes_path + ": " + which);

    // The default budgets leave either fuel alone short of the trip while the
    // pair covers it; a row violating that would change the problem class.
    const double per_fuel = 0.6 * inst.horizon * inst.quantum;
    const double trip = inst.horizon * inst.quantum;
    if (per_fuel >= trip || 2.0 * per_fuel < trip)
        throw config_error(rows_path + ": default fuel budgets break the two-fuel coupling");
    return inst;
}

option_instance load_option(const std::string& dir, char row) {
    const std::string path = dir + "/options_rows.json";
    const json j = parse_file(path);
    const json r = row_of(j, path, row);
    option_instance inst;
    inst.leg = parse_leg(r, path);
    inst.maturity = number_at(r, path, "maturity");
    inst.rate = number_at(r, path, "rate");
    inst.dt = number_at(r, path, "dt");
    return inst;
}

basket_instance load_basket(const std::string& dir, char row) {
    const std::string path = dir + "/options_basket_rows.json";
    const json j = parse_file(path);
    const json r = row_of(j, path, row);
    basket_instance inst;
    if (!r.contains("legs") || !r["legs"].is_array() || r["legs"].empty())
        throw config_error(path + ": row " + std::string(1, row) + " has no legs");
    for (const auto& leg : r["legs"]) inst.legs.push_back(parse_leg(leg, path));
    inst.maturity = number_at(r, path, "maturity");
    inst.rate = number_at(r, path, "rate");
    inst.dt = number_at(r, path, "dt");
    inst.exercise_cap = static_cast<int>(number_at(r, path, "exercise_cap"));
    return inst;
}

mcts_config default_search_config(const std::string& env, const std::string& dir, char row) {
    mcts_config cfg;
    if (env == "maritime") {
        const std::string shared_path = dir + "/maritime_shared.json";
        const std::string search_path = dir + "/maritime_search.json";
        const json shared = parse_file(shared_path);
        const json r = row_of(parse_file(search_path), search_path, row);
        cfg.iteration_budget = static_cast<std::int64_t>(number_at(r, search_path, "iterations"));
        cfg.exploration_c = number_at(r, search_path, "exploration");
        cfg.rollout_depth = static_cast<int>(number_at(shared, shared_path, "mcts_depth_limit"));
        cfg.ments_decay = number_at(shared, shared_path, "ments_decay");
        cfg.discount = 1.0;
        return cfg;
    }
    std::string shared_path;
    if (env == "hybrid" || env == "hybrid-expanded")
        shared_path = dir + "/hybrid_shared.json";
    else if (env == "options" || env == "options-basket")
        shared_path = dir + "/options_shared.json";
    else
        throw config_error("no search defaults for environment " + env);
    const json shared = parse_file(shared_path);
    cfg.iteration_budget = static_cast<std::int64_t>(number_at(shared, shared_path, "iterations"));
    cfg.exploration_c = number_at(shared, shared_path, "exploration");
    cfg.rollout_depth = static_cast<int>(number_at(shared, shared_path, "depth_limit"));
    cfg.discount = number_at(shared, shared_path, "discount");
    cfg.temperature = number_at(shared, shared_path, "temperature");
    cfg.exploration_eps = number_at(shared, shared_path, "epsilon");
    return cfg;
}

problem_spec problem_config::to_spec() const {
    problem_spec spec(dimension, horizon);
    spec.norm_p = norm_p;
    if (reward_scale.size() != 0) spec.reward_scale = reward_scale;
    if (consumption_scale.size() != 0) spec.consumption_scale = consumption_scale;
    spec.utility_map = map_of(utility_kind, utility_slope, utility_offset, dimension, "utility");
    spec.consumption_map =
        map_of(consumption_kind, consumption_slope, consumption_offset, dimension, "consumption");
    if (!increment_lower.empty()) {
        if (static_cast<int>(increment_lower.size()) != horizon)
            throw config_error("increment_lower needs one entry per epoch");
        spec.increment_lower = [v = increment_lower](int t) {
            return v[static_cast<std::size_t>(t - 1)];
        };
    }
    if (!increment_upper.empty()) {
        if (static_cast<int>(increment_upper.size()) != horizon)
            throw config_error("increment_upper needs one entry per epoch");
        spec.increment_upper = [v = increment_upper](int t) {
            return v[static_cast<std::size_t>(t - 1)];
        };
    }
    spec.total_lower = total_lower;
    spec.total_upper = total_upper;
    if (!natural_drift.empty()) {
        if (static_cast<int>(natural_drift.size()) != horizon)
            throw config_error("natural_drift needs one entry per epoch");
        spec.natural_drift = [v = natural_drift](int t) {
            return v[static_cast<std::size_t>(t - 1)];
        };
    }
    return spec;
}

problem_config load_problem(const std::string& path) {
    const json j = parse_file(path);
    if (j.value("kind", "") != "problem")
        throw config_error(path + ": not a problem file (kind != problem)");
    problem_config cfg;
    cfg.dimension = static_cast<int>(number_at(j, path, "dimension"));
    cfg.horizon = static_cast<int>(number_at(j, path, "horizon"));
    cfg.norm_p = j.value("norm_p", 1.0);
    if (j.contains("reward_scale"))
        cfg.reward_scale = parse_matrix(j["reward_scale"], path + ": reward_scale");
    if (j.contains("consumption_scale"))
        cfg.consumption_scale = parse_matrix(j["consumption_scale"], path + ": consumption_scale");
    if (j.contains("utility")) {
        cfg.utility_kind = j["utility"].value("kind", "identity");
        cfg.utility_slope = j["utility"].value("slope", 1.0);
        cfg.utility_offset = j["utility"].value("offset", 0.0);
    }
    if (j.contains("consumption")) {
        cfg.consumption_kind = j["consumption"].value("kind", "identity");
        cfg.consumption_slope = j["consumption"].value("slope", 1.0);
        cfg.consumption_offset = j["consumption"].value("offset", 0.0);
    }
    if (j.contains("increment_lower"))
        cfg.increment_lower = j["increment_lower"].get<std::vector<double>>();
    if (j.contains("increment_upper"))
        cfg.increment_upper = j["increment_upper"].get<std::vector<double>>();
    cfg.total_lower = j.value("total_lower", 0.0);
    cfg.total_upper = j.value("total_upper", 0.0);
    if (j.contains("natural_drift")) {
        const Eigen::MatrixXd m = parse_matrix(j["natural_drift"], path + ": natural_drift");
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            cfg.natural_drift.push_back(m.row(r).transpose());
    }
    return cfg;
}

void save_problem(const problem_config& cfg, const std::string& path) {
    json j;
    j["kind"] = "problem";
    j["dimension"] = cfg.dimension;
    j["horizon"] = cfg.horizon;
    j["norm_p"] = cfg.norm_p;
    const auto matrix_json = [](const Eigen::MatrixXd& m) {
        json rows = json::array();
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
            rows.push_back(std::move(row));
        }
        return rows;
    };
    if (cfg.reward_scale.size() != 0) j["reward_scale"] = matrix_json(cfg.reward_scale);
    if (cfg.consumption_scale.size() != 0)
        j["consumption_scale"] = matrix_json(cfg.consumption_scale);
    j["utility"] = {{"kind", cfg.utility_kind},
                    {"slope", cfg.utility_slope},
                    {"offset", cfg.utility_offset}};
    j["consumption"] = {{"kind", cfg.consumption_kind},
                        {"slope", cfg.consumption_slope},
                        {"offset", cfg.consumption_offset}};
    if (!cfg.increment_lower.empty()) j["increment_lower"] = cfg.increment_lower;
    if (!cfg.increment_upper.empty()) j["increment_upper"] = cfg.increment_upper;
    j["total_lower"] = cfg.total_lower;
    j["total_upper"] = cfg.total_upper;
    if (!cfg.natural_drift.empty()) {
        Eigen::MatrixXd m(static_cast<Eigen::Index>(cfg.natural_drift.size()),
                          cfg.natural_drift.front().size());
        for (std::size_t r = 0; r < cfg.natural_drift.size(); ++r)
            m.row(static_cast<Eigen::Index>(r)) = cfg.natural_drift[r].transpose();
        j["natural_drift"] = matrix_json(m);
    }
    std::ofstream out(path);
    if (!out) throw config_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

std::vector<std::string> validate_config_file(const std::string& path) {
    std::vector<std::string> violations;
    json j;
    try {
        j = parse_file(path);
    } catch (const config_error& e) {
        return {e.what()};
    }

    const std::string base = path.find('/') == std::string::npos
                                 ? path
                                 : path.substr(path.find_last_of('/') + 1);
    const auto require_rows = [&](const std::vector<std::string>& fields) {
        if (!j.contains("rows") || !j["rows"].is_object()) {
            violations.push_back(base + ": missing rows table");
            return;
        }
        for (const auto& [name, row] : j["rows"].items())
            for (const auto& f : fields)
                if (!row.contains(f))
                    violations.push_back(base + ": row " + name + " missing field " + f);
    };
    const auto require_fields = [&](const std::vector<std::string>& fields) {
        for (const auto& f : fields)
            if (!j.contains(f)) violations.push_back(base + ": missing field " + f);
    };
    const auto check_stochastic = [&](const char* key) {
        if (!j.contains(key)) {
            violations.push_back(base + ": missing matrix " + key);
            return;
        }
        try {
            const Eigen::MatrixXd m = parse_matrix(j[key], key);
            if (m.rows() != m.cols()) violations.push_back(base + ": " + key + " is not square");
            for (Eigen::Index r = 0; r < m.rows(); ++r) {
                if (m.row(r).minCoeff() < 0.0)
                    violations.push_back(base + ": " + key + " has a negative probability");
                if (std::abs(m.row(r).sum() - 1.0) > 1e-9)
                    violations.push_back(base + ": " + key + " row " + std::to_string(r) +
                                         " does not sum to 1");
            }
        } catch (const config_error& e) {
            violations.push_back(e.what());
        }
    };

    if (base == "maritime_prices.json") {
        require_rows({"s0", "sigma", "drift"});
    } else if (base == "maritime_routes.json") {
        if (!j.contains("distance")) {
            violations.push_back(base + ": missing distance matrix");
        } else {
            try {
                const Eigen::MatrixXd d = parse_matrix(j["distance"], "distance");
                if (d.rows() != d.cols()) violations.push_back(base + ": distance is not square");
                if (d.diagonal().cwiseAbs().maxCoeff() > 0.0)
                    violations.push_back(base + ": nonzero self-distance");
                if (d.minCoeff() < 0.0) violations.push_back(base + ": negative distance");
                if ((d - d.transpose()).cwiseAbs().maxCoeff() > 1e-9)
                    violations.push_back(base + ": distance is not symmetric");
            } catch (const config_error& e) {
                violations.push_back(e.what());
            }
        }
    } else if (base == "maritime_shared.json") {
        require_fields({"gbm_trajectories", "histogram_bins", "mcts_iterations",
                        "mcts_depth_limit", "ments_decay", "n_ports", "fuel_capacity"});
    } else if (base == "maritime_search.json") {
        require_rows({"iterations", "exploration"});
    } else if (base == "hybrid_rows.json" || base == "hybrid_expanded_rows.json") {
        require_rows({"mileage", "horizon", "quantum", "brake_delta"});
    } else if (base == "hybrid_modes.json" || base == "hybrid_expanded_modes.json") {
        check_stochastic("T1");
        check_stochastic("T2");
        if (!j.contains("assignment")) violations.push_back(base + ": missing assignment");
    } else if (base == "hybrid_shared.json" || base == "options_shared.json") {
        require_fields({"iterations", "exploration", "depth_limit", "discount", "temperature",
                        "epsilon"});
    } else if (base == "options_rows.json") {
        require_rows({"s0", "strike", "maturity", "rate", "sigma", "dt", "dividend", "type"});
    } else if (base == "options_basket_rows.json") {
        require_rows({"legs", "maturity", "rate", "dt", "exercise_cap"});
    } else if (j.value("kind", "") == "problem") {
        try {
            validate_spec(load_problem(path).to_spec());
        } catch (const invalid_spec& e) {
            violations.push_back(e.what());
        } catch (const config_error& e) {
            violations.push_back(e.what());
        }
    }
    return violations;
}

std::string canonical_dump(const std::string& path) { return parse_file(path).dump(); }

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t hash = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

}  // namespace rex
