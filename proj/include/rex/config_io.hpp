#pragma once

#include <cstdint>
#include <string>

#include "rex/env_hybrid.hpp"
#include "rex/env_maritime.hpp"
#include "rex/env_options.hpp"
#include "rex/mcts.hpp"

namespace rex {

// Default directory the shipped table files live in; compiled in so tests
// and the CLI agree without environment variables.
std::string default_config_dir();

// Loaders for the shipped tables. `row` is 'A'..'F'. All throw config_error
// with a precise message on missing files, unknown rows, or invalid values.
maritime_instance load_maritime(const std::string& dir, char row);
hybrid_instance load_hybrid(const std::string& dir, char row, bool expanded);
option_instance load_option(const std::string& dir, char row);
basket_instance load_basket(const std::string& dir, char row);

// Search parameter defaults for an environment family, from its shared table
// plus any per-row overrides (iteration budget, exploration constant).
mcts_config default_search_config(const std::string& env, const std::string& dir, char row);

// Serializable description of an allocation problem. Function-valued members
// of problem_spec appear here as named map kinds and per-epoch tables, which
// covers every shipped problem; to_spec() reconstitutes the callable form.
struct problem_config {
    int dimension = 1;
    int horizon = 1;
    double norm_p = 1.0;
    Eigen::MatrixXd reward_scale;       // empty = identity
    Eigen::MatrixXd consumption_scale;  // empty = negated identity
    std::string utility_kind = "identity";      // identity | constant | affine
    double utility_offset = 0.0;
    double utility_slope = 1.0;
    std::string consumption_kind = "constant";  // identity | constant | affine
    double consumption_offset = 1.0;
    double consumption_slope = 0.0;
    std::vector<double> increment_lower;  // per epoch; empty = all zero
    std::vector<double> increment_upper;
    double total_lower = 0.0;
    double total_upper = 0.0;
    std::vector<Eigen::VectorXd> natural_drift;  // per epoch; empty = zero

    problem_spec to_spec() const;
};

// Round-trip for problem files: {"kind": "problem", ...} key-value trees.
problem_config load_problem(const std::string& path);
void save_problem(const problem_config& cfg, const std::string& path);

// Validates any shipped config file (or an experiment file with the same
// schema conventions); returns human-readable violations, empty when valid.
std::vector<std::string> validate_config_file(const std::string& path);

// Canonical serialization (sorted keys, fixed float format) and its FNV-1a
// hash, used by the fidelity checks.
std::string canonical_dump(const std::string& path);
std::uint64_t fnv1a(const std::string& bytes);

}  // namespace rex
