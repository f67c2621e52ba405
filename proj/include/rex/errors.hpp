#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rex {

// Base class for everything this library throws on contract violations.
struct error : std::runtime_error {
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Problem definition rejected; carries the full list of violations.
struct invalid_spec : error {
    std::vector<std::string> violations;
    explicit invalid_spec(std::vector<std::string> v)
        : error("validate_spec: " + join(v)), violations(std::move(v)) {}

  private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out += "; ";
            out += v[i];
        }
        return out;
    }
};

struct dimension_mismatch : error {
    using error::error;
};

struct infeasible_window : error {
    using error::error;
};

struct inadmissible_action : error {
    using error::error;
};

struct capacity_underflow : error {
    using error::error;
};

struct index_out_of_range : error {
    using error::error;
};

struct no_feasible_allocation : error {
    using error::error;
};

struct non_psd_correlation : error {
    using error::error;
};

struct degenerate_lattice : error {
    using error::error;
};

struct zero_likelihood : error {
    using error::error;
};

struct no_actions : error {
    using error::error;
};

struct inconsistent_counts : error {
    using error::error;
};

struct inverted_bounds : error {
    using error::error;
};

struct budget_violation : error {
    using error::error;
};

struct infeasible_leg : error {
    using error::error;
};

struct infeasible_instance : error {
    using error::error;
};

struct exercise_of_dead_leg : error {
    using error::error;
};

struct config_error : error {
    using error::error;
};

}  // namespace rex
