#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qvi/grid.hpp"
#include "qvi/vec.hpp"

namespace qvi {

/// Indices into the sampled continuous control sets of the two players.
struct ControlPair {
    int a = 0; // maximizing player's control index
    int b = 0; // minimizing player's control index
};

struct LipschitzHints {
    std::optional<double> drift;     // C_b
    std::optional<double> gain;      // C_f
    std::optional<double> jump_xi;   // C_{g_xi}
    std::optional<double> jump_eta;  // C_{g_eta}
    std::optional<double> cost_xi;   // C_c
    std::optional<double> cost_eta;  // C_chi
};

/// Full description of one game instance: flow dynamics, running gain, the
/// two players' jump maps and jump costs, sampled control sets, truncated
/// impulse candidate sets, and the discount rate.
///
/// Immutable after construction; every evaluation is pure, so instances are
/// safe to share across worker threads.
struct ProblemSpec {
    std::string name;
    std::size_t dim = 1;

    std::function<Vec(const Vec&, const Vec&, const Vec&)> drift;     // b(x; th1, th2)
    std::function<double(const Vec&, const Vec&, const Vec&)> gain;   // f(x; th1, th2)
    std::function<Vec(const Vec&, const Vec&)> jump_xi;               // displacement
    std::function<Vec(const Vec&, const Vec&)> jump_eta;
    std::function<double(const Vec&, const Vec&)> cost_xi;
    std::function<double(const Vec&, const Vec&)> cost_eta;

    std::vector<Vec> ctrl_set_a;
    std::vector<Vec> ctrl_set_b;
    std::vector<Vec> impulse_set_xi;
    std::vector<Vec> impulse_set_eta;

    double discount = 1.0; // lambda > 0

    LipschitzHints hints;

    // Typed helpers used by the inner loops; bounds-checked.
    Vec drift_at(const Vec& x, const ControlPair& cp) const;
    double gain_at(const Vec& x, const ControlPair& cp) const;
    Vec jump_dest_xi(const Vec& x, int action) const;  // x + g_xi(x, action)
    Vec jump_dest_eta(const Vec& x, int action) const;
    double cost_xi_at(const Vec& x, int action) const;
    double cost_eta_at(const Vec& x, int action) const;

    /// Structural checks that need no grid: positive discount, non-empty sets.
    void check_basic() const;
};

enum class Component { drift, gain, jump_xi, jump_eta, cost_xi, cost_eta };

Component parse_component(const std::string& name);

using EvalArg = std::variant<ControlPair, int>;
using EvalResult = std::variant<double, Vec>;

/// Evaluate one named component of the problem at x; pure and deterministic.
EvalResult evaluate(const ProblemSpec& problem, Component component, const Vec& x,
                    const EvalArg& arg);

/// Construct one of the built-in example games from scalar parameters.
ProblemSpec make_builtin(const std::string& name, const std::map<std::string, double>& params);

/// Same game with gain and both impulse costs multiplied by mu (dynamics and
/// jump maps untouched). For 0 < mu < 1 its value is mu times the original.
ProblemSpec scale_gains_and_costs(const ProblemSpec& problem, double mu);

struct LipschitzEstimate {
    std::string component;
    double empirical = 0.0;
    std::optional<double> hint;
};

/// Report-only diagnostics for a (problem, grid) pair. A non-positive impulse
/// cost is flagged fatal for downstream solving.
struct ValidationReport {
    double min_cost_xi = 0.0;
    double min_cost_eta = 0.0;
    bool positivity_ok = false;
    std::vector<LipschitzEstimate> lipschitz;
    double clamped_fraction_xi = 0.0;   // jump destinations outside the box
    double clamped_fraction_eta = 0.0;
    bool subadditivity_ok = true;
    bool fatal = false;
    std::vector<std::string> warnings;

    std::string summary() const;
};

ValidationReport validate_problem(const ProblemSpec& problem, const Grid& grid);

} // namespace qvi
