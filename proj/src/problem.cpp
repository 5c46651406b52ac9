#include "qvi/problem.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace qvi {

namespace {

void check_index(int i, std::size_t n, const char* what) {
    if (i < 0 || static_cast<std::size_t>(i) >= n)
        throw std::out_of_range(std::string(what) + " index " + std::to_string(i) +
                                " out of range [0, " + std::to_string(n) + ")");
}

void check_finite_scalar(double v, const char* what) {
    if (!std::isfinite(v))
        throw std::runtime_error(std::string("non-finite ") + what +
                                 " value (malformed problem)");
}

void check_finite_vec(const Vec& v, const char* what) {
    if (!v.finite())
        throw std::runtime_error(std::string("non-finite ") + what +
                                 " value (malformed problem)");
}

/// Endpoint-exact uniform samples of [lo, hi]; 0 is dropped (impulse actions
/// are nonzero by convention).
std::vector<Vec> uniform_candidates_1d(double lo, double hi, int count) {
    std::vector<Vec> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        const double c = (lo * (count - 1 - k) + hi * k) / (count - 1);
        if (c == 0.0) continue;
        out.push_back(Vec{c});
    }
    return out;
}

class Params {
public:
    Params(std::string problem, const std::map<std::string, double>& values,
           std::vector<std::string> known)
        : problem_(std::move(problem)), values_(values), known_(std::move(known)) {
        for (const auto& [key, _] : values_) {
            if (std::find(known_.begin(), known_.end(), key) == known_.end())
                throw std::invalid_argument("make_builtin(" + problem_ + "): unknown parameter '" +
                                            key + "'");
        }
    }

    double get(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double require(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end())
            throw std::invalid_argument("make_builtin(" + problem_ + "): missing parameter '" +
                                        key + "'");
        return it->second;
    }

    double require_positive(const std::string& key) const {
        const double v = require(key);
        if (!(v > 0.0))
            throw std::invalid_argument("make_builtin(" + problem_ + "): parameter '" + key +
                                        "' must be strictly positive (impulse costs and the "
                                        "discount rate are assumed > 0), got " +
                                        std::to_string(v));
        return v;
    }

private:
    std::string problem_;
    const std::map<std::string, double>& values_;
    std::vector<std::string> known_;
};

ProblemSpec make_constant(const std::map<std::string, double>& raw) {
    Params p("constant", raw, {"f0", "lambda", "kappa", "jump"});
    const double f0 = p.require("f0");
    const double lambda = p.require_positive("lambda");
    const double kappa = p.require_positive("kappa");
    const double jump = p.get("jump", 0.5);

    ProblemSpec spec;
    spec.name = "constant";
    spec.dim = 1;
    spec.discount = lambda;
    spec.drift = [](const Vec& x, const Vec&, const Vec&) { return Vec(x.size(), 0.0); };
    spec.gain = [f0](const Vec&, const Vec&, const Vec&) { return f0; };
    spec.jump_xi = [](const Vec&, const Vec& a) { return a; };
    spec.jump_eta = [](const Vec&, const Vec& a) { return a; };
    spec.cost_xi = [kappa](const Vec&, const Vec&) { return kappa; };
    spec.cost_eta = [kappa](const Vec&, const Vec&) { return kappa; };
    spec.ctrl_set_a = {Vec{0.0}};
    spec.ctrl_set_b = {Vec{0.0}};
    spec.impulse_set_xi = {Vec{-jump}, Vec{jump}};
    spec.impulse_set_eta = {Vec{-jump}, Vec{jump}};
    spec.hints.drift = 0.0;
    spec.hints.gain = 0.0;
    spec.hints.jump_xi = 0.0;
    spec.hints.jump_eta = 0.0;
    spec.hints.cost_xi = 0.0;
    spec.hints.cost_eta = 0.0;
    return spec;
}

ProblemSpec make_linear1d(const std::map<std::string, double>& raw) {
    Params p("linear1d", raw, {"lambda", "scale", "cost"});
    const double lambda = p.require_positive("lambda");
    const double scale = p.require_positive("scale");
    // Impulses are priced out by default; the instance exercises the
    // continuous minimax only.
    const double cost = p.get("cost", 1e6);
    if (!(cost > 0.0))
        throw std::invalid_argument("make_builtin(linear1d): 'cost' must be strictly positive");

    ProblemSpec spec;
    spec.name = "linear1d";
    spec.dim = 1;
    spec.discount = lambda;
    spec.drift = [](const Vec&, const Vec& t1, const Vec& t2) { return Vec{t1[0] + t2[0]}; };
    spec.gain = [](const Vec& x, const Vec&, const Vec&) { return x[0] * x[0]; };
    spec.jump_xi = [](const Vec&, const Vec& a) { return a; };
    spec.jump_eta = [](const Vec&, const Vec& a) { return a; };
    spec.cost_xi = [cost](const Vec&, const Vec&) { return cost; };
    spec.cost_eta = [cost](const Vec&, const Vec&) { return cost; };
    spec.ctrl_set_a = {Vec{-scale}, Vec{0.0}, Vec{scale}};
    spec.ctrl_set_b = {Vec{-scale}, Vec{0.0}, Vec{scale}};
    spec.impulse_set_xi = {Vec{-scale}, Vec{scale}};
    spec.impulse_set_eta = {Vec{-scale}, Vec{scale}};
    spec.hints.drift = 0.0;
    spec.hints.jump_xi = 0.0;
    spec.hints.jump_eta = 0.0;
    spec.hints.cost_xi = 0.0;
    spec.hints.cost_eta = 0.0;
    return spec;
}

ProblemSpec make_impulse1d(const std::map<std::string, double>& raw) {
    Params p("impulse1d", raw, {"lambda", "kappa", "W", "n_eta", "xi_cost"});
    const double lambda = p.require_positive("lambda");
    const double kappa = p.require_positive("kappa");
    const double W = p.require_positive("W");
    const int n_eta = static_cast<int>(p.get("n_eta", std::round(40.0 * W) + 1.0));
    if (n_eta < 2)
        throw std::invalid_argument("make_builtin(impulse1d): 'n_eta' must be >= 2");
    const double xi_cost = p.get("xi_cost", 1e6);
    if (!(xi_cost > 0.0))
        throw std::invalid_argument("make_builtin(impulse1d): 'xi_cost' must be strictly positive");

    ProblemSpec spec;
    spec.name = "impulse1d";
    spec.dim = 1;
    spec.discount = lambda;
    spec.drift = [](const Vec& x, const Vec&, const Vec&) { return Vec(x.size(), 0.0); };
    spec.gain = [](const Vec& x, const Vec&, const Vec&) { return x[0] * x[0]; };
    spec.jump_xi = [](const Vec&, const Vec& a) { return a; };
    spec.jump_eta = [](const Vec&, const Vec& a) { return a; };
    spec.cost_xi = [xi_cost](const Vec&, const Vec&) { return xi_cost; };
    spec.cost_eta = [kappa](const Vec&, const Vec&) { return kappa; };
    spec.ctrl_set_a = {Vec{0.0}};
    spec.ctrl_set_b = {Vec{0.0}};
    spec.impulse_set_xi = {Vec{-W}, Vec{W}};
    spec.impulse_set_eta = uniform_candidates_1d(-W, W, n_eta);
    spec.hints.drift = 0.0;
    spec.hints.jump_xi = 0.0;
    spec.hints.jump_eta = 0.0;
    spec.hints.cost_xi = 0.0;
    spec.hints.cost_eta = 0.0;
    return spec;
}

ProblemSpec make_portfolio(const std::map<std::string, double>& raw) {
    Params p("portfolio", raw,
             {"lambda", "revert", "q", "kappa_c", "kappa_chi", "prop_c", "prop_chi", "ctrl",
              "jump"});
    const double lambda = p.require_positive("lambda");
    const double revert = p.get("revert", 0.5);   // mean reversion of holdings
    const double q = p.get("q", 1.0);             // quadratic holding-gain scale
    const double kappa_c = p.get("kappa_c", 1.0); // fixed rebalance fees
    const double kappa_chi = p.get("kappa_chi", 1.0);
    const double prop_c = p.get("prop_c", 0.5);   // proportional fees
    const double prop_chi = p.get("prop_chi", 0.5);
    const double ctrl = p.get("ctrl", 0.5);
    const double jump = p.get("jump", 0.5);
    if (!(kappa_c > 0.0) || !(kappa_chi > 0.0))
        throw std::invalid_argument(
            "make_builtin(portfolio): fixed fees must be strictly positive");

    ProblemSpec spec;
    spec.name = "portfolio";
    spec.dim = 2;
    spec.discount = lambda;
    // Market (theta1) and investor (theta2) shift the two holdings in
    // opposite directions around a mean-reverting drift.
    spec.drift = [revert](const Vec& y, const Vec& t1, const Vec& t2) {
        return Vec{-revert * y[0] + t1[0] - t2[0], -revert * y[1] - t1[0] + t2[0]};
    };
    spec.gain = [q](const Vec& y, const Vec&, const Vec&) {
        return q * (y[0] * y[0] + y[1] * y[1]);
    };
    spec.jump_xi = [](const Vec&, const Vec& a) { return a; };
    spec.jump_eta = [](const Vec&, const Vec& a) { return a; };
    spec.cost_xi = [kappa_c, prop_c](const Vec&, const Vec& a) {
        return kappa_c + prop_c * (std::abs(a[0]) + std::abs(a[1]));
    };
    spec.cost_eta = [kappa_chi, prop_chi](const Vec&, const Vec& a) {
        return kappa_chi + prop_chi * (std::abs(a[0]) + std::abs(a[1]));
    };
    spec.ctrl_set_a = {Vec{-ctrl}, Vec{0.0}, Vec{ctrl}};
    spec.ctrl_set_b = {Vec{-ctrl}, Vec{0.0}, Vec{ctrl}};
    spec.impulse_set_xi = {Vec{-jump, 0.0}, Vec{jump, 0.0}, Vec{0.0, -jump}, Vec{0.0, jump}};
    spec.impulse_set_eta = spec.impulse_set_xi;
    spec.hints.drift = revert;
    spec.hints.jump_xi = 0.0;
    spec.hints.jump_eta = 0.0;
    spec.hints.cost_xi = 0.0;
    spec.hints.cost_eta = 0.0;
    return spec;
}

} // namespace

Vec ProblemSpec::drift_at(const Vec& x, const ControlPair& cp) const {
    check_index(cp.a, ctrl_set_a.size(), "ctrl_set_a");
    check_index(cp.b, ctrl_set_b.size(), "ctrl_set_b");
    Vec v = drift(x, ctrl_set_a[static_cast<std::size_t>(cp.a)],
                  ctrl_set_b[static_cast<std::size_t>(cp.b)]);
    check_finite_vec(v, "drift");
    return v;
}

double ProblemSpec::gain_at(const Vec& x, const ControlPair& cp) const {
    check_index(cp.a, ctrl_set_a.size(), "ctrl_set_a");
    check_index(cp.b, ctrl_set_b.size(), "ctrl_set_b");
    const double v = gain(x, ctrl_set_a[static_cast<std::size_t>(cp.a)],
                          ctrl_set_b[static_cast<std::size_t>(cp.b)]);
    check_finite_scalar(v, "gain");
    return v;
}

Vec ProblemSpec::jump_dest_xi(const Vec& x, int action) const {
    check_index(action, impulse_set_xi.size(), "impulse_set_xi");
    Vec d = jump_xi(x, impulse_set_xi[static_cast<std::size_t>(action)]);
    check_finite_vec(d, "jump_xi");
    return x + d;
}

Vec ProblemSpec::jump_dest_eta(const Vec& x, int action) const {
    check_index(action, impulse_set_eta.size(), "impulse_set_eta");
    Vec d = jump_eta(x, impulse_set_eta[static_cast<std::size_t>(action)]);
    check_finite_vec(d, "jump_eta");
    return x + d;
}

double ProblemSpec::cost_xi_at(const Vec& x, int action) const {
    check_index(action, impulse_set_xi.size(), "impulse_set_xi");
    const double c = cost_xi(x, impulse_set_xi[static_cast<std::size_t>(action)]);
    check_finite_scalar(c, "cost_xi");
    return c;
}

double ProblemSpec::cost_eta_at(const Vec& x, int action) const {
    check_index(action, impulse_set_eta.size(), "impulse_set_eta");
    const double c = cost_eta(x, impulse_set_eta[static_cast<std::size_t>(action)]);
    check_finite_scalar(c, "cost_eta");
    return c;
}

void ProblemSpec::check_basic() const {
    if (!(discount > 0.0)) throw std::invalid_argument("ProblemSpec: discount must be > 0");
    if (ctrl_set_a.empty() || ctrl_set_b.empty())
        throw std::invalid_argument("ProblemSpec: control sets must be non-empty");
    if (impulse_set_xi.empty() || impulse_set_eta.empty())
        throw std::invalid_argument("ProblemSpec: impulse candidate sets must be non-empty");
    if (!drift || !gain || !jump_xi || !jump_eta || !cost_xi || !cost_eta)
        throw std::invalid_argument("ProblemSpec: all component functions must be set");
}

Component parse_component(const std::string& name) {
    if (name == "drift") return Component::drift;
    if (name == "gain") return Component::gain;
    if (name == "jump_xi") return Component::jump_xi;
    if (name == "jump_eta") return Component::jump_eta;
    if (name == "cost_xi") return Component::cost_xi;
    if (name == "cost_eta") return Component::cost_eta;
    throw std::invalid_argument("unknown component: " + name);
}

EvalResult evaluate(const ProblemSpec& problem, Component component, const Vec& x,
                    const EvalArg& arg) {
    if (!x.finite()) throw std::invalid_argument("evaluate: non-finite state");
    switch (component) {
    case Component::drift:
    case Component::gain: {
        const auto* cp = std::get_if<ControlPair>(&arg);
        if (!cp) throw std::invalid_argument("evaluate: drift/gain take a ControlPair");
        if (component == Component::drift) return problem.drift_at(x, *cp);
        return problem.gain_at(x, *cp);
    }
    case Component::jump_xi:
    case Component::jump_eta:
    case Component::cost_xi:
    case Component::cost_eta: {
        const auto* idx = std::get_if<int>(&arg);
        if (!idx) throw std::invalid_argument("evaluate: impulse components take an action index");
        switch (component) {
        case Component::jump_xi: {
            check_index(*idx, problem.impulse_set_xi.size(), "impulse_set_xi");
            Vec d = problem.jump_xi(x, problem.impulse_set_xi[static_cast<std::size_t>(*idx)]);
            check_finite_vec(d, "jump_xi");
            return d;
        }
        case Component::jump_eta: {
            check_index(*idx, problem.impulse_set_eta.size(), "impulse_set_eta");
            Vec d = problem.jump_eta(x, problem.impulse_set_eta[static_cast<std::size_t>(*idx)]);
            check_finite_vec(d, "jump_eta");
            return d;
        }
        case Component::cost_xi: return problem.cost_xi_at(x, *idx);
        default: return problem.cost_eta_at(x, *idx);
        }
    }
    }
    throw std::logic_error("evaluate: unreachable");
}

ProblemSpec make_builtin(const std::string& name, const std::map<std::string, double>& params) {
    ProblemSpec spec;
    if (name == "constant") spec = make_constant(params);
    else if (name == "linear1d") spec = make_linear1d(params);
    else if (name == "impulse1d") spec = make_impulse1d(params);
    else if (name == "portfolio") spec = make_portfolio(params);
    else throw std::invalid_argument("make_builtin: unknown problem name '" + name + "'");
    spec.check_basic();
    return spec;
}

ProblemSpec scale_gains_and_costs(const ProblemSpec& problem, double mu) {
    if (!(mu > 0.0)) throw std::invalid_argument("scale_gains_and_costs: mu must be > 0");
    ProblemSpec scaled = problem;
    scaled.name = problem.name + "_scaled";
    scaled.gain = [mu, f = problem.gain](const Vec& x, const Vec& a, const Vec& b) {
        return mu * f(x, a, b);
    };
    scaled.cost_xi = [mu, c = problem.cost_xi](const Vec& x, const Vec& a) { return mu * c(x, a); };
    scaled.cost_eta = [mu, c = problem.cost_eta](const Vec& x, const Vec& a) { return mu * c(x, a); };
    return scaled;
}

namespace {

bool inside_box(const Grid& grid, const Vec& x) {
    for (std::size_t k = 0; k < grid.dim(); ++k)
        if (x[k] < grid.lo()[k] || x[k] > grid.hi()[k]) return false;
    return true;
}

/// Deterministic subset of node indices, at most `max_count`, spread evenly.
std::vector<std::size_t> sample_nodes(const Grid& grid, std::size_t max_count) {
    const std::size_t total = grid.node_count();
    std::vector<std::size_t> out;
    if (total <= max_count) {
        out.resize(total);
        for (std::size_t i = 0; i < total; ++i) out[i] = i;
        return out;
    }
    const std::size_t step = total / max_count;
    for (std::size_t i = 0; i < total; i += step) out.push_back(i);
    return out;
}

} // namespace

ValidationReport validate_problem(const ProblemSpec& problem, const Grid& grid) {
    problem.check_basic();
    ValidationReport rep;

    const auto nodes = sample_nodes(grid, 512);

    // (i) strict positivity of the impulse costs over grid x candidates
    rep.min_cost_xi = std::numeric_limits<double>::infinity();
    rep.min_cost_eta = std::numeric_limits<double>::infinity();
    std::size_t out_xi = 0, out_eta = 0, n_xi = 0, n_eta = 0;
    for (std::size_t flat : nodes) {
        const Vec x = grid.node_coord(flat);
        for (int a = 0; a < static_cast<int>(problem.impulse_set_xi.size()); ++a) {
            rep.min_cost_xi = std::min(rep.min_cost_xi, problem.cost_xi_at(x, a));
            if (!inside_box(grid, problem.jump_dest_xi(x, a))) ++out_xi;
            ++n_xi;
        }
        for (int a = 0; a < static_cast<int>(problem.impulse_set_eta.size()); ++a) {
            rep.min_cost_eta = std::min(rep.min_cost_eta, problem.cost_eta_at(x, a));
            if (!inside_box(grid, problem.jump_dest_eta(x, a))) ++out_eta;
            ++n_eta;
        }
    }
    rep.positivity_ok = rep.min_cost_xi > 0.0 && rep.min_cost_eta > 0.0;
    rep.fatal = !rep.positivity_ok;
    if (!rep.positivity_ok)
        rep.warnings.push_back(
            "FATAL: impulse costs must be strictly positive on the grid; found min c = " +
            std::to_string(rep.min_cost_xi) + ", min chi = " + std::to_string(rep.min_cost_eta));

    // (iii) clamped jump destinations
    rep.clamped_fraction_xi = n_xi ? static_cast<double>(out_xi) / n_xi : 0.0;
    rep.clamped_fraction_eta = n_eta ? static_cast<double>(out_eta) / n_eta : 0.0;
    if (rep.clamped_fraction_xi > 0.0 || rep.clamped_fraction_eta > 0.0)
        rep.warnings.push_back(
            "some jump destinations fall outside the grid box and will be clamped "
            "(fractions: xi " +
            std::to_string(rep.clamped_fraction_xi) + ", eta " +
            std::to_string(rep.clamped_fraction_eta) + ")");

    // (ii) empirical Lipschitz estimates against adjacent-node pairs
    auto lip_estimate = [&](const std::string& label, auto&& fn, std::optional<double> hint) {
        double lip = 0.0;
        for (std::size_t flat : nodes) {
            const auto mi = grid.multi_index(flat);
            const Vec x = grid.node_coord(flat);
            for (std::size_t k = 0; k < grid.dim(); ++k) {
                if (mi[k] + 1 >= grid.nodes_per_axis()[k]) continue;
                auto mj = mi;
                mj[k] += 1;
                const Vec y = grid.node_coord(grid.flat_index(mj));
                const double dist = (y - x).norm();
                if (dist > 0.0) lip = std::max(lip, fn(x, y) / dist);
            }
        }
        rep.lipschitz.push_back({label, lip, hint});
        if (hint && lip > *hint + 1e-9)
            rep.warnings.push_back("empirical Lipschitz bound for " + label + " (" +
                                   std::to_string(lip) + ") exceeds the supplied hint (" +
                                   std::to_string(*hint) + ")");
    };

    lip_estimate(
        "drift",
        [&](const Vec& x, const Vec& y) {
            double m = 0.0;
            for (int a = 0; a < static_cast<int>(problem.ctrl_set_a.size()); ++a)
                for (int b = 0; b < static_cast<int>(problem.ctrl_set_b.size()); ++b)
                    m = std::max(m, (problem.drift_at(x, {a, b}) - problem.drift_at(y, {a, b})).norm());
            return m;
        },
        problem.hints.drift);
    lip_estimate(
        "gain",
        [&](const Vec& x, const Vec& y) {
            double m = 0.0;
            for (int a = 0; a < static_cast<int>(problem.ctrl_set_a.size()); ++a)
                for (int b = 0; b < static_cast<int>(problem.ctrl_set_b.size()); ++b)
                    m = std::max(m, std::abs(problem.gain_at(x, {a, b}) - problem.gain_at(y, {a, b})));
            return m;
        },
        problem.hints.gain);
    lip_estimate(
        "jump_xi",
        [&](const Vec& x, const Vec& y) {
            double m = 0.0;
            for (int a = 0; a < static_cast<int>(problem.impulse_set_xi.size()); ++a)
                m = std::max(m, ((problem.jump_dest_xi(x, a) - x) - (problem.jump_dest_xi(y, a) - y)).norm());
            return m;
        },
        problem.hints.jump_xi);
    lip_estimate(
        "jump_eta",
        [&](const Vec& x, const Vec& y) {
            double m = 0.0;
            for (int a = 0; a < static_cast<int>(problem.impulse_set_eta.size()); ++a)
                m = std::max(m, ((problem.jump_dest_eta(x, a) - x) - (problem.jump_dest_eta(y, a) - y)).norm());
            return m;
        },
        problem.hints.jump_eta);
    lip_estimate(
        "cost_xi",
        [&](const Vec& x, const Vec& y) {
            double m = 0.0;
            for (int a = 0; a < static_cast<int>(problem.impulse_set_xi.size()); ++a)
                m = std::max(m, std::abs(problem.cost_xi_at(x, a) - problem.cost_xi_at(y, a)));
            return m;
        },
        problem.hints.cost_xi);
    lip_estimate(
        "cost_eta",
        [&](const Vec& x, const Vec& y) {
            double m = 0.0;
            for (int a = 0; a < static_cast<int>(problem.impulse_set_eta.size()); ++a)
                m = std::max(m, std::abs(problem.cost_eta_at(x, a) - problem.cost_eta_at(y, a)));
            return m;
        },
        problem.hints.cost_eta);

    // Sub-additivity of the costs on sampled triples whose action sum is a
    // candidate again (simultaneous impulses must not be a bargain).
    auto check_subadd = [&](const std::vector<Vec>& actions, auto&& cost, const char* label) {
        const std::size_t cap = std::min<std::size_t>(actions.size(), 24);
        for (std::size_t flat : sample_nodes(grid, 16)) {
            const Vec x = grid.node_coord(flat);
            for (std::size_t i = 0; i < cap; ++i)
                for (std::size_t j = 0; j < cap; ++j) {
                    const Vec sum = actions[i] + actions[j];
                    for (std::size_t k = 0; k < actions.size(); ++k) {
                        if (!((sum - actions[k]).norm_inf() <= 1e-12)) continue;
                        const double lhs = cost(x, actions[k]);
                        const double rhs = cost(x, actions[i]) + cost(x, actions[j]);
                        if (lhs > rhs + 1e-9) {
                            rep.subadditivity_ok = false;
                            rep.warnings.push_back(std::string("cost sub-additivity violated for ") +
                                                   label + " at x = " + x.str());
                        }
                        break;
                    }
                }
        }
    };
    check_subadd(problem.impulse_set_xi, problem.cost_xi, "c");
    check_subadd(problem.impulse_set_eta, problem.cost_eta, "chi");

    return rep;
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    os << "validation: positivity " << (positivity_ok ? "pass" : "FAIL") << " (min c = "
       << min_cost_xi << ", min chi = " << min_cost_eta << ")\n";
    os << "  clamped jump destinations: xi " << clamped_fraction_xi << ", eta "
       << clamped_fraction_eta << "\n";
    for (const auto& l : lipschitz) {
        os << "  Lipschitz[" << l.component << "] empirical " << l.empirical;
        if (l.hint) os << " (hint " << *l.hint << ")";
        os << "\n";
    }
    os << "  cost sub-additivity: " << (subadditivity_ok ? "pass" : "FAIL") << "\n";
    for (const auto& w : warnings) os << "  warning: " << w << "\n";
    return os.str();
}

} // namespace qvi
