#include "qvi/operators.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qvi {

QviForm QviForm::parse(const std::string& name) {
    if (name == "L") return L();
    if (name == "U") return U();
    if (name == "Lmax") return Lmax();
    if (name == "Umin") return Umin();
    throw std::invalid_argument("unknown QVI form: " + name +
                                " (expected one of L, U, Lmax, Umin)");
}

std::string QviForm::name() const {
    if (hamiltonian == HamiltonianKind::lower)
        return nesting == QviNesting::min_outer ? "L" : "Lmax";
    return nesting == QviNesting::max_outer ? "U" : "Umin";
}

BranchKind choose_branch(QviNesting nesting, double s, double m, double n) {
    if (nesting == QviNesting::min_outer) {
        // value = max(min(s, n), m)
        const bool inner_is_continuous = s <= n;
        const double inner = inner_is_continuous ? s : n;
        if (inner >= m) return inner_is_continuous ? BranchKind::continuous : BranchKind::impulse_eta;
        return BranchKind::impulse_xi;
    }
    // value = min(max(s, m), n)
    const bool outer_is_continuous = s >= m;
    const double outer = outer_is_continuous ? s : m;
    if (outer < n) return outer_is_continuous ? BranchKind::continuous : BranchKind::impulse_xi;
    if (outer > n) return BranchKind::impulse_eta;
    return outer_is_continuous ? BranchKind::continuous : BranchKind::impulse_eta;
}

namespace {

void check_step(const ProblemSpec& problem, const StepParams& params) {
    const double lh = problem.discount * params.h;
    if (!(params.h > 0.0) || !(lh < 1.0))
        throw std::invalid_argument("StepParams: need 0 < lambda*h < 1, got lambda*h = " +
                                    std::to_string(lh));
}

} // namespace

SlResult sl_value(const ValueField& field, const ProblemSpec& problem, const Vec& x,
                  const StepParams& params, HamiltonianKind kind) {
    check_step(problem, params);
    const double h = params.h;
    const double carry = 1.0 - problem.discount * h;
    const int na = static_cast<int>(problem.ctrl_set_a.size());
    const int nb = static_cast<int>(problem.ctrl_set_b.size());

    auto candidate = [&](int a, int b) {
        const ControlPair cp{a, b};
        const Vec foot = x.axpy(h, problem.drift_at(x, cp));
        return h * problem.gain_at(x, cp) + carry * interpolate(field, foot);
    };

    SlResult best;
    if (kind == HamiltonianKind::lower) {
        // max over a of min over b
        bool first_outer = true;
        for (int a = 0; a < na; ++a) {
            double inner = std::numeric_limits<double>::infinity();
            int inner_arg = 0;
            for (int b = 0; b < nb; ++b) {
                const double v = candidate(a, b);
                if (v < inner) {
                    inner = v;
                    inner_arg = b;
                }
            }
            if (first_outer || inner > best.value) {
                best.value = inner;
                best.arg = {a, inner_arg};
                first_outer = false;
            }
        }
    } else {
        // min over b of max over a
        bool first_outer = true;
        for (int b = 0; b < nb; ++b) {
            double inner = -std::numeric_limits<double>::infinity();
            int inner_arg = 0;
            for (int a = 0; a < na; ++a) {
                const double v = candidate(a, b);
                if (v > inner) {
                    inner = v;
                    inner_arg = a;
                }
            }
            if (first_outer || inner < best.value) {
                best.value = inner;
                best.arg = {inner_arg, b};
                first_outer = false;
            }
        }
    }
    return best;
}

InterveneResult intervene(const ValueField& field, const ProblemSpec& problem, const Vec& x,
                          Player player) {
    InterveneResult best;
    if (player == Player::xi) {
        const int n = static_cast<int>(problem.impulse_set_xi.size());
        best.value = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < n; ++a) {
            const double v =
                interpolate(field, problem.jump_dest_xi(x, a)) - problem.cost_xi_at(x, a);
            if (v > best.value) {
                best.value = v;
                best.arg = a;
            }
        }
    } else {
        const int n = static_cast<int>(problem.impulse_set_eta.size());
        best.value = std::numeric_limits<double>::infinity();
        for (int a = 0; a < n; ++a) {
            const double v =
                interpolate(field, problem.jump_dest_eta(x, a)) + problem.cost_eta_at(x, a);
            if (v < best.value) {
                best.value = v;
                best.arg = a;
            }
        }
    }
    return best;
}

double qvi_update(const ValueField& field, const ProblemSpec& problem, const Vec& x,
                  const QviForm& form, const StepParams& params) {
    const double s = sl_value(field, problem, x, params, form.hamiltonian).value;
    const double m = intervene(field, problem, x, Player::xi).value;
    const double n = intervene(field, problem, x, Player::eta).value;
    return compose_qvi(form.nesting, s, m, n);
}

double hamiltonian_enum(const ProblemSpec& problem, const Vec& x, const Vec& p,
                        HamiltonianKind kind) {
    const int na = static_cast<int>(problem.ctrl_set_a.size());
    const int nb = static_cast<int>(problem.ctrl_set_b.size());
    auto term = [&](int a, int b) {
        const ControlPair cp{a, b};
        return -p.dot(problem.drift_at(x, cp)) - problem.gain_at(x, cp);
    };
    if (kind == HamiltonianKind::lower) {
        // inf over a of sup over b
        double outer = std::numeric_limits<double>::infinity();
        for (int a = 0; a < na; ++a) {
            double inner = -std::numeric_limits<double>::infinity();
            for (int b = 0; b < nb; ++b) inner = std::max(inner, term(a, b));
            outer = std::min(outer, inner);
        }
        return outer;
    }
    // sup over b of inf over a
    double outer = -std::numeric_limits<double>::infinity();
    for (int b = 0; b < nb; ++b) {
        double inner = std::numeric_limits<double>::infinity();
        for (int a = 0; a < na; ++a) inner = std::min(inner, term(a, b));
        outer = std::max(outer, inner);
    }
    return outer;
}

ValueField hjbi_residual(const ValueField& field, const ProblemSpec& problem,
                         const QviForm& form) {
    const Grid& grid = *field.grid;
    ValueField res(field.grid, 0.0);
    res.form_tag = form.name();

    for (std::size_t flat = 0; flat < grid.node_count(); ++flat) {
        const Vec x = grid.node_coord(flat);
        const auto mi = grid.multi_index(flat);

        Vec p(grid.dim(), 0.0);
        for (std::size_t k = 0; k < grid.dim(); ++k) {
            const double dx = grid.spacing()[k];
            const int n = grid.nodes_per_axis()[k];
            auto value_at = [&](int i) {
                auto mj = mi;
                mj[k] = i;
                return field.values[grid.flat_index(mj)];
            };
            if (mi[k] == 0)
                p[k] = (value_at(1) - value_at(0)) / dx;
            else if (mi[k] == n - 1)
                p[k] = (value_at(n - 1) - value_at(n - 2)) / dx;
            else
                p[k] = (value_at(mi[k] + 1) - value_at(mi[k] - 1)) / (2.0 * dx);
        }

        const double v = field.values[flat];
        const double ham = hamiltonian_enum(problem, x, p, form.hamiltonian);
        const double m_obstacle = v - intervene(field, problem, x, Player::xi).value;
        const double n_obstacle = v - intervene(field, problem, x, Player::eta).value;
        const double continuous = problem.discount * v + ham;

        if (form.nesting == QviNesting::min_outer)
            res.values[flat] = std::min(std::max(continuous, n_obstacle), m_obstacle);
        else
            res.values[flat] = std::max(std::min(continuous, m_obstacle), n_obstacle);
    }
    return res;
}

} // namespace qvi
