#include "qvi/oracle.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <map>
#include <stdexcept>

namespace qvi {

namespace {

using StateKey = std::array<std::uint64_t, Vec::kMaxDim>;

StateKey key_of(const Vec& x) {
    StateKey key{};
    for (std::size_t k = 0; k < x.size(); ++k) {
        std::uint64_t bits;
        const double v = x[k];
        std::memcpy(&bits, &v, sizeof(bits));
        key[k] = bits;
    }
    return key;
}

struct TreeContext {
    const ProblemSpec& problem;
    const StepParams& params;
    QviForm form;
    double leaf_bound; // ||f||_inf / lambda
    std::size_t budget;
    std::size_t work = 0;
    std::map<std::pair<int, StateKey>, ValueInterval> memo;

    ValueInterval value(const Vec& x, int depth) {
        if (depth == 0) return {-leaf_bound, leaf_bound};
        const auto key = std::make_pair(depth, key_of(x));
        if (auto it = memo.find(key); it != memo.end()) return it->second;

        const int na = static_cast<int>(problem.ctrl_set_a.size());
        const int nb = static_cast<int>(problem.ctrl_set_b.size());
        const int n_xi = static_cast<int>(problem.impulse_set_xi.size());
        const int n_eta = static_cast<int>(problem.impulse_set_eta.size());
        work += static_cast<std::size_t>(na * nb + n_xi + n_eta);
        if (work > budget)
            throw std::runtime_error("tree_value: work budget exceeded; reduce the depth or the "
                                     "candidate counts");

        const double h = params.h;
        const double carry = 1.0 - problem.discount * h;

        ValueInterval s;
        if (form.hamiltonian == HamiltonianKind::lower) {
            s = {-std::numeric_limits<double>::infinity(),
                 -std::numeric_limits<double>::infinity()};
            for (int a = 0; a < na; ++a) {
                ValueInterval inner{std::numeric_limits<double>::infinity(),
                                    std::numeric_limits<double>::infinity()};
                for (int b = 0; b < nb; ++b) {
                    const ControlPair cp{a, b};
                    const double stage = h * problem.gain_at(x, cp);
                    const ValueInterval child =
                        value(x.axpy(h, problem.drift_at(x, cp)), depth - 1);
                    inner.lo = std::min(inner.lo, stage + carry * child.lo);
                    inner.hi = std::min(inner.hi, stage + carry * child.hi);
                }
                s.lo = std::max(s.lo, inner.lo);
                s.hi = std::max(s.hi, inner.hi);
            }
        } else {
            s = {std::numeric_limits<double>::infinity(),
                 std::numeric_limits<double>::infinity()};
            for (int b = 0; b < nb; ++b) {
                ValueInterval inner{-std::numeric_limits<double>::infinity(),
                                    -std::numeric_limits<double>::infinity()};
                for (int a = 0; a < na; ++a) {
                    const ControlPair cp{a, b};
                    const double stage = h * problem.gain_at(x, cp);
                    const ValueInterval child =
                        value(x.axpy(h, problem.drift_at(x, cp)), depth - 1);
                    inner.lo = std::max(inner.lo, stage + carry * child.lo);
                    inner.hi = std::max(inner.hi, stage + carry * child.hi);
                }
                s.lo = std::min(s.lo, inner.lo);
                s.hi = std::min(s.hi, inner.hi);
            }
        }

        ValueInterval m{-std::numeric_limits<double>::infinity(),
                        -std::numeric_limits<double>::infinity()};
        for (int a = 0; a < n_xi; ++a) {
            const double c = problem.cost_xi_at(x, a);
            const ValueInterval child = value(problem.jump_dest_xi(x, a), depth - 1);
            m.lo = std::max(m.lo, child.lo - c);
            m.hi = std::max(m.hi, child.hi - c);
        }

        ValueInterval n{std::numeric_limits<double>::infinity(),
                        std::numeric_limits<double>::infinity()};
        for (int a = 0; a < n_eta; ++a) {
            const double c = problem.cost_eta_at(x, a);
            const ValueInterval child = value(problem.jump_dest_eta(x, a), depth - 1);
            n.lo = std::min(n.lo, child.lo + c);
            n.hi = std::min(n.hi, child.hi + c);
        }

        const ValueInterval out{compose_qvi(form.nesting, s.lo, m.lo, n.lo),
                                compose_qvi(form.nesting, s.hi, m.hi, n.hi)};
        memo.emplace(key, out);
        return out;
    }
};

} // namespace

ValueInterval tree_value(const ProblemSpec& problem, const Vec& x0, int depth,
                         const StepParams& params, const QviForm& form, std::size_t budget) {
    problem.check_basic();
    if (depth < 0) throw std::invalid_argument("tree_value: depth must be >= 0");
    const double lh = problem.discount * params.h;
    if (!(params.h > 0.0) || !(lh < 1.0))
        throw std::invalid_argument("tree_value: need 0 < lambda*h < 1");
    if (!params.grid) throw std::invalid_argument("tree_value: params.grid must reference the box");

    TreeContext ctx{problem, params, form,
                    gain_sup_norm(problem, *params.grid) / problem.discount, budget, 0, {}};
    return ctx.value(x0, depth);
}

ValueField gauss_seidel_solve(const ProblemSpec& problem, GridPtr grid, const QviForm& form,
                              const StepParams& params, double tol, int max_iters) {
    problem.check_basic();
    if (!(tol > 0.0)) throw std::invalid_argument("gauss_seidel_solve: tol must be > 0");

    double cost_max = 0.0;
    for (std::size_t flat = 0; flat < grid->node_count(); ++flat) {
        const Vec x = grid->node_coord(flat);
        for (int a = 0; a < static_cast<int>(problem.impulse_set_xi.size()); ++a)
            cost_max = std::max(cost_max, problem.cost_xi_at(x, a));
        for (int a = 0; a < static_cast<int>(problem.impulse_set_eta.size()); ++a)
            cost_max = std::max(cost_max, problem.cost_eta_at(x, a));
    }
    const double guard = 10.0 * (gain_sup_norm(problem, *grid) / problem.discount + cost_max);

    ValueField field(grid, 0.0);
    field.form_tag = form.name();
    const double lh = problem.discount * params.h;
    const double stop_delta = 0.5 * tol * std::min(1.0, lh / (1.0 - lh));
    for (int it = 0; it < max_iters; ++it) {
        double delta = 0.0, sup = 0.0;
        for (std::size_t flat = 0; flat < grid->node_count(); ++flat) {
            const Vec x = grid->node_coord(flat);
            const double v = qvi_update(field, problem, x, form, params);
            delta = std::max(delta, std::abs(v - field.values[flat]));
            sup = std::max(sup, std::abs(v));
            field.values[flat] = v;
        }
        if (sup > guard)
            throw DivergenceError("gauss_seidel_solve(" + form.name() +
                                  "): iterate exceeded the divergence guard");
        if (delta <= stop_delta) return field;
    }
    throw std::runtime_error("gauss_seidel_solve: no convergence within max_iters");
}

} // namespace qvi
