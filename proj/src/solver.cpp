#include "qvi/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "qvi/parallel.hpp"

namespace qvi {

namespace {

/// Per-(grid, problem, form, h) tables: foot-point and jump-destination
/// stencils plus staged gains and costs. A sweep then touches no user
/// callbacks, only fixed-order stencil sums, so it parallelizes without
/// changing a single bit of the result.
struct PreparedSweep {
    const Grid* grid = nullptr;
    QviNesting nesting;
    HamiltonianKind kind;
    int na = 0, nb = 0, n_xi = 0, n_eta = 0;
    double carry = 0.0;

    std::vector<InterpStencil> sl_stencils; // node-major, pair index a*nb + b
    std::vector<double> sl_stage;           // h * f(x; a, b)
    std::vector<InterpStencil> xi_stencils; // node-major x action
    std::vector<double> xi_costs;
    std::vector<InterpStencil> eta_stencils;
    std::vector<double> eta_costs;

    double gain_sup = 0.0; // max |f| seen while staging
    double cost_max = 0.0; // max impulse cost seen while staging

    PreparedSweep(const ProblemSpec& problem, const Grid& g, const QviForm& form,
                  const StepParams& params)
        : grid(&g), nesting(form.nesting), kind(form.hamiltonian) {
        const double h = params.h;
        carry = 1.0 - problem.discount * h;
        na = static_cast<int>(problem.ctrl_set_a.size());
        nb = static_cast<int>(problem.ctrl_set_b.size());
        n_xi = static_cast<int>(problem.impulse_set_xi.size());
        n_eta = static_cast<int>(problem.impulse_set_eta.size());

        const std::size_t nodes = g.node_count();
        sl_stencils.reserve(nodes * static_cast<std::size_t>(na * nb));
        sl_stage.reserve(nodes * static_cast<std::size_t>(na * nb));
        xi_stencils.reserve(nodes * static_cast<std::size_t>(n_xi));
        xi_costs.reserve(nodes * static_cast<std::size_t>(n_xi));
        eta_stencils.reserve(nodes * static_cast<std::size_t>(n_eta));
        eta_costs.reserve(nodes * static_cast<std::size_t>(n_eta));

        for (std::size_t flat = 0; flat < nodes; ++flat) {
            const Vec x = g.node_coord(flat);
            for (int a = 0; a < na; ++a)
                for (int b = 0; b < nb; ++b) {
                    const ControlPair cp{a, b};
                    const Vec foot = x.axpy(h, problem.drift_at(x, cp));
                    const double f = problem.gain_at(x, cp);
                    gain_sup = std::max(gain_sup, std::abs(f));
                    sl_stencils.push_back(make_stencil(g, foot));
                    sl_stage.push_back(h * f);
                }
            for (int a = 0; a < n_xi; ++a) {
                const double c = problem.cost_xi_at(x, a);
                cost_max = std::max(cost_max, c);
                xi_stencils.push_back(make_stencil(g, problem.jump_dest_xi(x, a)));
                xi_costs.push_back(c);
            }
            for (int a = 0; a < n_eta; ++a) {
                const double c = problem.cost_eta_at(x, a);
                cost_max = std::max(cost_max, c);
                eta_stencils.push_back(make_stencil(g, problem.jump_dest_eta(x, a)));
                eta_costs.push_back(c);
            }
        }
    }

    double update_node(std::size_t flat, const std::vector<double>& values) const {
        const std::size_t sl_off = flat * static_cast<std::size_t>(na * nb);

        double s;
        if (kind == HamiltonianKind::lower) {
            s = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < na; ++a) {
                double inner = std::numeric_limits<double>::infinity();
                for (int b = 0; b < nb; ++b) {
                    const std::size_t p = sl_off + static_cast<std::size_t>(a * nb + b);
                    const double v = sl_stage[p] + carry * eval_stencil(sl_stencils[p], values);
                    if (v < inner) inner = v;
                }
                if (inner > s) s = inner;
            }
        } else {
            s = std::numeric_limits<double>::infinity();
            for (int b = 0; b < nb; ++b) {
                double inner = -std::numeric_limits<double>::infinity();
                for (int a = 0; a < na; ++a) {
                    const std::size_t p = sl_off + static_cast<std::size_t>(a * nb + b);
                    const double v = sl_stage[p] + carry * eval_stencil(sl_stencils[p], values);
                    if (v > inner) inner = v;
                }
                if (inner < s) s = inner;
            }
        }

        double m = -std::numeric_limits<double>::infinity();
        {
            const std::size_t off = flat * static_cast<std::size_t>(n_xi);
            for (int a = 0; a < n_xi; ++a) {
                const double v = eval_stencil(xi_stencils[off + a], values) - xi_costs[off + a];
                if (v > m) m = v;
            }
        }
        double n = std::numeric_limits<double>::infinity();
        {
            const std::size_t off = flat * static_cast<std::size_t>(n_eta);
            for (int a = 0; a < n_eta; ++a) {
                const double v = eval_stencil(eta_stencils[off + a], values) + eta_costs[off + a];
                if (v < n) n = v;
            }
        }
        return compose_qvi(nesting, s, m, n);
    }
};

struct SweepStats {
    double delta = 0.0;
    double sup = 0.0;
};

SweepStats run_sweep(const PreparedSweep& prep, const std::vector<double>& old_values,
                     std::vector<double>& new_values, int threads) {
    const std::size_t total = old_values.size();
    std::vector<SweepStats> chunk(static_cast<std::size_t>(std::max(threads, 1)));
    parallel_for(total, threads, [&](std::size_t begin, std::size_t end, int c) {
        double delta = 0.0, sup = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            const double v = prep.update_node(i, old_values);
            new_values[i] = v;
            delta = std::max(delta, std::abs(v - old_values[i]));
            sup = std::max(sup, std::abs(v));
        }
        chunk[static_cast<std::size_t>(c)] = {delta, sup};
    });
    SweepStats out;
    for (const auto& s : chunk) {
        out.delta = std::max(out.delta, s.delta);
        out.sup = std::max(out.sup, s.sup);
    }
    return out;
}

void check_params(const ProblemSpec& problem, const StepParams& params) {
    const double lh = problem.discount * params.h;
    if (!(params.h > 0.0) || !(lh < 1.0))
        throw std::invalid_argument("solver: need 0 < lambda*h < 1, got lambda*h = " +
                                    std::to_string(lh));
}

} // namespace

ValueField jacobi_sweep(const ValueField& field, const ProblemSpec& problem, const QviForm& form,
                        const StepParams& params, int threads) {
    check_params(problem, params);
    const PreparedSweep prep(problem, *field.grid, form, params);
    ValueField next(field.grid);
    run_sweep(prep, field.values, next.values, threads);
    next.form_tag = form.name();
    return next;
}

SolveReport solve(const ProblemSpec& problem, GridPtr grid, const QviForm& form,
                  const SolverParams& params) {
    problem.check_basic();
    check_params(problem, params.step);
    if (params.tol_fix <= 0.0) throw std::invalid_argument("solve: tol_fix must be > 0");
    if (params.max_iters < 1) throw std::invalid_argument("solve: max_iters must be >= 1");

    const auto t0 = std::chrono::steady_clock::now();
    const PreparedSweep prep(problem, *grid, form, params.step);

    const double guard =
        10.0 * (prep.gain_sup / problem.discount + prep.cost_max);
    // Stop on the contraction-corrected delta: a geometric tail with ratio
    // (1 - lambda h) then pins the field itself to within tol_fix of the
    // fixed point, which is what the agreement bounds downstream assume.
    // Halved because deltas in the impulse regions echo the contracting
    // continuation region with a lag.
    const double lh = problem.discount * params.step.h;
    const double stop_delta = 0.5 * params.tol_fix * std::min(1.0, lh / (1.0 - lh));

    SolveReport report;
    report.form = form;
    report.field = ValueField(grid, 0.0);
    switch (params.init) {
    case InitKind::zeros: break;
    case InitKind::constant:
        std::fill(report.field.values.begin(), report.field.values.end(), params.init_constant);
        break;
    case InitKind::field:
        if (!params.init_field || !params.init_field->grid->same_as(*grid))
            throw std::invalid_argument("solve: init field missing or on a different grid");
        report.field.values = params.init_field->values;
        break;
    }

    std::vector<double> next(grid->node_count());
    for (int it = 0; it < params.max_iters; ++it) {
        const SweepStats stats = run_sweep(prep, report.field.values, next, params.threads);
        report.field.values.swap(next);
        report.residual_history.push_back(stats.delta);
        report.iterations = it + 1;
        if (stats.sup > guard)
            throw DivergenceError("solve(" + form.name() + "): iterate sup norm " +
                                  std::to_string(stats.sup) + " exceeded the divergence guard " +
                                  std::to_string(guard) + "; the problem looks misconfigured");
        if (stats.delta <= stop_delta) {
            report.converged = true;
            break;
        }
    }
    report.field.form_tag = form.name();
    report.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

double isaacs_gap(const SolveReport& report_a, const SolveReport& report_b) {
    return sup_norm_diff(report_a.field, report_b.field);
}

std::vector<Lemma1Violation> check_lemma1(const SolveReport& report, const ProblemSpec& problem,
                                          double tol) {
    if (!report.converged)
        throw std::invalid_argument("check_lemma1: refusing a non-converged report");
    std::vector<Lemma1Violation> out;
    const Grid& grid = *report.field.grid;
    for (std::size_t flat = 0; flat < grid.node_count(); ++flat) {
        const Vec x = grid.node_coord(flat);
        const double v = report.field.values[flat];
        const double n = intervene(report.field, problem, x, Player::eta).value;
        const double m = intervene(report.field, problem, x, Player::xi).value;
        if (v > n + tol) out.push_back({flat, 1, v, n, m});
        if (v < n - tol && v < m - tol) out.push_back({flat, 2, v, n, m});
    }
    return out;
}

double gain_sup_norm(const ProblemSpec& problem, const Grid& grid) {
    double sup = 0.0;
    for (std::size_t flat = 0; flat < grid.node_count(); ++flat) {
        const Vec x = grid.node_coord(flat);
        for (int a = 0; a < static_cast<int>(problem.ctrl_set_a.size()); ++a)
            for (int b = 0; b < static_cast<int>(problem.ctrl_set_b.size()); ++b)
                sup = std::max(sup, std::abs(problem.gain_at(x, {a, b})));
    }
    return sup;
}

double auto_step(const ProblemSpec& problem, const Grid& grid) {
    double drift_sup = 0.0;
    for (std::size_t flat = 0; flat < grid.node_count(); ++flat) {
        const Vec x = grid.node_coord(flat);
        for (int a = 0; a < static_cast<int>(problem.ctrl_set_a.size()); ++a)
            for (int b = 0; b < static_cast<int>(problem.ctrl_set_b.size()); ++b)
                drift_sup = std::max(drift_sup, problem.drift_at(x, {a, b}).norm_inf());
    }
    double h = grid.min_spacing() / std::max(drift_sup, 1.0);
    const double cap = 0.5 / problem.discount;
    return std::min(h, cap);
}

} // namespace qvi
