#include "qvi/policy.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace qvi {

PolicyField extract_policy(const SolveReport& report, const ProblemSpec& problem,
                           const StepParams& params) {
    if (!report.converged)
        throw std::invalid_argument("extract_policy: refusing a non-converged report");
    const Grid& grid = *report.field.grid;
    PolicyField policy;
    policy.grid = report.field.grid;
    policy.form = report.form;
    policy.decisions.resize(grid.node_count());

    for (std::size_t flat = 0; flat < grid.node_count(); ++flat) {
        const Vec x = grid.node_coord(flat);
        const SlResult s = sl_value(report.field, problem, x, params, report.form.hamiltonian);
        const InterveneResult m = intervene(report.field, problem, x, Player::xi);
        const InterveneResult n = intervene(report.field, problem, x, Player::eta);

        Decision d;
        d.ctrl = s.arg;
        d.kind = choose_branch(report.form.nesting, s.value, m.value, n.value);
        if (d.kind == BranchKind::impulse_xi) d.action = m.arg;
        if (d.kind == BranchKind::impulse_eta) d.action = n.arg;
        policy.decisions[flat] = d;
    }
    return policy;
}

namespace {

bool in_box(const Grid& grid, const Vec& x, double slack_cells) {
    for (std::size_t k = 0; k < grid.dim(); ++k) {
        const double slack = slack_cells * grid.spacing()[k];
        if (x[k] < grid.lo()[k] - slack || x[k] > grid.hi()[k] + slack) return false;
    }
    return true;
}

} // namespace

TrajectoryRecord simulate(const ProblemSpec& problem, const PolicyField& xi_policy,
                          const PolicyField& eta_policy, const Vec& x0,
                          const SimulateParams& params) {
    if (!xi_policy.grid->same_as(*eta_policy.grid))
        throw std::invalid_argument("simulate: the two policy views use different grids");
    const Grid& grid = *xi_policy.grid;
    if (!in_box(grid, x0, 0.0)) throw std::invalid_argument("simulate: x0 outside the box");
    if (!(params.h > 0.0)) throw std::invalid_argument("simulate: step must be > 0");
    const double steps_real = params.horizon / params.h;
    const long steps = std::lround(steps_real);
    if (steps < 0 || std::abs(steps_real - static_cast<double>(steps)) > 1e-9 * std::max(1.0, steps_real))
        throw std::invalid_argument("simulate: horizon must be a multiple of h");

    const double lambda = problem.discount;
    TrajectoryRecord rec;
    double flow_acc = 0.0;    // integral term, rectangle rule
    double impulse_acc = 0.0; // signed discounted impulse ledger
    Vec y = x0;

    for (long k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * params.h;

        // Impulse processing at this instant: the first player to act claims
        // the instant (eta wins a conflict); chained zero-time impulses by
        // that same player are allowed up to the loop guard.
        int flag = 0;
        bool eta_acted = false, xi_acted = false;
        int chain = 0;
        while (true) {
            const std::size_t node = grid.nearest_node(y);
            const bool eta_intent = eta_policy.decisions[node].kind == BranchKind::impulse_eta;
            const bool xi_intent = xi_policy.decisions[node].kind == BranchKind::impulse_xi;
            if (eta_intent && !xi_acted) {
                if (++chain > params.max_consecutive_impulses)
                    throw std::runtime_error(
                        "simulate: more than " + std::to_string(params.max_consecutive_impulses) +
                        " zero-time impulses at t = " + std::to_string(t) +
                        "; the policy looks inconsistent");
                const int action = eta_policy.decisions[node].action;
                const double cost = problem.cost_eta_at(y, action);
                y = problem.jump_dest_eta(y, action);
                impulse_acc += cost * std::exp(-lambda * t);
                rec.impulses.push_back({t, Player::eta, action, cost});
                eta_acted = true;
                flag = 2;
                continue;
            }
            if (xi_intent && !eta_acted) {
                if (++chain > params.max_consecutive_impulses)
                    throw std::runtime_error(
                        "simulate: more than " + std::to_string(params.max_consecutive_impulses) +
                        " zero-time impulses at t = " + std::to_string(t) +
                        "; the policy looks inconsistent");
                const int action = xi_policy.decisions[node].action;
                const double cost = problem.cost_xi_at(y, action);
                y = problem.jump_dest_xi(y, action);
                impulse_acc -= cost * std::exp(-lambda * t);
                rec.impulses.push_back({t, Player::xi, action, cost});
                xi_acted = true;
                flag = 1;
                continue;
            }
            break;
        }

        rec.times.push_back(t);
        rec.states.push_back(y);
        rec.event_flags.push_back(flag);
        rec.running_payoff.push_back(flow_acc + impulse_acc);

        if (!in_box(grid, y, 1.0)) {
            rec.truncated = true;
            break;
        }
        if (k == steps) break;

        const std::size_t node = grid.nearest_node(y);
        const ControlPair cp{xi_policy.decisions[node].ctrl.a, eta_policy.decisions[node].ctrl.b};
        flow_acc += params.h * problem.gain_at(y, cp) * std::exp(-lambda * t);
        y = y.axpy(params.h, problem.drift_at(y, cp));

        if (!in_box(grid, y, 1.0)) {
            rec.truncated = true;
            rec.times.push_back(t + params.h);
            rec.states.push_back(y);
            rec.event_flags.push_back(0);
            rec.running_payoff.push_back(flow_acc + impulse_acc);
            break;
        }
    }

    rec.flow_payoff = flow_acc;
    rec.payoff = flow_acc + impulse_acc;
    rec.truncation_error_bound =
        std::exp(-lambda * params.horizon) * gain_sup_norm(problem, grid) / lambda;
    return rec;
}

TrajectoryRecord simulate(const ProblemSpec& problem, const PolicyField& policy, const Vec& x0,
                          const SimulateParams& params) {
    return simulate(problem, policy, policy, x0, params);
}

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

void write_trajectory_csv(const TrajectoryRecord& record, std::ostream& out) {
    const std::size_t dim = record.states.empty() ? 0 : record.states.front().size();
    out << "t,";
    for (std::size_t k = 0; k < dim; ++k) out << "y" << k << ",";
    out << "event,payoff\n";
    for (std::size_t i = 0; i < record.times.size(); ++i) {
        out << fmt17(record.times[i]) << ",";
        for (std::size_t k = 0; k < dim; ++k) out << fmt17(record.states[i][k]) << ",";
        out << record.event_flags[i] << "," << fmt17(record.running_payoff[i]) << "\n";
    }
}

void write_trajectory_csv(const TrajectoryRecord& record, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_trajectory_csv(record, out);
}

} // namespace qvi
