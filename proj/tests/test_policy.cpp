#include "doctest.h"

#include <cmath>
#include <cstring>
#include <sstream>

#include "qvi/policy.hpp"

using namespace qvi;

namespace {

SolverParams default_params(const ProblemSpec& p, GridPtr g, double tol = 1e-9) {
    SolverParams sp;
    sp.step = {auto_step(p, *g), g};
    sp.tol_fix = tol;
    return sp;
}

/// Drift-free two-axis game: the maximizer's impulse raises the gain axis,
/// the minimizer's raises the cost axis, and both are worth taking in the
/// middle of the box. Jumps never revisit a state, so both forms settle.
ProblemSpec cross_impulse_game() {
    ProblemSpec p;
    p.name = "crossimpulse";
    p.dim = 2;
    p.discount = 1.0;
    p.drift = [](const Vec& x, const Vec&, const Vec&) { return Vec(x.size(), 0.0); };
    p.gain = [](const Vec& y, const Vec&, const Vec&) { return y[0] - y[1]; };
    p.jump_xi = [](const Vec&, const Vec& a) { return a; };
    p.jump_eta = [](const Vec&, const Vec& a) { return a; };
    p.cost_xi = [](const Vec&, const Vec&) { return 0.9; };
    p.cost_eta = [](const Vec&, const Vec&) { return 0.8; };
    p.ctrl_set_a = {Vec{0.0}};
    p.ctrl_set_b = {Vec{0.0}};
    p.impulse_set_xi = {Vec{2.0, 0.0}};
    p.impulse_set_eta = {Vec{0.0, 2.0}};
    return p;
}

} // namespace

TEST_CASE("extract_policy: constant game never impulses") {
    const auto p = make_builtin("constant", {{"f0", 2.0}, {"lambda", 1.0}, {"kappa", 1.0}});
    auto g = build_grid(Vec{-1.0}, Vec{1.0}, {21});
    const auto params = default_params(p, g);
    const auto report = solve(p, g, QviForm::L(), params);
    const auto policy = extract_policy(report, p, params.step);
    for (const auto& d : policy.decisions) CHECK(d.kind == BranchKind::continuous);
}

TEST_CASE("extract_policy: impulse1d jumps only outside the continuation region") {
    const auto p = make_builtin("impulse1d", {{"lambda", 1.0}, {"kappa", 4.0}, {"W", 4.0}});
    auto g = build_grid(Vec{-3.0}, Vec{3.0}, {241});
    const auto params = default_params(p, g);
    const auto report = solve(p, g, QviForm::U(), params);
    const auto policy = extract_policy(report, p, params.step);

    const auto& at3 = policy.decisions[g->nearest_node(Vec{3.0})];
    CHECK(at3.kind == BranchKind::impulse_eta);
    const double dest = 3.0 + p.impulse_set_eta[static_cast<std::size_t>(at3.action)][0];
    CHECK(std::abs(dest) <= 0.051); // jump lands by the valley floor

    CHECK(policy.decisions[g->nearest_node(Vec{1.0})].kind == BranchKind::continuous);
    CHECK(policy.decisions[g->nearest_node(Vec{0.0})].kind == BranchKind::continuous);

    SolveReport bad;
    bad.converged = false;
    bad.field = report.field;
    CHECK_THROWS_AS(extract_policy(bad, p, params.step), std::invalid_argument);
}

TEST_CASE("simulate: constant game reproduces the discounted integral") {
    const auto p = make_builtin("constant", {{"f0", 2.0}, {"lambda", 1.0}, {"kappa", 1.0}});
    auto g = build_grid(Vec{-1.0}, Vec{1.0}, {21});
    const auto params = default_params(p, g);
    const auto report = solve(p, g, QviForm::L(), params);
    const auto policy = extract_policy(report, p, params.step);

    SimulateParams sp;
    sp.horizon = 5.0;
    sp.h = 0.01;
    const auto rec = simulate(p, policy, Vec{0.25}, sp);
    const double closed = 2.0 * (1.0 - std::exp(-5.0));
    CHECK(rec.impulses.empty());
    CHECK(std::abs(rec.payoff - closed) < 0.015); // rectangle-rule slack
    CHECK(rec.truncation_error_bound == doctest::Approx(std::exp(-5.0) * 2.0));
    CHECK(!rec.truncated);
}

TEST_CASE("simulate: impulse1d payoff is consistent with the solved field") {
    const auto p = make_builtin("impulse1d", {{"lambda", 1.0}, {"kappa", 4.0}, {"W", 4.0}});
    auto g = build_grid(Vec{-3.0}, Vec{3.0}, {241});
    const auto params = default_params(p, g);
    const auto report = solve(p, g, QviForm::U(), params);
    const auto policy = extract_policy(report, p, params.step);

    SimulateParams sp;
    sp.horizon = 20.0;
    sp.h = 0.01;

    const auto from3 = simulate(p, policy, Vec{3.0}, sp);
    REQUIRE(from3.impulses.size() == 1);
    CHECK(from3.impulses[0].time == 0.0);
    CHECK(from3.impulses[0].player == Player::eta);
    CHECK(from3.impulses[0].cost_paid == 4.0);
    CHECK(std::abs(from3.payoff - interpolate(report.field, Vec{3.0})) < 0.1);

    const auto from1 = simulate(p, policy, Vec{1.0}, sp);
    CHECK(from1.impulses.empty());
    CHECK(std::abs(from1.payoff - 1.0) < 0.02);

    for (std::size_t i = 1; i < from3.impulses.size(); ++i)
        CHECK(from3.impulses[i - 1].time <= from3.impulses[i].time);
}

TEST_CASE("simulate: a runaway state truncates the trajectory") {
    ProblemSpec p = make_builtin("constant", {{"f0", 1.0}, {"lambda", 1.0}, {"kappa", 1.0}});
    p.drift = [](const Vec& x, const Vec&, const Vec&) { return Vec(x.size(), 3.0); };
    auto g = build_grid(Vec{-1.0}, Vec{1.0}, {21});
    PolicyField policy;
    policy.grid = g;
    policy.form = QviForm::L();
    policy.decisions.resize(g->node_count()); // all continuous
    SimulateParams sp;
    sp.horizon = 5.0;
    sp.h = 0.1;
    const auto rec = simulate(p, policy, Vec{0.9}, sp);
    CHECK(rec.truncated);
    CHECK(rec.times.back() < 5.0);
    CHECK(rec.states.back()[0] > 1.0 + g->spacing()[0]);
}

TEST_CASE("simulate: payoff ledger is reproducible from the record") {
    const auto p = make_builtin("impulse1d", {{"lambda", 1.0}, {"kappa", 4.0}, {"W", 4.0}});
    auto g = build_grid(Vec{-3.0}, Vec{3.0}, {241});
    const auto params = default_params(p, g);
    const auto report = solve(p, g, QviForm::U(), params);
    const auto policy = extract_policy(report, p, params.step);

    SimulateParams sp;
    sp.horizon = 10.0;
    sp.h = 0.01;
    const auto rec = simulate(p, policy, Vec{2.5}, sp);
    double impulse_sum = 0.0;
    for (const auto& e : rec.impulses) {
        const double term = e.cost_paid * std::exp(-p.discount * e.time);
        impulse_sum += e.player == Player::eta ? term : -term;
    }
    const double recomputed = rec.flow_payoff + impulse_sum;
    CHECK(std::memcmp(&recomputed, &rec.payoff, sizeof(double)) == 0);
}

TEST_CASE("simulate: preconditions") {
    const auto p = make_builtin("constant", {{"f0", 2.0}, {"lambda", 1.0}, {"kappa", 1.0}});
    auto g = build_grid(Vec{-1.0}, Vec{1.0}, {21});
    const auto params = default_params(p, g);
    const auto report = solve(p, g, QviForm::L(), params);
    const auto policy = extract_policy(report, p, params.step);
    SimulateParams sp;
    sp.horizon = 1.0;
    sp.h = 0.01;
    CHECK_THROWS_AS(simulate(p, policy, Vec{5.0}, sp), std::invalid_argument);
    sp.horizon = 1.005; // not a multiple of h
    CHECK_THROWS_AS(simulate(p, policy, Vec{0.0}, sp), std::invalid_argument);
}

TEST_CASE("simulate: the zero-time impulse loop guard fires on a broken policy") {
    const auto p = make_builtin("constant", {{"f0", 2.0}, {"lambda", 1.0}, {"kappa", 1.0}});
    auto g = build_grid(Vec{-1.0}, Vec{1.0}, {21});
    PolicyField policy;
    policy.grid = g;
    policy.form = QviForm::L();
    policy.decisions.resize(g->node_count());
    for (auto& d : policy.decisions) {
        d.kind = BranchKind::impulse_eta;
        d.action = 0; // every node demands another jump, forever
    }
    SimulateParams sp;
    sp.horizon = 1.0;
    sp.h = 0.1;
    CHECK_THROWS_WITH_AS(simulate(p, policy, Vec{0.0}, sp),
                         doctest::Contains("zero-time impulses"), std::runtime_error);
}

TEST_CASE("simulate: trajectory stability under identical decisions") {
    const auto p = make_builtin("portfolio", {{"lambda", 1.0}});
    auto g = build_grid(Vec{-1.0, -1.0}, Vec{1.0, 1.0}, {17, 17});
    const auto params = default_params(p, g, 1e-8);
    const auto report = solve(p, g, QviForm::U(), params);
    const auto policy = extract_policy(report, p, params.step);

    SimulateParams sp;
    sp.horizon = 2.0;
    sp.h = 0.01;
    const Vec x0{0.26, -0.38}; // off the cell midlines so a tiny shift keeps decisions
    const Vec x1{0.26 + 1e-5, -0.38 + 1e-5};
    const auto r0 = simulate(p, policy, x0, sp);
    const auto r1 = simulate(p, policy, x1, sp);
    REQUIRE(r0.impulses.size() == r1.impulses.size());
    REQUIRE(r0.states.size() == r1.states.size());

    const double delta0 = (x1 - x0).norm();
    const double drift_lip = 0.5; // portfolio mean-reversion rate
    for (std::size_t i = 0; i < r0.states.size(); ++i) {
        const double gap = (r0.states[i] - r1.states[i]).norm();
        CHECK(gap <= std::exp(drift_lip * r0.times[i]) * delta0 * (1.0 + 1e-9));
    }
}

TEST_CASE("simulate: simultaneous demands resolve to the eta player") {
    const auto p = cross_impulse_game();
    auto g = build_grid(Vec{-3.0, -3.0}, Vec{3.0, 3.0}, {13, 13});
    SolverParams params;
    params.step = {0.1, g};
    params.tol_fix = 1e-9;
    const auto rl = solve(p, g, QviForm::L(), params);
    const auto ru = solve(p, g, QviForm::U(), params);
    REQUIRE(rl.converged);
    REQUIRE(ru.converged);
    const auto policy_l = extract_policy(rl, p, params.step);
    const auto policy_u = extract_policy(ru, p, params.step);

    // Find a node where the L policy fires the maximizer and the U policy the
    // minimizer; in the middle of this game both want to act.
    std::size_t conflict = g->node_count();
    for (std::size_t i = 0; i < g->node_count(); ++i) {
        if (policy_l.decisions[i].kind == BranchKind::impulse_xi &&
            policy_u.decisions[i].kind == BranchKind::impulse_eta) {
            conflict = i;
            break;
        }
    }
    REQUIRE(conflict < g->node_count());

    SimulateParams sp;
    sp.horizon = 1.0;
    sp.h = 0.1;
    const auto rec = simulate(p, policy_l, policy_u, g->node_coord(conflict), sp);
    REQUIRE(!rec.impulses.empty());
    CHECK(rec.impulses[0].time == 0.0);
    CHECK(rec.impulses[0].player == Player::eta);
    // no time stamp carries impulses from both players
    for (std::size_t i = 0; i < rec.impulses.size(); ++i)
        for (std::size_t j = i + 1; j < rec.impulses.size(); ++j)
            if (rec.impulses[i].time == rec.impulses[j].time)
                CHECK(rec.impulses[i].player == rec.impulses[j].player);
}

TEST_CASE("trajectory CSV shape") {
    const auto p = make_builtin("constant", {{"f0", 2.0}, {"lambda", 1.0}, {"kappa", 1.0}});
    auto g = build_grid(Vec{-1.0}, Vec{1.0}, {11});
    const auto params = default_params(p, g);
    const auto report = solve(p, g, QviForm::L(), params);
    const auto policy = extract_policy(report, p, params.step);
    SimulateParams sp;
    sp.horizon = 0.5;
    sp.h = 0.1;
    const auto rec = simulate(p, policy, Vec{0.0}, sp);
    std::ostringstream out;
    write_trajectory_csv(rec, out);
    const std::string text = out.str();
    CHECK(text.substr(0, text.find('\n')) == "t,y0,event,payoff");
    std::size_t rows = 0;
    for (char c : text)
        if (c == '\n') ++rows;
    CHECK(rows == rec.times.size() + 1);
}
