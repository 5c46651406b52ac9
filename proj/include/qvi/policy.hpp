#pragma once

#include <iosfwd>
#include <vector>

#include "qvi/solver.hpp"

namespace qvi {

/// Per-node feedback decision read off a converged field: either flow with a
/// control pair, or one player's impulse. The control pair is kept even at
/// impulse nodes so a policy can always answer for the continuous controls.
struct Decision {
    BranchKind kind = BranchKind::continuous;
    ControlPair ctrl;
    int action = -1; // impulse candidate index when kind is an impulse
};

struct PolicyField {
    GridPtr grid;
    std::vector<Decision> decisions;
    QviForm form;

    const Decision& at(const Vec& x) const { return decisions[grid->nearest_node(x)]; }
};

/// Read the optimal branch of the discrete update at every node of a
/// converged report. Ties resolve continuous, then eta, then xi.
PolicyField extract_policy(const SolveReport& report, const ProblemSpec& problem,
                           const StepParams& params);

struct ImpulseEvent {
    double time = 0.0;
    Player player = Player::eta;
    int action = 0;
    double cost_paid = 0.0; // undiscounted cost at the impulse instant
};

struct TrajectoryRecord {
    std::vector<double> times;          // stamps, one per step instant
    std::vector<Vec> states;            // post-impulse state at each stamp
    std::vector<int> event_flags;       // 0 none, 1 xi impulse, 2 eta impulse
    std::vector<double> running_payoff; // accumulated discounted payoff
    std::vector<ImpulseEvent> impulses;

    double payoff = 0.0;     // flow_payoff + discounted impulse ledger
    double flow_payoff = 0.0;
    double truncation_error_bound = 0.0; // exp(-lambda T) ||f||_inf / lambda
    bool truncated = false;              // state escaped the box by > one cell
};

struct SimulateParams {
    double horizon = 0.0; // must be an integer multiple of h
    double h = 0.0;
    int max_consecutive_impulses = 10;
};

/// Forward simulation under one feedback policy for both players.
TrajectoryRecord simulate(const ProblemSpec& problem, const PolicyField& policy, const Vec& x0,
                          const SimulateParams& params);

/// Forward simulation with separate policy views per player. When both views
/// demand an impulse at the same instant only the eta player's is applied.
TrajectoryRecord simulate(const ProblemSpec& problem, const PolicyField& xi_policy,
                          const PolicyField& eta_policy, const Vec& x0,
                          const SimulateParams& params);

void write_trajectory_csv(const TrajectoryRecord& record, std::ostream& out);
void write_trajectory_csv(const TrajectoryRecord& record, const std::string& path);

} // namespace qvi
