#pragma once

#include "qvi/solver.hpp"

namespace qvi {

/// Two-sided bracket of the K-step truncated value at one state.
struct ValueInterval {
    double lo = 0.0;
    double hi = 0.0;

    double midpoint() const { return 0.5 * (lo + hi); }
    double width() const { return hi - lo; }
    bool contains(double v, double slack = 0.0) const {
        return lo - slack <= v && v <= hi + slack;
    }
};

/// Exact backward induction over the K-level decision tree rooted at x0, with
/// no grid anywhere: states evolve exactly, impulses consume a level without
/// advancing time, and leaves carry the a-priori value bound +-||f||_inf /
/// lambda. Both interval ends propagate through the same monotone recursion.
/// Repeated states are memoized on their exact bit patterns, which keeps
/// drift-free and lattice problems tractable; `budget` caps the number of
/// branch evaluations otherwise.
ValueInterval tree_value(const ProblemSpec& problem, const Vec& x0, int depth,
                         const StepParams& params, const QviForm& form,
                         std::size_t budget = 50'000'000);

/// Single-threaded fixed-point solve sweeping nodes in lexicographic order
/// and consuming freshly written values immediately. Used as an
/// iteration-order cross-check of the Jacobi solver.
ValueField gauss_seidel_solve(const ProblemSpec& problem, GridPtr grid, const QviForm& form,
                              const StepParams& params, double tol, int max_iters = 200000);

} // namespace qvi
