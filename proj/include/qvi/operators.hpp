#pragma once

#include <algorithm>
#include <string>

#include "qvi/grid.hpp"
#include "qvi/problem.hpp"

namespace qvi {

enum class HamiltonianKind { lower, upper };

/// Outermost min/max of the variational inequality as written; the
/// solved-for-v update swaps it.
enum class QviNesting { min_outer, max_outer };

/// One of the four double-obstacle forms:
///   L    = lower Hamiltonian, min outside
///   U    = upper Hamiltonian, max outside
///   Lmax = lower Hamiltonian, max outside
///   Umin = upper Hamiltonian, min outside
struct QviForm {
    HamiltonianKind hamiltonian = HamiltonianKind::lower;
    QviNesting nesting = QviNesting::min_outer;

    static QviForm L() { return {HamiltonianKind::lower, QviNesting::min_outer}; }
    static QviForm U() { return {HamiltonianKind::upper, QviNesting::max_outer}; }
    static QviForm Lmax() { return {HamiltonianKind::lower, QviNesting::max_outer}; }
    static QviForm Umin() { return {HamiltonianKind::upper, QviNesting::min_outer}; }

    static QviForm parse(const std::string& name);
    std::string name() const;

    bool operator==(const QviForm& o) const {
        return hamiltonian == o.hamiltonian && nesting == o.nesting;
    }
};

/// Time step of the discrete dynamic-programming update.
struct StepParams {
    double h = 0.0;
    GridPtr grid;
};

/// Branch composition of the discrete update. For the min-outer forms the
/// per-node value is max(min(S, N), M); for max-outer it is min(max(S, M), N),
/// with S the semi-Lagrangian value, M the maximizer's intervention value and
/// N the minimizer's.
inline double compose_qvi(QviNesting nesting, double s, double m, double n) {
    if (nesting == QviNesting::min_outer) return std::max(std::min(s, n), m);
    return std::min(std::max(s, m), n);
}

enum class BranchKind { continuous, impulse_xi, impulse_eta };

/// Which branch attains compose_qvi; ties resolve continuous, then the
/// eta-impulse, then the xi-impulse.
BranchKind choose_branch(QviNesting nesting, double s, double m, double n);

struct SlResult {
    double value = 0.0;
    ControlPair arg;
};

/// One semi-Lagrangian step of the continuous branch:
///   lower: max over a of min over b of  h f + (1 - lambda h) v(x + h b)
///   upper: min over b of max over a of the same expression.
/// The arg pair is the first optimum in enumeration order.
SlResult sl_value(const ValueField& field, const ProblemSpec& problem, const Vec& x,
                  const StepParams& params, HamiltonianKind kind);

enum class Player { xi, eta };

struct InterveneResult {
    double value = 0.0;
    int arg = 0;
};

/// Intervention operators on the interpolated field:
///   xi  (M): max over candidates of v(x + g_xi)  - c
///   eta (N): min over candidates of v(x + g_eta) + chi
InterveneResult intervene(const ValueField& field, const ProblemSpec& problem, const Vec& x,
                          Player player);

/// Full per-point update: compose_qvi over (sl_value, M, N) for the form.
double qvi_update(const ValueField& field, const ProblemSpec& problem, const Vec& x,
                  const QviForm& form, const StepParams& params);

/// Enumerated Hamiltonian at gradient p: lower = min over a of max over b,
/// upper = max over b of min over a, of (-p . b(x,a,b) - f(x,a,b)).
double hamiltonian_enum(const ProblemSpec& problem, const Vec& x, const Vec& p,
                        HamiltonianKind kind);

/// Residual of the stationary variational inequality on the grid, with the
/// gradient taken by central differences (one-sided at the boundary).
ValueField hjbi_residual(const ValueField& field, const ProblemSpec& problem,
                         const QviForm& form);

} // namespace qvi
