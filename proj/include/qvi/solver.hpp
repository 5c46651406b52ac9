#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "qvi/operators.hpp"

namespace qvi {

/// Thrown when an iterate escapes the a-priori bound on any correct solution,
/// which signals a misconfigured problem rather than slow convergence.
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class InitKind { zeros, constant, field };

struct SolverParams {
    StepParams step;
    double tol_fix = 1e-9;  // sup-norm tolerance on successive iterates
    int max_iters = 200000;
    InitKind init = InitKind::zeros;
    double init_constant = 0.0;
    std::optional<ValueField> init_field;
    int threads = 1;
};

struct SolveReport {
    ValueField field;
    QviForm form;
    int iterations = 0;
    std::vector<double> residual_history; // sup-norm delta per sweep
    bool converged = false;
    double wall_time = 0.0;

    double final_delta() const {
        return residual_history.empty() ? 0.0 : residual_history.back();
    }
};

/// One full Jacobi sweep of the discrete update (reads old field, writes a
/// fresh one). Output is bit-identical for any thread count.
ValueField jacobi_sweep(const ValueField& field, const ProblemSpec& problem, const QviForm& form,
                        const StepParams& params, int threads = 1);

/// Fixed-point iteration of the discrete update until the sup-norm delta of
/// successive sweeps drops below tol_fix (or max_iters).
SolveReport solve(const ProblemSpec& problem, GridPtr grid, const QviForm& form,
                  const SolverParams& params);

/// Sup-norm distance between two solved fields on the same grid.
double isaacs_gap(const SolveReport& report_a, const SolveReport& report_b);

struct Lemma1Violation {
    std::size_t node = 0;
    int property = 0; // 1: v > Nv, 2: v < Nv but also v < Mv
    double v = 0.0;
    double n_value = 0.0;
    double m_value = 0.0;
};

/// Check the obstacle ordering on a converged field: (i) v <= Nv everywhere;
/// (ii) wherever v < Nv strictly, v >= Mv. Empty result means pass.
std::vector<Lemma1Violation> check_lemma1(const SolveReport& report, const ProblemSpec& problem,
                                          double tol);

/// Sampled sup norm of the running gain over grid nodes and control pairs.
double gain_sup_norm(const ProblemSpec& problem, const Grid& grid);

/// Step-size heuristic: min spacing over the sampled drift bound, capped so
/// that lambda * h <= 0.5.
double auto_step(const ProblemSpec& problem, const Grid& grid);

} // namespace qvi
