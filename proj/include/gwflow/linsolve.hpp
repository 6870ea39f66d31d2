#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gwflow/sparse.hpp"

namespace gwflow {

enum class Preconditioner { none, jacobi };

struct CgResult {
    std::vector<double> x;
    int iterations = 0;
    double relative_residual = 0.0;        ///< ||b - A x|| / ||b||
    std::vector<double> residual_history;  ///< relative residual after each iteration, starting with x0
};

class LinearSolverError : public std::runtime_error {
public:
    LinearSolverError(const std::string& what, std::vector<double> history)
        : std::runtime_error(what), residual_history(std::move(history)) {}
    std::vector<double> residual_history;
};

struct CgOptions {
    double rel_tol = 1e-8;
    int max_iter = 10000;
    Preconditioner preconditioner = Preconditioner::jacobi;
};

/// Preconditioned conjugate gradients for a symmetric positive-definite system.
/// Throws LinearSolverError when `max_iter` is exhausted and std::invalid_argument
/// on non-finite input or a non-positive diagonal under Jacobi.
CgResult solve_cg(const SparseSystem& system, std::span<const double> x0, const CgOptions& options);
CgResult solve_cg(const CsrMatrix& a, std::span<const double> rhs, std::span<const double> x0, const CgOptions& options);

/// Inner tolerance tied to the Picard tolerance: min(1e-8, 1e-2 eps / max(max|h|, 1)).
double linear_tolerance_for(double picard_epsilon, double max_abs_head);

} // namespace gwflow
