#include "gwflow/linsolve.hpp"

#include <algorithm>
#include <cmath>

#include "gwflow/kernels.hpp"

namespace gwflow {

namespace kp = kernels::par;

CgResult solve_cg(const SparseSystem& system, std::span<const double> x0, const CgOptions& options)
{
    return solve_cg(system.matrix, system.rhs, x0, options);
}

CgResult solve_cg(const CsrMatrix& a, std::span<const double> rhs, std::span<const double> x0, const CgOptions& options)
{
    const auto n = static_cast<std::size_t>(a.rows);
    if (rhs.size() != n || x0.size() != n) throw DimensionError("solve_cg: dimension mismatch");
    if (!(options.rel_tol > 0.0 && options.rel_tol < 1.0)) throw std::invalid_argument("solve_cg: rel_tol must lie in (0,1)");
    for (double v : a.values)
        if (!std::isfinite(v)) throw std::invalid_argument("solve_cg: non-finite matrix entry");
    for (double v : rhs)
        if (!std::isfinite(v)) throw std::invalid_argument("solve_cg: non-finite right-hand side");

    std::vector<double> inv_diag(n, 1.0);
    if (options.preconditioner == Preconditioner::jacobi) {
        for (Index r = 0; r < a.rows; ++r) {
            const double d = a.at(r, r);
            if (!(d > 0.0)) throw std::invalid_argument("solve_cg: non-positive diagonal in row " + std::to_string(r));
            inv_diag[r] = 1.0 / d;
        }
    }

    CgResult out;
    out.x.assign(x0.begin(), x0.end());
    const double b_norm = std::sqrt(kp::dot(rhs, rhs));
    if (b_norm == 0.0) {
        std::fill(out.x.begin(), out.x.end(), 0.0);
        out.residual_history.push_back(0.0);
        return out;
    }

    std::vector<double> r(n);
    std::vector<double> z(n);
    std::vector<double> p(n);
    std::vector<double> q(n);

    kp::spmv(a, out.x, q);
    #pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) r[i] = rhs[i] - q[i];

    double rel = std::sqrt(kp::dot(r, r)) / b_norm;
    out.residual_history.push_back(rel);
    if (rel <= options.rel_tol) {
        out.relative_residual = rel;
        return out;
    }

    kp::jacobi_apply(inv_diag, r, z);
    std::copy(z.begin(), z.end(), p.begin());
    double rz = kp::dot(r, z);

    for (int it = 1; it <= options.max_iter; ++it) {
        kp::spmv(a, p, q);
        const double pq = kp::dot(p, q);
        if (!(pq > 0.0)) throw LinearSolverError("solve_cg: matrix is not positive definite (p.Ap <= 0)",
                                                 out.residual_history);
        const double alpha = rz / pq;
        kp::axpy(alpha, p, out.x);
        kp::axpy(-alpha, q, r);
        rel = std::sqrt(kp::dot(r, r)) / b_norm;
        out.residual_history.push_back(rel);
        out.iterations = it;
        if (rel <= options.rel_tol) {
            out.relative_residual = rel;
            return out;
        }
        kp::jacobi_apply(inv_diag, r, z);
        const double rz_new = kp::dot(r, z);
        kp::xpby(z, rz_new / rz, p);
        rz = rz_new;
    }
    throw LinearSolverError("solve_cg: no convergence in " + std::to_string(options.max_iter) +
                                " iterations, relative residual " + std::to_string(rel),
                            std::move(out.residual_history));
}

double linear_tolerance_for(double picard_epsilon, double max_abs_head)
{
    return std::min(1e-8, 1e-2 * picard_epsilon / std::max(max_abs_head, 1.0));
}

} // namespace gwflow
