#pragma once

// Vector and sparse-matrix kernels used by the linear solver and the Picard loop.
//
// Each kernel has an OpenMP version (namespace `par`) and a plain loop version
// (namespace `serial`). The serial versions are the test reference and the
// baseline for bench/. Parallel reductions sum fixed-size chunks and combine the
// partial sums in a fixed pairwise tree, so results do not depend on the thread
// count.

#include <cstddef>
#include <span>

#include "gwflow/sparse.hpp"

namespace gwflow::kernels {

inline constexpr std::size_t reduction_chunk = 4096;

namespace serial {

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> a, std::span<const double> b);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
/// y = x + beta * y
void xpby(std::span<const double> x, double beta, std::span<double> y);
/// z = diag^-1 r
void jacobi_apply(std::span<const double> inv_diag, std::span<const double> r, std::span<double> z);
double max_abs_diff(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);

} // namespace serial

namespace par {

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void xpby(std::span<const double> x, double beta, std::span<double> y);
void jacobi_apply(std::span<const double> inv_diag, std::span<const double> r, std::span<double> z);
double max_abs_diff(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);

} // namespace par

} // namespace gwflow::kernels

namespace gwflow {

/// Sets the OpenMP team size used by the `par` kernels and assembly. Values < 1
/// restore the runtime default.
void set_thread_count(int threads);
int thread_count();
int hardware_threads();

} // namespace gwflow
