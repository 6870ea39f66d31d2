#include "gwflow/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <vector>

namespace gwflow::kernels::par {

namespace {

std::int64_t chunk_count(std::size_t n) { return static_cast<std::int64_t>((n + reduction_chunk - 1) / reduction_chunk); }

// Pairwise combination in a shape that depends only on the number of partials.
double tree_reduce(std::vector<double>& partial)
{
    if (partial.empty()) return 0.0;
    std::size_t count = partial.size();
    while (count > 1) {
        const std::size_t half = count / 2;
        for (std::size_t i = 0; i < half; ++i) partial[i] = partial[2 * i] + partial[2 * i + 1];
        if (count % 2 == 1) partial[half] = partial[count - 1];
        count = half + count % 2;
    }
    return partial[0];
}

} // namespace

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y)
{
    if (x.size() != static_cast<std::size_t>(a.rows) || y.size() != static_cast<std::size_t>(a.rows))
        throw DimensionError("spmv: vector length does not match matrix");
    const Index* row_ptr = a.row_ptr.data();
    const Index* cols = a.cols.data();
    const double* vals = a.values.data();
#pragma omp parallel for schedule(static)
    for (Index r = 0; r < a.rows; ++r) {
        double s = 0.0;
        for (Index k = row_ptr[r]; k < row_ptr[r + 1]; ++k) s += vals[k] * x[cols[k]];
        y[r] = s;
    }
}

double dot(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) throw DimensionError("dot: length mismatch");
    const std::int64_t chunks = chunk_count(a.size());
    std::vector<double> partial(static_cast<std::size_t>(chunks));
    const std::size_t n = a.size();
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < chunks; ++c) {
        const std::size_t b0 = static_cast<std::size_t>(c) * reduction_chunk;
        const std::size_t e0 = std::min(n, b0 + reduction_chunk);
        double s = 0.0;
        for (std::size_t i = b0; i < e0; ++i) s += a[i] * b[i];
        partial[static_cast<std::size_t>(c)] = s;
    }
    return tree_reduce(partial);
}

double sum(std::span<const double> a)
{
    const std::int64_t chunks = chunk_count(a.size());
    std::vector<double> partial(static_cast<std::size_t>(chunks));
    const std::size_t n = a.size();
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < chunks; ++c) {
        const std::size_t b0 = static_cast<std::size_t>(c) * reduction_chunk;
        const std::size_t e0 = std::min(n, b0 + reduction_chunk);
        double s = 0.0;
        for (std::size_t i = b0; i < e0; ++i) s += a[i];
        partial[static_cast<std::size_t>(c)] = s;
    }
    return tree_reduce(partial);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y)
{
    const auto n = static_cast<std::int64_t>(y.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void xpby(std::span<const double> x, double beta, std::span<double> y)
{
    const auto n = static_cast<std::int64_t>(y.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) y[i] = x[i] + beta * y[i];
}

void jacobi_apply(std::span<const double> inv_diag, std::span<const double> r, std::span<double> z)
{
    const auto n = static_cast<std::int64_t>(z.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
}

double max_abs_diff(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) throw DimensionError("max_abs_diff: length mismatch");
    const auto n = static_cast<std::int64_t>(a.size());
    double m = 0.0;
#pragma omp parallel for schedule(static) reduction(max : m)
    for (std::int64_t i = 0; i < n; ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace gwflow::kernels::par

namespace gwflow {

void set_thread_count(int threads)
{
    omp_set_num_threads(threads >= 1 ? threads : omp_get_num_procs());
}

int thread_count() { return omp_get_max_threads(); }

int hardware_threads() { return omp_get_num_procs(); }

} // namespace gwflow
