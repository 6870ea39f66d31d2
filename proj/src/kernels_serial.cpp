#include "gwflow/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace gwflow::kernels::serial {

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y)
{
    if (x.size() != static_cast<std::size_t>(a.rows) || y.size() != static_cast<std::size_t>(a.rows))
        throw DimensionError("spmv: vector length does not match matrix");
    for (Index r = 0; r < a.rows; ++r) {
        double s = 0.0;
        for (Index k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) s += a.values[k] * x[a.cols[k]];
        y[r] = s;
    }
}

double dot(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) throw DimensionError("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y)
{
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

void xpby(std::span<const double> x, double beta, std::span<double> y)
{
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] + beta * y[i];
}

void jacobi_apply(std::span<const double> inv_diag, std::span<const double> r, std::span<double> z)
{
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = inv_diag[i] * r[i];
}

double max_abs_diff(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) throw DimensionError("max_abs_diff: length mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double sum(std::span<const double> a)
{
    double s = 0.0;
    for (double v : a) s += v;
    return s;
}

} // namespace gwflow::kernels::serial
