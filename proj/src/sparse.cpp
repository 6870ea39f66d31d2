#include "gwflow/sparse.hpp"

#include <algorithm>

namespace gwflow {

Index CsrMatrix::find(Index r, Index c) const
{
    const auto b = cols.begin() + row_ptr[r];
    const auto e = cols.begin() + row_ptr[r + 1];
    const auto it = std::lower_bound(b, e, c);
    if (it == e || *it != c) return -1;
    return static_cast<Index>(it - cols.begin());
}

double CsrMatrix::at(Index r, Index c) const
{
    const Index k = find(r, c);
    return k < 0 ? 0.0 : values[k];
}

CsrMatrix CsrMatrix::identity(Index n)
{
    CsrMatrix a;
    a.rows = n;
    a.row_ptr.resize(static_cast<std::size_t>(n) + 1);
    for (Index i = 0; i <= n; ++i) a.row_ptr[i] = i;
    a.cols.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) a.cols[i] = i;
    a.values.assign(static_cast<std::size_t>(n), 1.0);
    return a;
}

CsrMatrix CsrMatrix::from_dense(Index n, std::span<const double> dense)
{
    if (dense.size() != static_cast<std::size_t>(n) * n) throw DimensionError("dense matrix has wrong size");
    CsrMatrix a;
    a.rows = n;
    a.row_ptr.push_back(0);
    for (Index r = 0; r < n; ++r) {
        for (Index c = 0; c < n; ++c) {
            const double v = dense[static_cast<std::size_t>(r) * n + c];
            if (v != 0.0 || r == c) {
                a.cols.push_back(c);
                a.values.push_back(v);
            }
        }
        a.row_ptr.push_back(static_cast<Index>(a.cols.size()));
    }
    return a;
}

} // namespace gwflow
