#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "gwflow/mesh.hpp"

namespace gwflow {

/// Compressed-row matrix. Column indices are sorted within each row.
struct CsrMatrix {
    Index rows = 0;
    std::vector<Index> row_ptr;
    std::vector<Index> cols;
    std::vector<double> values;

    Index nnz() const { return static_cast<Index>(values.size()); }
    std::span<const Index> row_cols(Index r) const
    {
        return {cols.data() + row_ptr[r], static_cast<std::size_t>(row_ptr[r + 1] - row_ptr[r])};
    }
    /// Value at (r, c), zero when not stored.
    double at(Index r, Index c) const;
    /// Position of (r, c) in `values`, or -1.
    Index find(Index r, Index c) const;

    static CsrMatrix identity(Index n);
    /// Builds from dense row-major storage, dropping exact zeros off the diagonal.
    static CsrMatrix from_dense(Index n, std::span<const double> dense);
};

struct SparseSystem {
    CsrMatrix matrix;
    std::vector<double> rhs;
    bool symmetric = true;
};

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace gwflow
