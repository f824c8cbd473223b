#pragma once

// General operators given by their Haar coefficient tensor.

#include <cstddef>
#include <map>
#include <utility>

#include "dyadic/matrix_field.hpp"

namespace dyadic {

/// Sparse family of d x d matrices T[r, c] = <b_r, T b_c> indexed by flat
/// Haar basis indices (0 is the constant function 1). The operator acts by
/// left multiplication: T(b_c u) = sum_r b_r T[r, c] u.
class HaarTensorOperator {
public:
    using Key = std::pair<std::size_t, std::size_t>;

    HaarTensorOperator(GridHandle grid, int d);

    /// Identity operator (unit diagonal entries).
    static HaarTensorOperator identity(GridHandle grid, int d);

    const GridHandle& grid() const { return grid_; }
    int matrix_size() const { return d_; }
    std::size_t basis_size() const { return grid_->cell_count(); }

    /// Adds `value` to entry (row, col). Throws EntryOutOfRange for indices
    /// beyond the realized levels or a wrongly sized value.
    void add(std::size_t row, std::size_t col, const Mat& value);
    void set(std::size_t row, std::size_t col, const Mat& value);
    /// Entry (row, col), zero when absent.
    Mat entry(std::size_t row, std::size_t col) const;

    const std::map<Key, Mat>& entries() const { return entries_; }
    std::size_t nonzeros() const { return entries_.size(); }

    /// Largest centered translation |m|_inf between the cubes of any
    /// same-level entry; -1 when there is none.
    std::int64_t band() const;

    HaarTensorOperator adjoint() const;

private:
    void check_key(std::size_t row, std::size_t col, const Mat& value) const;

    GridHandle grid_;
    int d_;
    std::map<Key, Mat> entries_;
};

MatrixField apply_tensor(const HaarTensorOperator& t, const MatrixField& f);

/// Random tensor with every same-level entry whose centered translation
/// satisfies |m|_inf <= band, plus each cross-level entry (including the
/// constant row and column) with probability `cross_density`.
HaarTensorOperator random_banded_tensor(GridHandle grid, int d, int band, double cross_density,
                                        Rng& rng);

/// Centered translation m with J = I + m for cubes at the same level:
/// each coordinate in [-2^{j-1}, 2^{j-1}).
Index centered_translation(const DyadicGrid& grid, int level, std::size_t from, std::size_t to);

} // namespace dyadic
