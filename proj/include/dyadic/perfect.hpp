#pragma once

// Perfect dyadic Calderon-Zygmund operators in the three-term form
//
//   T f = sum_I sum_{eta,theta} h^eta_I xi_I[eta][theta] <h^theta_I, f>
//       + paraproduct_adjoint(b_row, f) + paraproduct(b_col, f),
//
// with b_col = T1 and b_row = (T^*1)^*. For n = 1 the block xi_I is the
// single matrix <h_I, T h_I>. For n > 1 the full (eta, theta) block on each
// cube is stored; a diagonal block gives the standard extension.
//
// The coarse average of T1 is not produced by the three terms; it is
// returned separately by perfect_coarse_term, so that for an operator with
// kernel, T f = apply_perfect(T, f) + perfect_coarse_term(T, f).

#include <vector>

#include "dyadic/matrix_field.hpp"
#include "dyadic/operators.hpp"
#include "dyadic/tensor.hpp"

namespace dyadic {

class PerfectDyadicCZO {
public:
    /// Zero operator.
    PerfectDyadicCZO(GridHandle grid, int d);

    /// Random xi blocks and symbols; `symmetric` sets b_row = b_col,
    /// `diagonal_blocks` zeroes the off-diagonal (eta != theta) entries.
    static PerfectDyadicCZO random(GridHandle grid, int d, Rng& rng, bool symmetric,
                                   bool diagonal_blocks = true);

    const GridHandle& grid() const { return grid_; }
    int matrix_size() const { return d_; }
    int dim() const { return grid_->dim(); }

    /// <h^eta_I, T h^theta_I> for the cube (cube_level, cube).
    CellMap xi(int cube_level, std::size_t cube, unsigned eta, unsigned theta);
    ConstCellMap xi(int cube_level, std::size_t cube, unsigned eta, unsigned theta) const;

    const MatrixField& b_col() const { return b_col_; }
    const MatrixField& b_row() const { return b_row_; }
    void set_b_col(MatrixField b);
    void set_b_row(MatrixField b);

    /// (T1)^* = T^*1, i.e. b_row = b_col.
    bool is_symmetric(double tol = 0.0) const;

    PerfectDyadicCZO adjoint() const;

private:
    std::size_t slot(int cube_level, std::size_t cube, unsigned eta, unsigned theta) const;

    GridHandle grid_;
    int d_;
    std::vector<Complex> xi_;
    MatrixField b_col_;
    MatrixField b_row_;
};

MatrixField apply_perfect(const PerfectDyadicCZO& t, const MatrixField& f);
/// E_0(T1) E_0(f).
MatrixField perfect_coarse_term(const PerfectDyadicCZO& t, const MatrixField& f);

/// The three bracket terms <<g, .>> of the representation, in order:
/// diagonal Haar part, adjoint paraproduct, paraproduct.
struct PerfectPairing {
    Complex diagonal{};
    Complex adjoint_paraproduct{};
    Complex paraproduct{};
    Complex total() const { return diagonal + adjoint_paraproduct + paraproduct; }
};
/// Evaluates the three brackets from Haar coefficients of f and g.
PerfectPairing perfect_pairing_terms(const PerfectDyadicCZO& t, const MatrixField& f,
                                     const MatrixField& g);

/// xi_k = sum_{I in D_k} xi_I 1_I for n = 1.
AdaptedSequence xi_sequence(const PerfectDyadicCZO& t);

/// Haar tensor of f -> apply_perfect(t, f).
HaarTensorOperator to_tensor(const PerfectDyadicCZO& t);

/// Operator on finest cells (T f)(x) = sum_y K(x, y) f(y) |cell|.
class CellKernel {
public:
    CellKernel(GridHandle grid, int d);

    /// Perfect kernel: for x != y, K(x, y) depends only on the smallest
    /// common cube Q of x, y and the children of Q holding x and y; its
    /// size is of order 1/|Q|. Diagonal entries are free.
    static CellKernel random_perfect(GridHandle grid, int d, Rng& rng);

    const GridHandle& grid() const { return grid_; }
    int matrix_size() const { return d_; }

    CellMap at(std::size_t x, std::size_t y)
    {
        return CellMap(data_.data() + (x * cells() + y) * stride(), d_, d_);
    }
    ConstCellMap at(std::size_t x, std::size_t y) const
    {
        return ConstCellMap(data_.data() + (x * cells() + y) * stride(), d_, d_);
    }

    MatrixField apply(const MatrixField& f) const;
    /// Kernel K^*(x, y) = K(y, x)^*.
    CellKernel adjoint() const;

private:
    std::size_t cells() const { return grid_->cell_count(); }
    std::size_t stride() const { return static_cast<std::size_t>(d_ * d_); }

    GridHandle grid_;
    int d_;
    std::vector<Complex> data_;
};

/// Reads off xi, T1 and (T^*1)^* from a perfect kernel.
PerfectDyadicCZO from_cell_kernel(const CellKernel& k);

} // namespace dyadic
