#pragma once

// Norm functionals on matrix fields: noncommutative L_p, the column
// martingale Hardy norm, and three dyadic BMO variants.

#include <vector>

#include "dyadic/matrix_field.hpp"

namespace dyadic {

/// Schatten p-norm of one matrix; p = infinity gives the operator norm.
double schatten_norm(const Mat& a, double p);
/// Largest singular value squared.
double op_norm_sq(const Mat& a);

/// (integral tr |f|^p)^{1/p}; p = infinity is the largest cell operator norm.
double lp_norm(const MatrixField& f, double p);

/// L_p norm of (sum_k D_k f^* D_k f)^{1/2}. Eigenvalues of the square
/// function above -1e-12 * max(1, largest eigenvalue) are clipped to zero,
/// lower ones raise NotPositiveSemidefinite.
double hardy_col_norm(const MatrixField& f, double p);

/// sup_k || E_k || f - E_{k-1} f ||_op^2 ||_inf^{1/2}, k in [1, L].
double bmo_mart_norm(const MatrixField& f);

/// A family of dyadic systems given by one offset vector per level: the
/// level-j cubes are 2^{-j}([0,1)^n + m) + offset_j on the torus.
struct OffsetSystem {
    int dim = 1;
    std::vector<std::vector<double>> offsets; ///< offsets[j][coord], j = 0..levels

    int levels() const { return static_cast<int>(offsets.size()) - 1; }
};

/// The cube positions of a (possibly shifted) dyadic grid.
OffsetSystem offset_system(const DyadicGrid& grid);
/// The third-shifted system 2^{-j}([0,1)^n + m + (-1)^j t/3).
OffsetSystem third_shift_system(int dim, int levels, const std::vector<int>& t);

/// sup over cubes Q of the grid of (avg_Q ||f - f_Q||_op^2)^{1/2}.
double bmo_bourgain_norm(const MatrixField& f, const DyadicGrid& grid);
/// Same supremum over the cubes of an offset system, integrating the
/// piecewise-constant field exactly over partial cell overlaps.
double bmo_bourgain_norm(const MatrixField& f, const OffsetSystem& system);

/// Max of bmo_bourgain_norm over the 3^n third-shifted systems at levels
/// 0..L; stands in for the supremum over all cubes.
double bmo_cube_norm(const MatrixField& f);

/// integral of sup_k ||E_k f(x)||_{S_p}^p, k in [0, L].
double doob_maximal(const MatrixField& f, double p);

} // namespace dyadic
