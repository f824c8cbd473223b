#pragma once

// Paraproducts, Haar multipliers, the R_b operator and martingale
// transforms on matrix fields.
//
// All sums over levels run over k in [1, L]; the coarse level-0 average
// appears only where stated.

#include <vector>

#include "dyadic/matrix_field.hpp"

namespace dyadic {

/// pi_b f = sum_k D_k(b) E_{k-1}(f).
MatrixField paraproduct(const MatrixField& b, const MatrixField& f);

/// sum_k E_{k-1}(D_k(b) D_k(f)); the adjoint of f -> pi_{b^*} f.
MatrixField paraproduct_adjoint(const MatrixField& b, const MatrixField& f);

/// Lambda_b f = sum_k D_k(b) E_k(f).
MatrixField haar_multiplier(const MatrixField& b, const MatrixField& f);
/// Adjoint of f -> Lambda_b f.
MatrixField haar_multiplier_adjoint(const MatrixField& b, const MatrixField& g);

/// R_b f = sum_k E_{k-1}(b) D_k(f) + E_0(b) E_0(f); b f = Lambda_b f + R_b f.
MatrixField r_operator(const MatrixField& b, const MatrixField& f);

/// Adapted coefficients xi_0, ..., xi_{L-1} of a martingale transform,
/// xi_k constant on level-k cubes.
class AdaptedSequence {
public:
    /// Throws NotAdapted unless every xi_k is level-k measurable.
    explicit AdaptedSequence(std::vector<MatrixField> terms);

    /// xi_k = u for all k.
    static AdaptedSequence constant(GridHandle grid, const Mat& u);
    /// Independent random unitary value on every level-k cube.
    static AdaptedSequence random_unitary(GridHandle grid, int d, Rng& rng);
    /// Independent random matrix value on every level-k cube.
    static AdaptedSequence random(GridHandle grid, int d, Rng& rng);

    int levels() const { return static_cast<int>(terms_.size()); }
    const MatrixField& operator[](int k) const { return terms_[static_cast<std::size_t>(k)]; }
    const std::vector<MatrixField>& terms() const { return terms_; }

    /// sup_k || xi_k ||_inf.
    double sup_norm() const;
    AdaptedSequence adjoint() const;

private:
    std::vector<MatrixField> terms_;
};

/// M_xi f = sum_k xi_{k-1} D_k(f).
MatrixField mart_transform(const AdaptedSequence& xi, const MatrixField& f);
/// Adjoint of f -> M_xi f: g -> sum_k D_k(xi_{k-1}^* g).
MatrixField mart_transform_adjoint(const AdaptedSequence& xi, const MatrixField& g);

/// Left side of the summation identity up to level ell:
/// sum_{k <= ell} E_{k-1}(f) D_k(g^*) + D_k(f) E_{k-1}(g^*).
MatrixField summation_lhs(const MatrixField& f, const MatrixField& g, int ell);
/// Right side: E_ell(f) E_ell(g^*) - sum_{k <= ell} D_k(f) D_k(g^*) - E_0(f) E_0(g^*).
MatrixField summation_rhs(const MatrixField& f, const MatrixField& g, int ell);

} // namespace dyadic
