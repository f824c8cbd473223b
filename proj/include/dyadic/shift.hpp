#pragma once

// Dyadic shifts S f = sum_I sum_{theta != 0} eps^theta_I <h^{theta0}_I, f> h^theta_{parent(I)}
// and their commutators with multiplication operators. Cubes at level 0
// have no parent and are sent to zero.

#include <cstdint>
#include <vector>

#include "dyadic/matrix_field.hpp"

namespace dyadic {

class DyadicShift {
public:
    /// All signs +1.
    explicit DyadicShift(GridHandle grid);

    /// Independent uniform signs.
    static DyadicShift random(GridHandle grid, Rng& rng);
    /// n = 1 pattern: +1 when I is the left child of its parent, -1 when right.
    static DyadicShift petermichl(GridHandle grid);

    const GridHandle& grid() const { return grid_; }

    /// eps^theta_I for a cube at level 1..L-1.
    int sign(int cube_level, std::size_t cube, unsigned theta) const;
    void set_sign(int cube_level, std::size_t cube, unsigned theta, int value);

private:
    std::size_t slot(int cube_level, std::size_t cube, unsigned theta) const;

    GridHandle grid_;
    std::vector<std::int8_t> signs_;
};

MatrixField dyadic_shift(const DyadicShift& s, const MatrixField& f);

/// S(b f) - b S(f).
MatrixField commutator(const DyadicShift& s, const MatrixField& b, const MatrixField& f);

/// The double sum for [S, R_b] f, sum <h^eta_J, S h^theta_I> (<b>_I - <b>_J) <h^theta_I, f> h^eta_J,
/// with the matrix coefficients <h^eta_J, S h^theta_I> read off by applying
/// S to basis functions.
MatrixField commutator_formula(const DyadicShift& s, const MatrixField& b, const MatrixField& f);

/// Coarse part of [S, R_b] f: S(E_0 b E_0 f) - E_0 b E_0(S f).
MatrixField commutator_coarse_term(const DyadicShift& s, const MatrixField& b, const MatrixField& f);

} // namespace dyadic
