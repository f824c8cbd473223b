#include "dyadic/figiel.hpp"

#include <cmath>

#include "dyadic/errors.hpp"
#include "dyadic/operators.hpp"

namespace dyadic {

FigielTerms figiel_terms(const HaarTensorOperator& t, const MatrixField& f, const MatrixField& g)
{
    f.require_same_shape(g, "figiel_terms");
    if (f.matrix_size() != t.matrix_size() || !f.grid()->same_as(*t.grid()))
        throw ShapeMismatch("figiel_terms: tensor and field shapes differ");

    const GridHandle& grid_handle = f.grid();
    const auto& grid = *grid_handle;
    const int n = grid.dim();
    const int d = f.matrix_size();
    const unsigned s = signature_count(n);
    const Mat id = Mat::Identity(d, d);

    const HaarCoefficients cf = haar_analyze(f), cg = haar_analyze(g);
    const AveragePyramid pf(f), pg(g);
    // Averaging coefficient <h^0_I, f> = |I|^{1/2} avg_I f.
    auto zero_coeff = [](const AveragePyramid& p, int level, std::size_t cube, int dim) {
        return Mat(std::sqrt(std::ldexp(1.0, -level * dim)) * p.at(level, cube));
    };

    FigielTerms out;
    for (int j = 0; j < grid.levels(); ++j) {
        const double root_volume = std::sqrt(std::ldexp(1.0, -j * n));
        for (std::size_t i_cube = 0; i_cube < grid.cube_count(j); ++i_cube) {
            const Mat f_zero = zero_coeff(pf, j, i_cube, n);
            const Mat g_zero_i = zero_coeff(pg, j, i_cube, n);

            // B0: images T h^theta_I, averaged over each level-j cube J.
            for (unsigned theta = 1; theta <= s; ++theta) {
                const MatrixField image = apply_tensor(t, haar_function(grid_handle, j, i_cube, theta, id));
                const AveragePyramid pi(image);
                for (std::size_t j_cube = 0; j_cube < grid.cube_count(j); ++j_cube) {
                    const Mat coeff = root_volume * pi.at(j, j_cube);
                    const Mat dg = zero_coeff(pg, j, j_cube, n) - g_zero_i;
                    const Complex v = (dg.adjoint() * coeff * cf.at(j, i_cube, theta)).trace();
                    out.b0 += v;
                    out.b0_by_m[centered_translation(grid, j, i_cube, j_cube)] += v;
                }
            }

            // C0: image T h^0_I, expanded in the level-j Haar functions.
            const MatrixField image =
                apply_tensor(t, haar_function(grid_handle, j, i_cube, 0, id));
            const HaarCoefficients ci = haar_analyze(image);
            for (std::size_t j_cube = 0; j_cube < grid.cube_count(j); ++j_cube) {
                const Mat df = f_zero - zero_coeff(pf, j, j_cube, n);
                for (unsigned eta = 1; eta <= s; ++eta) {
                    const Complex v = (cg.at(j, j_cube, eta).adjoint() * ci.at(j, j_cube, eta) * df).trace();
                    out.c0 += v;
                    out.c0_by_m[centered_translation(grid, j, i_cube, j_cube)] += v;
                }
            }
        }
    }

    // A: same-level tensor entries.
    for (const auto& [key, value] : t.entries()) {
        const HaarLabel row = haar_label(n, key.first);
        const HaarLabel col = haar_label(n, key.second);
        if (row.coarse || col.coarse || row.cube_level != col.cube_level) continue;
        const Complex v = (cg.entry(key.first).adjoint() * value * cf.entry(key.second)).trace();
        out.a += v;
        out.a_by_m[centered_translation(grid, row.cube_level, col.cube, row.cube)] += v;
    }

    const MatrixField one = MatrixField::identity(grid_handle, d);
    const MatrixField t_one = apply_tensor(t, one);
    const MatrixField b_row = apply_tensor(t.adjoint(), one).adjoint();
    out.p = pairing(g, paraproduct_adjoint(b_row, f));
    out.q = pairing(g, paraproduct(t_one, f));
    out.coarse = pairing(cond_expect(g, 0), apply_tensor(t, cond_expect(f, 0)));
    return out;
}

} // namespace dyadic
