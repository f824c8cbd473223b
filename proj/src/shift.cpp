#include "dyadic/shift.hpp"

#include "dyadic/errors.hpp"

namespace dyadic {

DyadicShift::DyadicShift(GridHandle grid) : grid_(std::move(grid))
{
    signs_.assign(grid_->cell_count(), 1);
}

std::size_t DyadicShift::slot(int cube_level, std::size_t cube, unsigned theta) const
{
    if (cube_level < 1 || cube_level >= grid_->levels() || cube >= grid_->cube_count(cube_level) ||
        theta < 1 || theta > signature_count(grid_->dim()))
        throw EntryOutOfRange("shift sign index out of range");
    return haar_index(grid_->dim(), cube_level, cube, theta);
}

int DyadicShift::sign(int cube_level, std::size_t cube, unsigned theta) const
{
    return signs_[slot(cube_level, cube, theta)];
}

void DyadicShift::set_sign(int cube_level, std::size_t cube, unsigned theta, int value)
{
    if (value != 1 && value != -1) throw EntryOutOfRange("shift signs must be +1 or -1");
    signs_[slot(cube_level, cube, theta)] = static_cast<std::int8_t>(value);
}

DyadicShift DyadicShift::random(GridHandle grid, Rng& rng)
{
    DyadicShift s(grid);
    const unsigned count = signature_count(grid->dim());
    for (int j = 1; j < grid->levels(); ++j)
        for (std::size_t cube = 0; cube < grid->cube_count(j); ++cube)
            for (unsigned theta = 1; theta <= count; ++theta) s.set_sign(j, cube, theta, rng.sign());
    return s;
}

DyadicShift DyadicShift::petermichl(GridHandle grid)
{
    if (grid->dim() != 1) throw ShapeMismatch("the Petermichl sign pattern is defined for n = 1");
    DyadicShift s(grid);
    for (int j = 1; j < grid->levels(); ++j)
        for (std::size_t cube = 0; cube < grid->cube_count(j); ++cube)
            s.set_sign(j, cube, 1, grid->position_in_parent(j, cube) == 0 ? 1 : -1);
    return s;
}

MatrixField dyadic_shift(const DyadicShift& s, const MatrixField& f)
{
    if (!f.grid()->same_as(*s.grid())) throw ShapeMismatch("dyadic_shift: grids differ");
    const auto& grid = *f.grid();
    const unsigned count = signature_count(grid.dim());
    const HaarCoefficients in = haar_analyze(f);
    HaarCoefficients out(f.grid(), f.matrix_size());
    for (int j = 1; j < grid.levels(); ++j)
        for (std::size_t cube = 0; cube < grid.cube_count(j); ++cube) {
            const std::size_t up = grid.parent_of(j, cube);
            for (unsigned theta = 1; theta <= count; ++theta)
                out.at(j - 1, up, theta) += static_cast<double>(s.sign(j, cube, theta)) * in.at(j, cube, kTheta0);
        }
    return haar_synthesize(out);
}

MatrixField commutator(const DyadicShift& s, const MatrixField& b, const MatrixField& f)
{
    b.require_same_shape(f, "commutator");
    return dyadic_shift(s, product(b, f)) - product(b, dyadic_shift(s, f));
}

MatrixField commutator_formula(const DyadicShift& s, const MatrixField& b, const MatrixField& f)
{
    b.require_same_shape(f, "commutator_formula");
    const GridHandle& grid_handle = f.grid();
    const auto& grid = *grid_handle;
    const int n = grid.dim();
    const HaarCoefficients cf = haar_analyze(f);
    const AveragePyramid pb(b);
    HaarCoefficients out(grid_handle, f.matrix_size());
    const Mat one = Mat::Identity(1, 1);

    for (std::size_t col = 1; col < grid.cell_count(); ++col) {
        const HaarLabel source = haar_label(n, col);
        const HaarCoefficients image = haar_analyze(dyadic_shift(s, basis_field(grid_handle, col, one)));
        for (std::size_t row = 1; row < grid.cell_count(); ++row) {
            const Complex entry = image.entry(row)(0, 0);
            if (entry == Complex{}) continue;
            const HaarLabel target = haar_label(n, row);
            const Mat gap = pb.at(source.cube_level, source.cube) - pb.at(target.cube_level, target.cube);
            out.entry(row).noalias() += entry * gap * cf.entry(col);
        }
    }
    return haar_synthesize(out);
}

MatrixField commutator_coarse_term(const DyadicShift& s, const MatrixField& b, const MatrixField& f)
{
    b.require_same_shape(f, "commutator_coarse_term");
    const Mat b0 = AveragePyramid(b).at(0, 0);
    const Mat f0 = AveragePyramid(f).at(0, 0);
    const Mat sf0 = AveragePyramid(dyadic_shift(s, f)).at(0, 0);
    return dyadic_shift(s, MatrixField::constant(f.grid(), b0 * f0)) -
           MatrixField::constant(f.grid(), b0 * sf0);
}

} // namespace dyadic
