#include "dyadic/perfect.hpp"

#include <cmath>

#include "dyadic/errors.hpp"

namespace dyadic {
namespace {

/// Some finest cell inside the given cube.
std::size_t first_cell(const DyadicGrid& grid, int level, std::size_t cube)
{
    for (int j = level; j < grid.levels(); ++j) cube = grid.child_of(j, cube, 0);
    return cube;
}

} // namespace

PerfectDyadicCZO::PerfectDyadicCZO(GridHandle grid, int d)
    : grid_(grid), d_(d), b_col_(grid, d), b_row_(grid, d)
{
    const std::size_t s = signature_count(grid_->dim());
    xi_.assign(grid_->cell_count() * s * static_cast<std::size_t>(d * d), Complex{});
}

std::size_t PerfectDyadicCZO::slot(int cube_level, std::size_t cube, unsigned eta, unsigned theta) const
{
    const unsigned s = signature_count(dim());
    if (cube_level < 0 || cube_level >= grid_->levels() || cube >= grid_->cube_count(cube_level) ||
        eta < 1 || eta > s || theta < 1 || theta > s)
        throw EntryOutOfRange("perfect operator block index out of range");
    return (haar_index(dim(), cube_level, cube, eta) * s + (theta - 1)) * static_cast<std::size_t>(d_ * d_);
}

CellMap PerfectDyadicCZO::xi(int cube_level, std::size_t cube, unsigned eta, unsigned theta)
{
    return CellMap(xi_.data() + slot(cube_level, cube, eta, theta), d_, d_);
}

ConstCellMap PerfectDyadicCZO::xi(int cube_level, std::size_t cube, unsigned eta, unsigned theta) const
{
    return ConstCellMap(xi_.data() + slot(cube_level, cube, eta, theta), d_, d_);
}

void PerfectDyadicCZO::set_b_col(MatrixField b)
{
    b.require_same_shape(b_col_, "set_b_col");
    b_col_ = std::move(b);
}

void PerfectDyadicCZO::set_b_row(MatrixField b)
{
    b.require_same_shape(b_row_, "set_b_row");
    b_row_ = std::move(b);
}

bool PerfectDyadicCZO::is_symmetric(double tol) const { return max_abs_diff(b_col_, b_row_) <= tol; }

PerfectDyadicCZO PerfectDyadicCZO::random(GridHandle grid, int d, Rng& rng, bool symmetric,
                                          bool diagonal_blocks)
{
    PerfectDyadicCZO t(grid, d);
    const unsigned s = signature_count(grid->dim());
    for (int j = 0; j < grid->levels(); ++j)
        for (std::size_t cube = 0; cube < grid->cube_count(j); ++cube)
            for (unsigned eta = 1; eta <= s; ++eta)
                for (unsigned theta = 1; theta <= s; ++theta)
                    if (!diagonal_blocks || eta == theta) t.xi(j, cube, eta, theta) = rng.matrix(d);
    t.set_b_col(MatrixField::random(grid, d, rng));
    t.set_b_row(symmetric ? t.b_col() : MatrixField::random(grid, d, rng));
    return t;
}

PerfectDyadicCZO PerfectDyadicCZO::adjoint() const
{
    PerfectDyadicCZO out(grid_, d_);
    const unsigned s = signature_count(dim());
    for (int j = 0; j < grid_->levels(); ++j)
        for (std::size_t cube = 0; cube < grid_->cube_count(j); ++cube)
            for (unsigned eta = 1; eta <= s; ++eta)
                for (unsigned theta = 1; theta <= s; ++theta)
                    out.xi(j, cube, theta, eta) = xi(j, cube, eta, theta).adjoint();
    out.set_b_col(b_row_.adjoint());
    out.set_b_row(b_col_.adjoint());
    return out;
}

MatrixField apply_perfect(const PerfectDyadicCZO& t, const MatrixField& f)
{
    f.require_same_shape(t.b_col(), "apply_perfect");
    const HaarCoefficients in = haar_analyze(f);
    HaarCoefficients out(f.grid(), f.matrix_size());
    const auto& grid = *f.grid();
    const unsigned s = signature_count(grid.dim());
    for (int j = 0; j < grid.levels(); ++j)
        for (std::size_t cube = 0; cube < grid.cube_count(j); ++cube)
            for (unsigned eta = 1; eta <= s; ++eta) {
                CellMap target = out.at(j, cube, eta);
                for (unsigned theta = 1; theta <= s; ++theta)
                    target.noalias() += t.xi(j, cube, eta, theta) * in.at(j, cube, theta);
            }
    MatrixField result = haar_synthesize(out);
    result += paraproduct_adjoint(t.b_row(), f);
    result += paraproduct(t.b_col(), f);
    return result;
}

MatrixField perfect_coarse_term(const PerfectDyadicCZO& t, const MatrixField& f)
{
    f.require_same_shape(t.b_col(), "perfect_coarse_term");
    const AveragePyramid pb(t.b_col()), pf(f);
    return MatrixField::constant(f.grid(), pb.at(0, 0) * pf.at(0, 0));
}

PerfectPairing perfect_pairing_terms(const PerfectDyadicCZO& t, const MatrixField& f,
                                     const MatrixField& g)
{
    f.require_same_shape(t.b_col(), "perfect_pairing_terms");
    g.require_same_shape(f, "perfect_pairing_terms");
    const HaarCoefficients cf = haar_analyze(f), cg = haar_analyze(g);
    const HaarCoefficients crow = haar_analyze(t.b_row()), ccol = haar_analyze(t.b_col());
    const AveragePyramid pf(f), pg(g);
    const auto& grid = *f.grid();
    const unsigned s = signature_count(grid.dim());
    PerfectPairing out;
    for (int j = 0; j < grid.levels(); ++j)
        for (std::size_t cube = 0; cube < grid.cube_count(j); ++cube)
            for (unsigned eta = 1; eta <= s; ++eta) {
                for (unsigned theta = 1; theta <= s; ++theta)
                    out.diagonal += (cg.at(j, cube, eta).adjoint() * t.xi(j, cube, eta, theta) *
                                     cf.at(j, cube, theta))
                                        .trace();
                out.adjoint_paraproduct +=
                    (pg.at(j, cube).adjoint() * crow.at(j, cube, eta) * cf.at(j, cube, eta)).trace();
                out.paraproduct +=
                    (cg.at(j, cube, eta).adjoint() * ccol.at(j, cube, eta) * pf.at(j, cube)).trace();
            }
    return out;
}

AdaptedSequence xi_sequence(const PerfectDyadicCZO& t)
{
    if (t.dim() != 1) throw ShapeMismatch("xi_sequence is defined for n = 1");
    const auto& grid = t.grid();
    std::vector<MatrixField> terms;
    for (int k = 0; k < grid->levels(); ++k)
        terms.push_back(MatrixField::from_function(grid, t.matrix_size(), [&](std::size_t c) {
            return Mat(t.xi(k, grid->ancestor_of_cell(k, c), 1, 1));
        }));
    return AdaptedSequence(std::move(terms));
}

HaarTensorOperator to_tensor(const PerfectDyadicCZO& t)
{
    const auto& grid = *t.grid();
    const int n = grid.dim();
    const unsigned s = signature_count(n);
    HaarTensorOperator out(t.grid(), t.matrix_size());
    const HaarCoefficients crow = haar_analyze(t.b_row()), ccol = haar_analyze(t.b_col());

    for (int j = 0; j < grid.levels(); ++j) {
        for (std::size_t cube = 0; cube < grid.cube_count(j); ++cube) {
            const std::size_t cell = first_cell(grid, j, cube);
            for (unsigned theta = 1; theta <= s; ++theta) {
                const std::size_t here = haar_index(n, j, cube, theta);
                for (unsigned eta = 1; eta <= s; ++eta)
                    out.add(haar_index(n, j, cube, eta), here, t.xi(j, cube, eta, theta));

                // Adjoint paraproduct: column (I, theta) is <h^theta_I, b_row> 1_I / |I|.
                const Mat row_coeff = crow.at(j, cube, theta);
                out.add(0, here, row_coeff);
                // Paraproduct: row (I, theta) collects <h^theta_I, b_col> times the
                // average of each coarser basis function over I.
                const Mat col_coeff = ccol.at(j, cube, theta);
                out.add(here, 0, col_coeff);
                for (int a = 0; a < j; ++a) {
                    const std::size_t outer = grid.ancestor_of_cell(a, cell);
                    for (unsigned mu = 1; mu <= s; ++mu) {
                        const double h = haar_value(grid, a, outer, mu, cell);
                        const std::size_t coarse_index = haar_index(n, a, outer, mu);
                        out.add(coarse_index, here, h * row_coeff);
                        out.add(here, coarse_index, h * col_coeff);
                    }
                }
            }
        }
    }
    return out;
}

// ------------------------------------------------------------------ kernels

CellKernel::CellKernel(GridHandle grid, int d) : grid_(std::move(grid)), d_(d)
{
    if (grid_->cell_count() > 4096) throw DimensionTooLarge("cell kernel limited to 4096 cells");
    data_.assign(cells() * cells() * stride(), Complex{});
}

CellKernel CellKernel::random_perfect(GridHandle grid, int d, Rng& rng)
{
    CellKernel k(grid, d);
    const std::size_t cells = k.cells();
    const unsigned kids = grid->children_per_cube();
    // Values per (level, cube, child of x, child of y), drawn in index order.
    std::vector<std::vector<Mat>> table(static_cast<std::size_t>(grid->levels()));
    for (int j = 0; j < grid->levels(); ++j) {
        const double size = std::ldexp(1.0, j * grid->dim());
        for (std::size_t q = 0; q < grid->cube_count(j) * kids * kids; ++q)
            table[static_cast<std::size_t>(j)].push_back(size * rng.matrix(d));
    }
    const double diagonal_size = std::ldexp(1.0, grid->levels() * grid->dim());
    for (std::size_t x = 0; x < cells; ++x) {
        for (std::size_t y = 0; y < cells; ++y) {
            if (x == y) {
                k.at(x, y) = diagonal_size * rng.matrix(d);
                continue;
            }
            int j = grid->levels() - 1;
            while (grid->ancestor_of_cell(j, x) != grid->ancestor_of_cell(j, y)) --j;
            const std::size_t q = grid->ancestor_of_cell(j, x);
            const unsigned a = grid->position_in_parent(j + 1, grid->ancestor_of_cell(j + 1, x));
            const unsigned b = grid->position_in_parent(j + 1, grid->ancestor_of_cell(j + 1, y));
            k.at(x, y) = table[static_cast<std::size_t>(j)][(q * kids + a) * kids + b];
        }
    }
    return k;
}

MatrixField CellKernel::apply(const MatrixField& f) const
{
    if (f.matrix_size() != d_ || !f.grid()->same_as(*grid_))
        throw ShapeMismatch("cell kernel and field shapes differ");
    MatrixField out(grid_, d_);
    const double volume = f.cell_volume();
    for (std::size_t x = 0; x < cells(); ++x) {
        CellMap acc = out.cell(x);
        for (std::size_t y = 0; y < cells(); ++y) acc.noalias() += at(x, y) * f.cell(y);
        acc *= volume;
    }
    return out;
}

CellKernel CellKernel::adjoint() const
{
    CellKernel out(grid_, d_);
    for (std::size_t x = 0; x < cells(); ++x)
        for (std::size_t y = 0; y < cells(); ++y) out.at(x, y) = at(y, x).adjoint();
    return out;
}

PerfectDyadicCZO from_cell_kernel(const CellKernel& k)
{
    const auto& grid = *k.grid();
    const int d = k.matrix_size();
    const int n = grid.dim();
    const unsigned s = signature_count(n);
    PerfectDyadicCZO t(k.grid(), d);
    const MatrixField one = MatrixField::identity(k.grid(), d);
    t.set_b_col(k.apply(one));
    t.set_b_row(k.adjoint().apply(one).adjoint());

    const Mat id = Mat::Identity(d, d);
    const double volume = std::ldexp(1.0, -grid.levels() * n);
    for (int j = 0; j < grid.levels(); ++j)
        for (std::size_t cube = 0; cube < grid.cube_count(j); ++cube)
            for (unsigned theta = 1; theta <= s; ++theta) {
                const MatrixField image = k.apply(haar_function(k.grid(), j, cube, theta, id));
                for (unsigned eta = 1; eta <= s; ++eta) {
                    Mat acc = Mat::Zero(d, d);
                    for (std::size_t c = 0; c < image.cell_count(); ++c) {
                        const double h = haar_value(grid, j, cube, eta, c);
                        if (h != 0.0) acc += h * image.cell(c);
                    }
                    t.xi(j, cube, eta, theta) = volume * acc;
                }
            }
    return t;
}

} // namespace dyadic
