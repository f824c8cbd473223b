#include "dyadic/operators.hpp"

#include <limits>

#include "dyadic/errors.hpp"
#include "dyadic/field_norms.hpp"

namespace dyadic {
namespace {

/// Level-k average of the pyramid on finest cell c.
ConstCellMap avg(const AveragePyramid& p, const DyadicGrid& grid, int k, std::size_t c)
{
    return p.at(k, grid.ancestor_of_cell(k, c));
}

/// Builds sum_k term(k, c) cell by cell; `term` writes its contribution
/// into the accumulator.
template <typename Term>
MatrixField level_sum(const MatrixField& like, Term&& term)
{
    MatrixField out(like.grid(), like.matrix_size());
    const int d = like.matrix_size();
    Mat scratch(d, d);
    for (std::size_t c = 0; c < like.cell_count(); ++c) {
        CellMap acc = out.cell(c);
        for (int k = 1; k <= like.levels(); ++k) term(k, c, acc, scratch);
    }
    return out;
}

} // namespace

MatrixField paraproduct(const MatrixField& b, const MatrixField& f)
{
    b.require_same_shape(f, "paraproduct");
    const auto& grid = *f.grid();
    const AveragePyramid pb(b), pf(f);
    return level_sum(f, [&](int k, std::size_t c, CellMap& acc, Mat& diff) {
        diff = avg(pb, grid, k, c) - avg(pb, grid, k - 1, c);
        acc.noalias() += diff * avg(pf, grid, k - 1, c);
    });
}

MatrixField paraproduct_adjoint(const MatrixField& b, const MatrixField& f)
{
    b.require_same_shape(f, "paraproduct_adjoint");
    const auto& grid = *f.grid();
    const AveragePyramid pb(b), pf(f);
    MatrixField out(f.grid(), f.matrix_size());
    const int d = f.matrix_size();
    Mat db(d, d), df(d, d);
    for (int k = 1; k <= f.levels(); ++k) {
        MatrixField local(f.grid(), d);
        for (std::size_t c = 0; c < f.cell_count(); ++c) {
            db = avg(pb, grid, k, c) - avg(pb, grid, k - 1, c);
            df = avg(pf, grid, k, c) - avg(pf, grid, k - 1, c);
            local.cell(c).noalias() = db * df;
        }
        out += cond_expect(local, k - 1);
    }
    return out;
}

MatrixField haar_multiplier(const MatrixField& b, const MatrixField& f)
{
    b.require_same_shape(f, "haar_multiplier");
    const auto& grid = *f.grid();
    const AveragePyramid pb(b), pf(f);
    return level_sum(f, [&](int k, std::size_t c, CellMap& acc, Mat& diff) {
        diff = avg(pb, grid, k, c) - avg(pb, grid, k - 1, c);
        acc.noalias() += diff * avg(pf, grid, k, c);
    });
}

MatrixField haar_multiplier_adjoint(const MatrixField& b, const MatrixField& g)
{
    b.require_same_shape(g, "haar_multiplier_adjoint");
    MatrixField out = paraproduct_adjoint(b.adjoint(), g);
    const auto& grid = *g.grid();
    const AveragePyramid pb(b);
    const int d = g.matrix_size();
    for (int k = 1; k <= g.levels(); ++k) {
        MatrixField local(g.grid(), d);
        for (std::size_t c = 0; c < g.cell_count(); ++c)
            local.cell(c).noalias() =
                (avg(pb, grid, k, c) - avg(pb, grid, k - 1, c)).adjoint() * g.cell(c);
        out += mart_diff(local, k);
    }
    return out;
}

MatrixField r_operator(const MatrixField& b, const MatrixField& f)
{
    b.require_same_shape(f, "r_operator");
    const auto& grid = *f.grid();
    const AveragePyramid pb(b), pf(f);
    MatrixField out = level_sum(f, [&](int k, std::size_t c, CellMap& acc, Mat& diff) {
        diff = avg(pf, grid, k, c) - avg(pf, grid, k - 1, c);
        acc.noalias() += avg(pb, grid, k - 1, c) * diff;
    });
    const Mat coarse = pb.at(0, 0) * pf.at(0, 0);
    for (std::size_t c = 0; c < out.cell_count(); ++c) out.cell(c) += coarse;
    return out;
}

// --------------------------------------------------------- martingale transform

AdaptedSequence::AdaptedSequence(std::vector<MatrixField> terms) : terms_(std::move(terms))
{
    if (terms_.empty()) return;
    const int L = terms_.front().levels();
    if (static_cast<int>(terms_.size()) != L)
        throw NotAdapted("expected " + std::to_string(L) + " coefficients xi_0..xi_{L-1}");
    for (int k = 0; k < L; ++k) {
        terms_[static_cast<std::size_t>(k)].require_same_shape(terms_.front(), "AdaptedSequence");
        if (!is_measurable(terms_[static_cast<std::size_t>(k)], k))
            throw NotAdapted("xi_" + std::to_string(k) + " is not constant on level-" +
                             std::to_string(k) + " cubes");
    }
}

AdaptedSequence AdaptedSequence::constant(GridHandle grid, const Mat& u)
{
    std::vector<MatrixField> terms;
    for (int k = 0; k < grid->levels(); ++k) terms.push_back(MatrixField::constant(grid, u));
    return AdaptedSequence(std::move(terms));
}

namespace {

template <typename Draw>
AdaptedSequence random_sequence(const GridHandle& grid, int d, Draw&& draw)
{
    std::vector<MatrixField> terms;
    for (int k = 0; k < grid->levels(); ++k) {
        std::vector<Mat> values;
        for (std::size_t cube = 0; cube < grid->cube_count(k); ++cube) values.push_back(draw());
        terms.push_back(MatrixField::from_function(
            grid, d, [&](std::size_t c) { return values[grid->ancestor_of_cell(k, c)]; }));
    }
    return AdaptedSequence(std::move(terms));
}

} // namespace

AdaptedSequence AdaptedSequence::random_unitary(GridHandle grid, int d, Rng& rng)
{
    return random_sequence(grid, d, [&] { return rng.unitary(d); });
}

AdaptedSequence AdaptedSequence::random(GridHandle grid, int d, Rng& rng)
{
    return random_sequence(grid, d, [&] { return rng.matrix(d); });
}

double AdaptedSequence::sup_norm() const
{
    double best = 0.0;
    for (const auto& t : terms_) best = std::max(best, lp_norm(t, std::numeric_limits<double>::infinity()));
    return best;
}

AdaptedSequence AdaptedSequence::adjoint() const
{
    std::vector<MatrixField> terms;
    for (const auto& t : terms_) terms.push_back(t.adjoint());
    return AdaptedSequence(std::move(terms));
}

MatrixField mart_transform(const AdaptedSequence& xi, const MatrixField& f)
{
    if (xi.levels() != f.levels()) throw ShapeMismatch("martingale transform depth differs from field");
    if (xi.levels() > 0) xi[0].require_same_shape(f, "mart_transform");
    const auto& grid = *f.grid();
    const AveragePyramid pf(f);
    return level_sum(f, [&](int k, std::size_t c, CellMap& acc, Mat& diff) {
        diff = avg(pf, grid, k, c) - avg(pf, grid, k - 1, c);
        acc.noalias() += xi[k - 1].cell(c) * diff;
    });
}

MatrixField mart_transform_adjoint(const AdaptedSequence& xi, const MatrixField& g)
{
    if (xi.levels() != g.levels()) throw ShapeMismatch("martingale transform depth differs from field");
    MatrixField out(g.grid(), g.matrix_size());
    for (int k = 1; k <= g.levels(); ++k) {
        MatrixField local(g.grid(), g.matrix_size());
        for (std::size_t c = 0; c < g.cell_count(); ++c)
            local.cell(c).noalias() = xi[k - 1].cell(c).adjoint() * g.cell(c);
        out += mart_diff(local, k);
    }
    return out;
}

// ------------------------------------------------------------ summation identity

MatrixField summation_lhs(const MatrixField& f, const MatrixField& g, int ell)
{
    f.require_same_shape(g, "summation_lhs");
    if (ell < 1 || ell > f.levels()) throw LevelOutOfRange("summation level outside [1, L]");
    const auto& grid = *f.grid();
    const AveragePyramid pf(f), pg(g.adjoint());
    return level_sum(f, [&](int k, std::size_t c, CellMap& acc, Mat&) {
        if (k > ell) return;
        const Mat df = avg(pf, grid, k, c) - avg(pf, grid, k - 1, c);
        const Mat dg = avg(pg, grid, k, c) - avg(pg, grid, k - 1, c);
        acc.noalias() += avg(pf, grid, k - 1, c) * dg;
        acc.noalias() += df * avg(pg, grid, k - 1, c);
    });
}

MatrixField summation_rhs(const MatrixField& f, const MatrixField& g, int ell)
{
    f.require_same_shape(g, "summation_rhs");
    if (ell < 1 || ell > f.levels()) throw LevelOutOfRange("summation level outside [1, L]");
    const auto& grid = *f.grid();
    const AveragePyramid pf(f), pg(g.adjoint());
    MatrixField out = level_sum(f, [&](int k, std::size_t c, CellMap& acc, Mat&) {
        if (k > ell) return;
        const Mat df = avg(pf, grid, k, c) - avg(pf, grid, k - 1, c);
        const Mat dg = avg(pg, grid, k, c) - avg(pg, grid, k - 1, c);
        acc.noalias() -= df * dg;
    });
    const Mat coarse = pf.at(0, 0) * pg.at(0, 0);
    for (std::size_t c = 0; c < out.cell_count(); ++c)
        out.cell(c) += avg(pf, grid, ell, c) * avg(pg, grid, ell, c) - coarse;
    return out;
}

} // namespace dyadic
