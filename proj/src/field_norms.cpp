#include "dyadic/field_norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dyadic/errors.hpp"

namespace dyadic {
namespace {

void check_exponent(double p)
{
    if (!(p >= 1.0)) throw InvalidExponent("exponent p must satisfy p >= 1");
}

Eigen::VectorXd singular_values(const Mat& a)
{
    return Eigen::JacobiSVD<Mat>(a).singularValues();
}

/// Eigenvalues of a Hermitian PSD matrix with the clipping rule.
Eigen::VectorXd psd_eigenvalues(const Mat& s)
{
    Eigen::SelfAdjointEigenSolver<Mat> solver(s, Eigen::EigenvaluesOnly);
    Eigen::VectorXd lambda = solver.eigenvalues();
    const double floor = -1e-12 * std::max(1.0, lambda.maxCoeff());
    for (auto& x : lambda) {
        if (x < floor) throw NotPositiveSemidefinite("square function has eigenvalue " + std::to_string(x));
        x = std::max(x, 0.0);
    }
    return lambda;
}

struct Overlap {
    std::size_t cell;
    double length;
};

/// Cells of a period-1 lattice with 2^L cells starting at `origin` met by
/// [start, start + side), with overlap lengths.
std::vector<Overlap> overlaps_1d(double start, double side, int levels, double origin)
{
    const double cells = std::ldexp(1.0, levels);
    const auto count = static_cast<std::size_t>(cells);
    double u = (start - origin) - std::floor(start - origin);
    u *= cells;
    double remaining = side * cells;
    std::vector<Overlap> out;
    double p = std::floor(u);
    double pos = u;
    while (remaining > 1e-13) {
        const double piece = std::min(p + 1.0 - pos, remaining);
        if (piece > 1e-13)
            out.push_back({static_cast<std::size_t>(p) % count, piece / cells});
        remaining -= piece;
        pos = p + 1.0;
        p += 1.0;
    }
    return out;
}

double bourgain_on_own_grid(const MatrixField& f)
{
    const auto& grid = *f.grid();
    const AveragePyramid pyramid(f);
    double best = 0.0;
    for (int j = 0; j <= grid.levels(); ++j) {
        std::vector<double> accum(grid.cube_count(j), 0.0);
        for (std::size_t c = 0; c < f.cell_count(); ++c) {
            const std::size_t cube = grid.ancestor_of_cell(j, c);
            accum[cube] += op_norm_sq(f.cell(c) - pyramid.at(j, cube));
        }
        const double cells_per_cube = static_cast<double>(f.cell_count() / grid.cube_count(j));
        for (double a : accum) best = std::max(best, a / cells_per_cube);
    }
    return std::sqrt(best);
}

} // namespace

double schatten_norm(const Mat& a, double p)
{
    const Eigen::VectorXd s = singular_values(a);
    if (std::isinf(p)) return s.size() ? s.maxCoeff() : 0.0;
    check_exponent(p);
    double sum = 0.0;
    for (double x : s) sum += std::pow(x, p);
    return std::pow(sum, 1.0 / p);
}

double op_norm_sq(const Mat& a)
{
    if (a.size() == 1) return std::norm(a(0, 0));
    const Eigen::VectorXd s = singular_values(a);
    return s(0) * s(0);
}

double lp_norm(const MatrixField& f, double p)
{
    if (!std::isinf(p)) check_exponent(p);
    double acc = 0.0;
    for (std::size_t c = 0; c < f.cell_count(); ++c) {
        const Eigen::VectorXd s = singular_values(f.cell(c));
        if (std::isinf(p)) {
            acc = std::max(acc, s.maxCoeff());
        } else {
            for (double x : s) acc += std::pow(x, p);
        }
    }
    if (std::isinf(p)) return acc;
    return std::pow(acc * f.cell_volume(), 1.0 / p);
}

double hardy_col_norm(const MatrixField& f, double p)
{
    if (!std::isinf(p)) check_exponent(p);
    const auto& grid = *f.grid();
    const AveragePyramid pyramid(f);
    const int d = f.matrix_size();
    double acc = 0.0;
    Mat square(d, d), diff(d, d);
    for (std::size_t c = 0; c < f.cell_count(); ++c) {
        square.setZero();
        for (int k = 1; k <= grid.levels(); ++k) {
            diff = pyramid.at(k, grid.ancestor_of_cell(k, c)) -
                   pyramid.at(k - 1, grid.ancestor_of_cell(k - 1, c));
            square.noalias() += diff.adjoint() * diff;
        }
        const Eigen::VectorXd lambda = psd_eigenvalues(square);
        if (std::isinf(p)) {
            acc = std::max(acc, std::sqrt(lambda.maxCoeff()));
        } else {
            for (double x : lambda) acc += std::pow(x, p / 2.0);
        }
    }
    if (std::isinf(p)) return acc;
    return std::pow(acc * f.cell_volume(), 1.0 / p);
}

double bmo_mart_norm(const MatrixField& f)
{
    const auto& grid = *f.grid();
    const AveragePyramid pyramid(f);
    double best = 0.0;
    for (int k = 1; k <= grid.levels(); ++k) {
        std::vector<double> accum(grid.cube_count(k), 0.0);
        for (std::size_t c = 0; c < f.cell_count(); ++c)
            accum[grid.ancestor_of_cell(k, c)] +=
                op_norm_sq(f.cell(c) - pyramid.at(k - 1, grid.ancestor_of_cell(k - 1, c)));
        const double cells_per_cube = static_cast<double>(f.cell_count() / grid.cube_count(k));
        for (double a : accum) best = std::max(best, a / cells_per_cube);
    }
    return std::sqrt(best);
}

OffsetSystem offset_system(const DyadicGrid& grid)
{
    OffsetSystem system;
    system.dim = grid.dim();
    system.offsets.resize(static_cast<std::size_t>(grid.levels() + 1));
    for (int j = 0; j <= grid.levels(); ++j)
        for (int i = 0; i < grid.dim(); ++i)
            system.offsets[static_cast<std::size_t>(j)].push_back(grid.corner(j, 0, i));
    return system;
}

OffsetSystem third_shift_system(int dim, int levels, const std::vector<int>& t)
{
    if (static_cast<int>(t.size()) != dim) throw ShapeMismatch("third-shift label has wrong dimension");
    OffsetSystem system;
    system.dim = dim;
    system.offsets.resize(static_cast<std::size_t>(levels + 1));
    for (int j = 0; j <= levels; ++j) {
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        for (int i = 0; i < dim; ++i) {
            double offset = sign * t[static_cast<std::size_t>(i)] / 3.0 * std::ldexp(1.0, -j);
            offset -= std::floor(offset);
            system.offsets[static_cast<std::size_t>(j)].push_back(offset);
        }
    }
    return system;
}

double bmo_bourgain_norm(const MatrixField& f, const DyadicGrid& grid)
{
    if (grid.dim() != f.dim()) throw ShapeMismatch("grid dimension differs from field");
    if (grid.same_as(*f.grid())) return bourgain_on_own_grid(f);
    return bmo_bourgain_norm(f, offset_system(grid));
}

double bmo_bourgain_norm(const MatrixField& f, const OffsetSystem& system)
{
    if (system.dim != f.dim()) throw ShapeMismatch("offset system dimension differs from field");
    const auto& grid = *f.grid();
    const int n = f.dim();
    const int L = f.levels();
    const int d = f.matrix_size();

    std::vector<double> origin(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) origin[static_cast<std::size_t>(i)] = grid.corner(L, 0, i);

    double best = 0.0;
    Mat mean(d, d);
    for (int j = 0; j <= system.levels(); ++j) {
        const double side = std::ldexp(1.0, -j);
        const std::size_t per_coord = std::size_t{1} << j;
        // strips[i][m]: cells met by the m-th level-j interval in coordinate i.
        std::vector<std::vector<std::vector<Overlap>>> strips(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            auto& s = strips[static_cast<std::size_t>(i)];
            s.resize(per_coord);
            const double offset = system.offsets[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
            for (std::size_t m = 0; m < per_coord; ++m)
                s[m] = overlaps_1d(static_cast<double>(m) * side + offset, side, L,
                                   origin[static_cast<std::size_t>(i)]);
        }
        const double volume = std::ldexp(1.0, -j * n);
        std::vector<Overlap> pieces;
        for (std::size_t cube = 0; cube < (std::size_t{1} << (j * n)); ++cube) {
            pieces.assign(1, Overlap{0, 1.0});
            for (int i = 0; i < n; ++i) {
                const std::size_t m = (cube >> (j * i)) & (per_coord - 1);
                std::vector<Overlap> next;
                for (const auto& a : pieces)
                    for (const auto& b : strips[static_cast<std::size_t>(i)][m])
                        next.push_back({a.cell | (b.cell << (L * i)), a.length * b.length});
                pieces = std::move(next);
            }
            mean.setZero();
            for (const auto& piece : pieces) mean += piece.length * f.cell(piece.cell);
            mean /= volume;
            double spread = 0.0;
            for (const auto& piece : pieces) spread += piece.length * op_norm_sq(f.cell(piece.cell) - mean);
            best = std::max(best, spread / volume);
        }
    }
    return std::sqrt(best);
}

double bmo_cube_norm(const MatrixField& f)
{
    const int n = f.dim();
    double best = 0.0;
    std::vector<int> t(static_cast<std::size_t>(n), 0);
    int total = 1;
    for (int i = 0; i < n; ++i) total *= 3;
    for (int label = 0; label < total; ++label) {
        int rest = label;
        for (int i = 0; i < n; ++i) {
            t[static_cast<std::size_t>(i)] = rest % 3;
            rest /= 3;
        }
        best = std::max(best, bmo_bourgain_norm(f, third_shift_system(n, f.levels(), t)));
    }
    return best;
}

double doob_maximal(const MatrixField& f, double p)
{
    check_exponent(p);
    if (std::isinf(p)) throw InvalidExponent("doob_maximal needs a finite exponent");
    const auto& grid = *f.grid();
    const AveragePyramid pyramid(f);
    double acc = 0.0;
    for (std::size_t c = 0; c < f.cell_count(); ++c) {
        double top = 0.0;
        for (int k = 0; k <= grid.levels(); ++k)
            top = std::max(top, std::pow(schatten_norm(pyramid.at(k, grid.ancestor_of_cell(k, c)), p), p));
        acc += top;
    }
    return acc * f.cell_volume();
}

} // namespace dyadic
