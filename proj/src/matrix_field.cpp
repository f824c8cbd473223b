#include "dyadic/matrix_field.hpp"

#include <algorithm>
#include <cmath>

#include "dyadic/errors.hpp"

namespace dyadic {

MatrixField::MatrixField(GridHandle grid, int d) : grid_(std::move(grid)), d_(d)
{
    if (!grid_) throw ShapeMismatch("field requires a grid");
    if (d_ < 1) throw ShapeMismatch("matrix size must be positive");
    data_.assign(grid_->cell_count() * stride(), Complex{});
}

MatrixField MatrixField::standard(int dim, int levels, int d)
{
    return MatrixField(DyadicGrid::standard(dim, levels), d);
}

MatrixField MatrixField::constant(GridHandle grid, const Mat& value)
{
    if (value.rows() != value.cols()) throw ShapeMismatch("constant value must be square");
    MatrixField f(std::move(grid), static_cast<int>(value.rows()));
    for (std::size_t c = 0; c < f.cell_count(); ++c) f.cell(c) = value;
    return f;
}

MatrixField MatrixField::identity(GridHandle grid, int d)
{
    return constant(std::move(grid), Mat::Identity(d, d));
}

MatrixField MatrixField::random(GridHandle grid, int d, Rng& rng)
{
    MatrixField f(std::move(grid), d);
    for (std::size_t c = 0; c < f.cell_count(); ++c) f.cell(c) = rng.matrix(d);
    return f;
}

MatrixField MatrixField::from_function(GridHandle grid, int d,
                                       const std::function<Mat(std::size_t)>& value)
{
    MatrixField f(std::move(grid), d);
    for (std::size_t c = 0; c < f.cell_count(); ++c) {
        Mat v = value(c);
        if (v.rows() != d || v.cols() != d) throw ShapeMismatch("cell value has wrong size");
        f.cell(c) = v;
    }
    return f;
}

double MatrixField::cell_volume() const { return std::ldexp(1.0, -levels() * dim()); }

bool MatrixField::same_shape(const MatrixField& other) const
{
    return d_ == other.d_ && (grid_ == other.grid_ || grid_->same_as(*other.grid_));
}

void MatrixField::require_same_shape(const MatrixField& other, const char* context) const
{
    if (!same_shape(other))
        throw ShapeMismatch(std::string(context) + ": fields differ in (n, L, d) or grid");
}

MatrixField& MatrixField::operator+=(const MatrixField& other)
{
    require_same_shape(other, "operator+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

MatrixField& MatrixField::operator-=(const MatrixField& other)
{
    require_same_shape(other, "operator-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

MatrixField& MatrixField::operator*=(Complex scalar)
{
    for (auto& x : data_) x *= scalar;
    return *this;
}

MatrixField MatrixField::adjoint() const
{
    MatrixField out(grid_, d_);
    for (std::size_t c = 0; c < cell_count(); ++c) out.cell(c) = cell(c).adjoint();
    return out;
}

double MatrixField::max_abs() const
{
    double m = 0.0;
    for (const auto& x : data_) m = std::max(m, std::abs(x));
    return m;
}

MatrixField operator+(MatrixField a, const MatrixField& b) { return a += b; }
MatrixField operator-(MatrixField a, const MatrixField& b) { return a -= b; }
MatrixField operator*(Complex scalar, MatrixField f) { return f *= scalar; }
MatrixField operator*(MatrixField f, Complex scalar) { return f *= scalar; }

MatrixField product(const MatrixField& a, const MatrixField& b)
{
    a.require_same_shape(b, "product");
    MatrixField out(a.grid(), a.matrix_size());
    for (std::size_t c = 0; c < a.cell_count(); ++c) out.cell(c).noalias() = a.cell(c) * b.cell(c);
    return out;
}

MatrixField left_multiply(const Mat& u, const MatrixField& f)
{
    if (u.rows() != f.matrix_size() || u.cols() != f.matrix_size())
        throw ShapeMismatch("left_multiply: matrix size differs from field");
    MatrixField out(f.grid(), f.matrix_size());
    for (std::size_t c = 0; c < f.cell_count(); ++c) out.cell(c).noalias() = u * f.cell(c);
    return out;
}

MatrixField right_multiply(const MatrixField& f, const Mat& u)
{
    if (u.rows() != f.matrix_size() || u.cols() != f.matrix_size())
        throw ShapeMismatch("right_multiply: matrix size differs from field");
    MatrixField out(f.grid(), f.matrix_size());
    for (std::size_t c = 0; c < f.cell_count(); ++c) out.cell(c).noalias() = f.cell(c) * u;
    return out;
}

double max_abs_diff(const MatrixField& a, const MatrixField& b)
{
    a.require_same_shape(b, "max_abs_diff");
    double m = 0.0;
    const auto x = a.data();
    const auto y = b.data();
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
    return m;
}

// ------------------------------------------------------ conditional expectation

AveragePyramid::AveragePyramid(const MatrixField& f) : d_(f.matrix_size())
{
    const auto& grid = *f.grid();
    const int top = grid.levels();
    const std::size_t block = static_cast<std::size_t>(d_ * d_);
    const double weight = 1.0 / static_cast<double>(grid.children_per_cube());
    levels_.resize(static_cast<std::size_t>(top + 1));
    levels_[static_cast<std::size_t>(top)].assign(f.data().begin(), f.data().end());
    for (int j = top - 1; j >= 0; --j) {
        const auto& fine = levels_[static_cast<std::size_t>(j + 1)];
        auto& coarse = levels_[static_cast<std::size_t>(j)];
        coarse.assign(grid.cube_count(j) * block, Complex{});
        for (std::size_t cube = 0; cube < grid.cube_count(j); ++cube) {
            Complex* out = coarse.data() + cube * block;
            for (unsigned e = 0; e < grid.children_per_cube(); ++e) {
                const Complex* in = fine.data() + grid.child_of(j, cube, e) * block;
                for (std::size_t t = 0; t < block; ++t) out[t] += in[t];
            }
            for (std::size_t t = 0; t < block; ++t) out[t] *= weight;
        }
    }
}

MatrixField expand_level(const AveragePyramid& pyramid, const MatrixField& like, int k)
{
    if (k < 0 || k > pyramid.levels()) throw LevelOutOfRange("level outside [0, L]");
    MatrixField out(like.grid(), like.matrix_size());
    const auto& grid = *like.grid();
    for (std::size_t c = 0; c < like.cell_count(); ++c)
        out.cell(c) = pyramid.at(k, grid.ancestor_of_cell(k, c));
    return out;
}

MatrixField cond_expect(const MatrixField& f, int k)
{
    if (k < 0 || k > f.levels())
        throw LevelOutOfRange("cond_expect level " + std::to_string(k) + " outside [0, " +
                              std::to_string(f.levels()) + "]");
    return expand_level(AveragePyramid(f), f, k);
}

MatrixField mart_diff(const MatrixField& f, int k)
{
    if (k < 1 || k > f.levels())
        throw LevelOutOfRange("mart_diff level " + std::to_string(k) + " outside [1, " +
                              std::to_string(f.levels()) + "]");
    const AveragePyramid pyramid(f);
    MatrixField out(f.grid(), f.matrix_size());
    const auto& grid = *f.grid();
    for (std::size_t c = 0; c < f.cell_count(); ++c)
        out.cell(c) = pyramid.at(k, grid.ancestor_of_cell(k, c)) -
                      pyramid.at(k - 1, grid.ancestor_of_cell(k - 1, c));
    return out;
}

bool is_measurable(const MatrixField& f, int k, double tol)
{
    if (k < 0 || k > f.levels()) throw LevelOutOfRange("level outside [0, L]");
    const auto& grid = *f.grid();
    std::vector<std::size_t> representative(grid.cube_count(k), f.cell_count());
    for (std::size_t c = 0; c < f.cell_count(); ++c) {
        const std::size_t cube = grid.ancestor_of_cell(k, c);
        if (representative[cube] == f.cell_count()) {
            representative[cube] = c;
            continue;
        }
        if ((f.cell(c) - f.cell(representative[cube])).cwiseAbs().maxCoeff() > tol) return false;
    }
    return true;
}

Complex pairing(const MatrixField& g, const MatrixField& f)
{
    g.require_same_shape(f, "pairing");
    const auto x = g.data();
    const auto y = f.data();
    Complex sum{};
    for (std::size_t i = 0; i < x.size(); ++i) sum += std::conj(x[i]) * y[i];
    return sum * f.cell_volume();
}

double l2_norm_sq(const MatrixField& f)
{
    double sum = 0.0;
    for (const auto& x : f.data()) sum += std::norm(x);
    return sum * f.cell_volume();
}

// ------------------------------------------------------------------- Haar

std::size_t haar_index(int dim, int cube_level, std::size_t cube, unsigned theta)
{
    return (std::size_t{1} << (cube_level * dim)) + cube * signature_count(dim) + (theta - 1);
}

HaarLabel haar_label(int dim, std::size_t index)
{
    HaarLabel label;
    if (index == 0) {
        label.coarse = true;
        return label;
    }
    int level = 0;
    while ((std::size_t{1} << ((level + 1) * dim)) <= index) ++level;
    const std::size_t rest = index - (std::size_t{1} << (level * dim));
    label.cube_level = level;
    label.cube = rest / signature_count(dim);
    label.theta = static_cast<unsigned>(rest % signature_count(dim)) + 1;
    return label;
}

HaarCoefficients::HaarCoefficients(GridHandle grid, int d) : grid_(std::move(grid)), d_(d)
{
    data_.assign(grid_->cell_count() * stride(), Complex{});
}

HaarCoefficients::HaarCoefficients(GridHandle grid, int d, std::vector<Complex> data)
    : grid_(std::move(grid)), d_(d), data_(std::move(data))
{
}

HaarCoefficients haar_analyze(const MatrixField& f)
{
    const auto& grid = *f.grid();
    const AveragePyramid pyramid(f);
    const int n = grid.dim();
    const int d = f.matrix_size();
    HaarCoefficients out(f.grid(), d);
    out.coarse() = pyramid.at(0, 0);
    const double per_child = 1.0 / static_cast<double>(grid.children_per_cube());
    Mat acc(d, d);
    for (int j = 0; j < grid.levels(); ++j) {
        const double scale = std::sqrt(std::ldexp(1.0, -j * n));
        for (std::size_t cube = 0; cube < grid.cube_count(j); ++cube) {
            for (unsigned theta = 1; theta <= signature_count(n); ++theta) {
                acc.setZero();
                for (unsigned e = 0; e < grid.children_per_cube(); ++e)
                    acc += static_cast<double>(haar_sign(theta, e)) *
                           pyramid.at(j + 1, grid.child_of(j, cube, e));
                out.at(j, cube, theta) = (scale * per_child) * acc;
            }
        }
    }
    return out;
}

MatrixField haar_synthesize(const HaarCoefficients& c)
{
    const auto& grid = *c.grid();
    const int n = grid.dim();
    const int d = c.matrix_size();
    if (c.size() != grid.cell_count() ||
        c.data().size() != grid.cell_count() * static_cast<std::size_t>(d * d))
        throw LayoutMismatch("coefficient count " + std::to_string(c.size()) + " does not match 2^(L n) = " +
                             std::to_string(grid.cell_count()));

    const std::size_t block = static_cast<std::size_t>(d * d);
    std::vector<Complex> current(c.coarse().data(), c.coarse().data() + block);
    for (int j = 0; j < grid.levels(); ++j) {
        const double inv_scale = std::sqrt(std::ldexp(1.0, j * n));
        std::vector<Complex> next(grid.cube_count(j + 1) * block);
        for (std::size_t cube = 0; cube < grid.cube_count(j); ++cube) {
            const ConstCellMap avg(current.data() + cube * block, d, d);
            for (unsigned e = 0; e < grid.children_per_cube(); ++e) {
                CellMap kid(next.data() + grid.child_of(j, cube, e) * block, d, d);
                kid = avg;
                for (unsigned theta = 1; theta <= signature_count(n); ++theta)
                    kid += (inv_scale * haar_sign(theta, e)) * c.at(j, cube, theta);
            }
        }
        current = std::move(next);
    }
    MatrixField out(c.grid(), d);
    std::copy(current.begin(), current.end(), out.data().begin());
    return out;
}

double haar_value(const DyadicGrid& grid, int cube_level, std::size_t cube, unsigned theta,
                  std::size_t cell)
{
    if (cube_level < 0 || cube_level > grid.levels()) throw LevelOutOfRange("haar level");
    if (grid.ancestor_of_cell(cube_level, cell) != cube) return 0.0;
    const double amplitude = std::sqrt(std::ldexp(1.0, cube_level * grid.dim()));
    if (theta == 0) return amplitude;
    if (cube_level >= grid.levels()) throw LevelOutOfRange("oscillating Haar function below finest level");
    const unsigned e = grid.position_in_parent(cube_level + 1, grid.ancestor_of_cell(cube_level + 1, cell));
    return amplitude * haar_sign(theta, e);
}

MatrixField haar_function(GridHandle grid, int cube_level, std::size_t cube, unsigned theta,
                          const Mat& u)
{
    const auto& g = *grid;
    MatrixField out(std::move(grid), static_cast<int>(u.rows()));
    for (std::size_t c = 0; c < out.cell_count(); ++c) {
        const double v = haar_value(g, cube_level, cube, theta, c);
        if (v != 0.0) out.cell(c) = v * u;
    }
    return out;
}

MatrixField basis_field(GridHandle grid, std::size_t index, const Mat& u)
{
    const HaarLabel label = haar_label(grid->dim(), index);
    if (label.coarse) return MatrixField::constant(std::move(grid), u);
    return haar_function(std::move(grid), label.cube_level, label.cube, label.theta, u);
}

} // namespace dyadic
