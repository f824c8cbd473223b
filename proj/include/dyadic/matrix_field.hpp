#pragma once

// Piecewise-constant d x d complex-matrix fields on the n-torus and their
// Haar analysis.
//
// A field lives on the finest level L of a dyadic grid: one matrix per cell,
// 2^{L n} cells of volume 2^{-L n}. Haar functions are L2-normalized,
// h^theta_I = |I|^{-1/2} prod_i (+1 on the left half, -1 on the right half
// of coordinate i when theta_i = 1), and the pairing is anti-linear in the
// first slot.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dyadic/grid.hpp"
#include "dyadic/rng.hpp"

namespace dyadic {

using CellMap = Eigen::Map<Mat>;
using ConstCellMap = Eigen::Map<const Mat>;

class MatrixField {
public:
    /// Zero field.
    MatrixField(GridHandle grid, int d);

    static MatrixField standard(int dim, int levels, int d);
    static MatrixField constant(GridHandle grid, const Mat& value);
    static MatrixField identity(GridHandle grid, int d);
    /// Entries independent and uniform in [-1,1] + i[-1,1].
    static MatrixField random(GridHandle grid, int d, Rng& rng);
    static MatrixField from_function(GridHandle grid, int d,
                                     const std::function<Mat(std::size_t cell)>& value);

    int dim() const { return grid_->dim(); }
    int levels() const { return grid_->levels(); }
    int matrix_size() const { return d_; }
    const GridHandle& grid() const { return grid_; }
    std::size_t cell_count() const { return grid_->cell_count(); }
    double cell_volume() const;
    /// Real dimension count of the underlying complex vector space.
    std::size_t scalar_count() const { return data_.size(); }

    CellMap cell(std::size_t c)
    {
        return CellMap(data_.data() + c * stride(), d_, d_);
    }
    ConstCellMap cell(std::size_t c) const
    {
        return ConstCellMap(data_.data() + c * stride(), d_, d_);
    }

    /// Column-major cell blocks, cell after cell.
    std::span<Complex> data() { return data_; }
    std::span<const Complex> data() const { return data_; }

    bool same_shape(const MatrixField& other) const;
    /// Throws ShapeMismatch naming `context` when shapes differ.
    void require_same_shape(const MatrixField& other, const char* context) const;

    MatrixField& operator+=(const MatrixField& other);
    MatrixField& operator-=(const MatrixField& other);
    MatrixField& operator*=(Complex scalar);

    /// Pointwise adjoint f*(x) = f(x)^*.
    MatrixField adjoint() const;
    double max_abs() const;

private:
    std::size_t stride() const { return static_cast<std::size_t>(d_) * static_cast<std::size_t>(d_); }

    GridHandle grid_;
    int d_;
    std::vector<Complex> data_;
};

MatrixField operator+(MatrixField a, const MatrixField& b);
MatrixField operator-(MatrixField a, const MatrixField& b);
MatrixField operator*(Complex scalar, MatrixField f);
MatrixField operator*(MatrixField f, Complex scalar);

/// Pointwise matrix product x -> a(x) b(x).
MatrixField product(const MatrixField& a, const MatrixField& b);
/// x -> u f(x) and x -> f(x) u for a constant matrix u.
MatrixField left_multiply(const Mat& u, const MatrixField& f);
MatrixField right_multiply(const MatrixField& f, const Mat& u);

double max_abs_diff(const MatrixField& a, const MatrixField& b);

/// Cube averages of a field at every level 0..L, stored per level as
/// consecutive column-major blocks indexed by flat cube index.
class AveragePyramid {
public:
    explicit AveragePyramid(const MatrixField& f);

    int levels() const { return static_cast<int>(levels_.size()) - 1; }
    int matrix_size() const { return d_; }
    ConstCellMap at(int level, std::size_t cube) const
    {
        return ConstCellMap(levels_[static_cast<std::size_t>(level)].data() +
                                cube * static_cast<std::size_t>(d_ * d_),
                            d_, d_);
    }

private:
    int d_;
    std::vector<std::vector<Complex>> levels_;
};

/// E_k f: the level-k cube average on each cell.
MatrixField cond_expect(const MatrixField& f, int k);
/// D_k f = E_k f - E_{k-1} f for 1 <= k <= L.
MatrixField mart_diff(const MatrixField& f, int k);
/// E_k f from a precomputed pyramid, on the grid of `like`.
MatrixField expand_level(const AveragePyramid& pyramid, const MatrixField& like, int k);

/// True when f is constant on every level-k cube up to `tol` (max abs).
bool is_measurable(const MatrixField& f, int k, double tol = 0.0);

/// <<g, f>> = integral of tr(g(x)^* f(x)).
Complex pairing(const MatrixField& g, const MatrixField& f);
/// Squared L2 norm <<f, f>>.
double l2_norm_sq(const MatrixField& f);

// ------------------------------------------------------------------ Haar

/// Number of nonzero signatures, 2^n - 1. Signature theta is a bit mask,
/// bit i = oscillating in coordinate i; theta0 = 1.
inline unsigned signature_count(int dim) { return (1u << dim) - 1u; }
inline constexpr unsigned kTheta0 = 1u;

/// Value of 2^{-n}-normalized Haar profile on child `child` of a cube:
/// (-1)^{popcount(theta & child)}.
inline int haar_sign(unsigned theta, unsigned child)
{
    return (__builtin_popcount(theta & child) & 1) ? -1 : 1;
}

/// Label of a basis function in the flat Haar ordering. Index 0 is the
/// coarse average; cube level c occupies [2^{c n}, 2^{(c+1) n}).
struct HaarLabel {
    bool coarse = false;
    int cube_level = 0;
    std::size_t cube = 0;
    unsigned theta = 0;
};

std::size_t haar_index(int dim, int cube_level, std::size_t cube, unsigned theta);
HaarLabel haar_label(int dim, std::size_t index);

/// Coefficients <h^theta_I, f> for all cubes I at levels 0..L-1 plus the
/// coarse average, in the flat Haar ordering (2^{L n} matrices).
class HaarCoefficients {
public:
    HaarCoefficients(GridHandle grid, int d);
    /// Raw layout; validated by haar_synthesize.
    HaarCoefficients(GridHandle grid, int d, std::vector<Complex> data);

    int dim() const { return grid_->dim(); }
    int levels() const { return grid_->levels(); }
    int matrix_size() const { return d_; }
    const GridHandle& grid() const { return grid_; }
    std::size_t size() const { return data_.size() / stride(); }

    CellMap entry(std::size_t index) { return CellMap(data_.data() + index * stride(), d_, d_); }
    ConstCellMap entry(std::size_t index) const
    {
        return ConstCellMap(data_.data() + index * stride(), d_, d_);
    }
    CellMap coarse() { return entry(0); }
    ConstCellMap coarse() const { return entry(0); }
    CellMap at(int cube_level, std::size_t cube, unsigned theta)
    {
        return entry(haar_index(dim(), cube_level, cube, theta));
    }
    ConstCellMap at(int cube_level, std::size_t cube, unsigned theta) const
    {
        return entry(haar_index(dim(), cube_level, cube, theta));
    }

    std::span<const Complex> data() const { return data_; }
    std::span<Complex> data() { return data_; }

private:
    std::size_t stride() const { return static_cast<std::size_t>(d_) * static_cast<std::size_t>(d_); }

    GridHandle grid_;
    int d_;
    std::vector<Complex> data_;
};

HaarCoefficients haar_analyze(const MatrixField& f);
MatrixField haar_synthesize(const HaarCoefficients& c);

/// The field h^theta_I (x) u; theta = 0 gives the averaging function
/// |I|^{-1/2} 1_I.
MatrixField haar_function(GridHandle grid, int cube_level, std::size_t cube, unsigned theta,
                          const Mat& u);
/// The field of the flat basis element `index` (coarse = constant 1) times u.
MatrixField basis_field(GridHandle grid, std::size_t index, const Mat& u);

/// h^theta_I evaluated on finest cell `cell`; 0 outside I. theta = 0 is
/// the averaging function |I|^{-1/2} 1_I.
double haar_value(const DyadicGrid& grid, int cube_level, std::size_t cube, unsigned theta,
                  std::size_t cell);

} // namespace dyadic
