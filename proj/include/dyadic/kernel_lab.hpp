#pragma once

// Continuous one-dimensional kernels, their Haar coefficients by composite
// Gauss-Legendre quadrature, and the shift-averaging approximation of the
// Hilbert transform.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dyadic/rng.hpp"

namespace dyadic {

struct KernelModel {
    using Eval = std::function<Mat(double x, double y)>;

    std::string name;
    int dim = 1;
    int matrix_size = 1;
    double alpha = 1.0;          ///< Hoelder exponent of the regularity bound
    double size_constant = 1.0;  ///< C in ||K(x,y)|| <= C / |x-y|^n
    Eval eval;

    Mat operator()(double x, double y) const { return eval(x, y); }
    KernelModel scaled(Complex c) const;
};

/// K(x,y) = 1/(x-y), the Hilbert kernel without the 1/pi factor.
KernelModel hilbert_kernel();
/// K(x,y) = 1/sqrt((x-y)^2 + eps^2).
KernelModel smoothed_abs_kernel(double eps);
KernelModel constant_kernel(Mat value);
KernelModel zero_kernel(int matrix_size = 1);

struct KernelParts {
    KernelModel even;
    KernelModel odd;
};

/// K_e(x,y) = (K(x,y) + K(y,x))/2 and K_o(x,y) = (K(x,y) - K(y,x))/2.
KernelParts symmetrize(const KernelModel& k);

struct Interval {
    double start = 0.0;
    double side = 1.0;

    Interval translated(std::int64_t m) const { return {start + static_cast<double>(m) * side, side}; }
};

/// Treatment of integrals over rectangles whose closures meet the diagonal.
/// SymmetricPair integrates a square I x I as the sum over x > y of
/// K(x,y) + K(y,x) and corner-touching rectangles by a Duffy transform.
enum class PvRule { None, SymmetricPair };

struct QuadratureValue {
    Mat value;
    double error = 0.0; ///< ||Q_{q+1} - Q_q||, the refinement-doubling change
};

/// Integral of K over the rectangle [x0,x1] x [y0,y1] with 2^level
/// panels of ten-point Gauss-Legendre rules per direction.
QuadratureValue integrate_rectangle(const KernelModel& k, Interval x_range, Interval y_range, int level,
                                    PvRule rule);

/// <h^eta_{I+m}, T h^theta_I> with eta, theta in {0, 1} (0 is the
/// normalized indicator). Throws SingularOverlap when the supports meet and
/// rule is None.
QuadratureValue haar_coeff_kernel(const KernelModel& k, Interval cube, std::int64_t m, int quadrature_level,
                                  unsigned eta, unsigned theta, PvRule rule = PvRule::SymmetricPair);

struct DecayPoint {
    std::int64_t m = 0;
    double coeff_norm = 0.0; ///< max over (eta, theta) in {(1,1), (0,1), (1,0)}
    double error = 0.0;
};

struct DecayFit {
    double exponent = 0.0;
    double r_squared = 0.0;
    std::vector<DecayPoint> points;
};

/// Least-squares slope of log coeff_norm against log(1 + |m|).
/// Throws InsufficientPoints below eight points.
DecayFit decay_fit(const KernelModel& k, const std::vector<std::int64_t>& m_values, Interval cube,
                   int quadrature_level = 3, PvRule rule = PvRule::SymmetricPair);

/// Samples at the midpoints of 2^L equal cells of [start, start + width).
struct SampledFunction {
    double start = 0.0;
    double width = 1.0;
    std::vector<Complex> samples;

    double h() const { return width / static_cast<double>(samples.size()); }
    double point(std::size_t i) const { return start + (static_cast<double>(i) + 0.5) * h(); }
    /// The first and last samples vanish.
    bool supported_inside() const;

    static SampledFunction from_function(double start, double width, std::size_t count,
                                         const std::function<Complex(double)>& fn);
};

/// Smooth bump exp(-1 / (1 - s^2)), s = (x - center) / radius, zero outside.
double bump(double x, double center, double radius);

/// Punctured trapezoid rule for the periodic principal value
/// (1/P) sum_{j != i} f_j h cot(pi (x_i - x_j) / P), P the box width.
SampledFunction periodic_hilbert(const SampledFunction& f);

struct ShiftAverageResult {
    SampledFunction approx;
    SampledFunction hilbert;
    double fitted_scale = 0.0;
    double rel_error = 0.0;
};

/// Average of Petermichl shifts over `grids` random grids of depth L on the
/// box identified with the torus, grid g drawn from substream g of `seed`.
ShiftAverageResult shift_average_hilbert(const SampledFunction& f, std::size_t grids, std::uint64_t seed,
                                         int jobs = 1);

struct AuditValue {
    double value = 0.0;
    double error = 0.0;
};

/// max over cubes of ||integral over I x I of K|| / |I| with the symmetric
/// pair rule, refining from `level` until the change is below tol.
/// Throws QuadratureFailure when max_level is reached first.
AuditValue wbp_audit(const KernelModel& k, const std::vector<Interval>& cubes, int level = 2,
                     double tol = 1e-10, int max_level = 8);

/// max over `pairs` random pairs in [lo, hi)^2 of ||K(x,y)|| |x-y|^n.
double size_audit(const KernelModel& k, double lo, double hi, std::size_t pairs, std::uint64_t seed);

} // namespace dyadic
