#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dyadic/errors.hpp"
#include "dyadic/kernel_lab.hpp"

using namespace dyadic;

namespace {

/// Integral of 1/(x - y) over [a,b] x [c,e] for disjoint intervals, from the
/// antiderivative t log|t|.
double hilbert_rectangle(double a, double b, double c, double e)
{
    auto g = [](double t) { return t == 0.0 ? 0.0 : t * std::log(std::abs(t)); };
    return (g(b - c) - g(a - c)) - (g(b - e) - g(a - e));
}

/// <h^eta_{I+m}, H h^theta_I> for I = [start, start + side) from the
/// closed-form rectangle integrals of the four half-interval pairs.
double hilbert_haar_coefficient(double start, double side, std::int64_t m, unsigned eta, unsigned theta)
{
    const double half = side / 2;
    const double x0 = start + static_cast<double>(m) * side;
    double sum = 0.0;
    for (int ex = 0; ex < 2; ++ex)
        for (int ey = 0; ey < 2; ++ey) {
            const double sx = (eta && ex) ? -1.0 : 1.0;
            const double sy = (theta && ey) ? -1.0 : 1.0;
            sum += sx * sy * hilbert_rectangle(x0 + ex * half, x0 + (ex + 1) * half, start + ey * half,
                                               start + (ey + 1) * half);
        }
    return sum / side;
}

} // namespace

TEST(Symmetrize, HilbertIsOdd)
{
    const KernelParts parts = symmetrize(hilbert_kernel());
    for (double x : {0.1, 0.7, 2.5})
        for (double y : {0.3, -1.2, 4.0}) {
            EXPECT_EQ(parts.even(x, y)(0, 0), Complex(0.0));
            EXPECT_NEAR(std::abs(parts.odd(x, y)(0, 0) - hilbert_kernel()(x, y)(0, 0)), 0.0, 1e-15);
        }
}

TEST(Symmetrize, SymmetricKernelHasNoOddPart)
{
    const KernelParts parts = symmetrize(smoothed_abs_kernel(0.1));
    for (double x : {0.0, 0.4})
        for (double y : {0.2, 1.0}) EXPECT_EQ(parts.odd(x, y)(0, 0), Complex(0.0));
}

TEST(Symmetrize, RandomMatrixKernelSplitsExactly)
{
    Rng rng(3);
    const Mat a = rng.matrix(3), b = rng.matrix(3);
    KernelModel k{"poly", 1, 3, 1.0, 1.0, [a, b](double x, double y) { return Mat(x * a + y * y * b); }};
    const KernelParts parts = symmetrize(k);
    for (int trial = 0; trial < 20; ++trial) {
        const double x = rng.uniform(-2, 2), y = rng.uniform(-2, 2);
        EXPECT_LT((parts.even(x, y) + parts.odd(x, y) - k(x, y)).norm(), 1e-14);
        EXPECT_LT((parts.even(x, y) - parts.even(y, x)).norm(), 1e-14);
        EXPECT_LT((parts.odd(x, y) + parts.odd(y, x)).norm(), 1e-14);
    }
    const KernelParts again = symmetrize(parts.even);
    for (int trial = 0; trial < 5; ++trial) {
        const double x = rng.uniform(-2, 2), y = rng.uniform(-2, 2);
        EXPECT_LT(again.odd(x, y).norm(), 1e-14);
        EXPECT_LT((again.even(x, y) - parts.even(x, y)).norm(), 1e-14);
    }
}

TEST(HaarCoeffKernel, ZeroKernel)
{
    const QuadratureValue v = haar_coeff_kernel(zero_kernel(), Interval{0.0, 1.0}, 3, 2, 1, 1);
    EXPECT_EQ(v.value.norm(), 0.0);
}

TEST(HaarCoeffKernel, HilbertMatchesClosedForm)
{
    for (std::int64_t m : {2, 4, -3, 9})
        for (unsigned eta : {0u, 1u})
            for (unsigned theta : {0u, 1u}) {
                const QuadratureValue v = haar_coeff_kernel(hilbert_kernel(), Interval{0.0, 1.0}, m, 3, eta, theta);
                EXPECT_NEAR(v.value(0, 0).real(), hilbert_haar_coefficient(0.0, 1.0, m, eta, theta), 1e-8)
                    << "m " << m << " eta " << eta << " theta " << theta;
                EXPECT_LT(v.error, 1e-8);
            }
}

TEST(HaarCoeffKernel, TouchingSupportsNeedARule)
{
    const Interval cube{0.0, 1.0};
    EXPECT_THROW(haar_coeff_kernel(hilbert_kernel(), cube, 0, 2, 1, 1, PvRule::None), SingularOverlap);
    EXPECT_THROW(haar_coeff_kernel(hilbert_kernel(), cube, 1, 2, 1, 1, PvRule::None), SingularOverlap);
    // The odd kernel integrates to zero against the symmetric h_I (x) h_I.
    const QuadratureValue diagonal = haar_coeff_kernel(hilbert_kernel(), cube, 0, 4, 1, 1);
    EXPECT_LT(diagonal.value.norm(), 1e-10);
    const QuadratureValue neighbour = haar_coeff_kernel(hilbert_kernel(), cube, 1, 6, 1, 1);
    EXPECT_NEAR(neighbour.value(0, 0).real(), hilbert_haar_coefficient(0.0, 1.0, 1, 1, 1), 1e-8);
}

TEST(HaarCoeffKernel, MagnitudeDecreasesInM)
{
    double previous = INFINITY;
    for (std::int64_t m = 2; m <= 64; ++m) {
        double size = 0.0;
        for (auto [eta, theta] : {std::pair{1u, 1u}, {0u, 1u}, {1u, 0u}})
            size = std::max(size, haar_coeff_kernel(hilbert_kernel(), Interval{0.0, 1.0}, m, 3, eta, theta).value.norm());
        EXPECT_LT(size, previous) << "m " << m;
        previous = size;
    }
}

TEST(DecayFit, HilbertSmoothedAndScaled)
{
    std::vector<std::int64_t> ms;
    for (std::int64_t m = 2; m <= 64; ++m) ms.push_back(m);
    const DecayFit hilbert = decay_fit(hilbert_kernel(), ms, Interval{0.0, 1.0});
    EXPECT_GE(hilbert.exponent, -2.3);
    EXPECT_LE(hilbert.exponent, -1.7);
    EXPECT_GE(hilbert.r_squared, 0.98);
    EXPECT_EQ(hilbert.points.size(), ms.size());

    const DecayFit smoothed = decay_fit(smoothed_abs_kernel(0.01), ms, Interval{0.0, 1.0});
    EXPECT_GE(smoothed.exponent, -2.3);
    EXPECT_LE(smoothed.exponent, -1.7);

    const DecayFit scaled = decay_fit(hilbert_kernel().scaled(Complex(-3.0, 4.0)), ms, Interval{0.0, 1.0});
    EXPECT_NEAR(scaled.exponent, hilbert.exponent, 1e-10);
    EXPECT_NEAR(scaled.r_squared, hilbert.r_squared, 1e-10);

    EXPECT_THROW(decay_fit(hilbert_kernel(), {2, 3, 4, 5, 6, 7, 8}, Interval{0.0, 1.0}), InsufficientPoints);
}

TEST(WbpAudit, Examples)
{
    const std::vector<Interval> cubes{{0.0, 1.0}, {0.5, 0.25}, {-2.0, 0.5}};
    EXPECT_LT(wbp_audit(hilbert_kernel(), cubes).value, 1e-10);
    EXPECT_EQ(wbp_audit(zero_kernel(), cubes).value, 0.0);
    const AuditValue constant = wbp_audit(constant_kernel(Mat::Identity(1, 1)), cubes);
    EXPECT_NEAR(constant.value, 1.0, 1e-12);
    EXPECT_LE(constant.error, 1e-10);
}

TEST(WbpAudit, UnstableRefinementFails)
{
    // The singular even kernel 1/|x - y| has a divergent diagonal integral.
    const KernelModel singular{"abs", 1, 1, 1.0, 1.0,
                               [](double x, double y) { return Mat::Constant(1, 1, 1.0 / std::abs(x - y)); }};
    EXPECT_THROW(wbp_audit(singular, {Interval{0.0, 1.0}}, 2, 1e-10, 5), QuadratureFailure);
}

TEST(SizeAudit, HilbertConstantIsOne)
{
    EXPECT_NEAR(size_audit(hilbert_kernel(), -1.0, 1.0, 1000, 4), 1.0, 1e-12);
    EXPECT_LE(size_audit(smoothed_abs_kernel(0.1), -1.0, 1.0, 1000, 4), 1.0 + 1e-12);
}

TEST(PeriodicHilbert, CosineMapsToSine)
{
    const double width = 2.0;
    const SampledFunction f = SampledFunction::from_function(0.0, width, 512, [&](double x) {
        return Complex(std::cos(2 * std::numbers::pi * x / width));
    });
    const SampledFunction h = periodic_hilbert(f);
    double worst = 0.0;
    for (std::size_t i = 0; i < h.samples.size(); ++i)
        worst = std::max(worst, std::abs(h.samples[i] - std::sin(2 * std::numbers::pi * f.point(i) / width)));
    EXPECT_LT(worst, 2e-2);
}

TEST(ShiftAverage, ZeroInput)
{
    const SampledFunction zero = SampledFunction::from_function(0.0, 1.0, 64, [](double) { return Complex(0.0); });
    const ShiftAverageResult r = shift_average_hilbert(zero, 20, 1);
    for (const Complex& v : r.approx.samples) EXPECT_EQ(v, Complex(0.0));
    EXPECT_EQ(r.rel_error, 0.0);
}

TEST(ShiftAverage, BumpIsCloseToScaledHilbert)
{
    const SampledFunction f =
        SampledFunction::from_function(0.0, 1.0, 512, [](double x) { return Complex(bump(x, 0.5, 0.25)); });
    ASSERT_TRUE(f.supported_inside());
    const ShiftAverageResult r = shift_average_hilbert(f, 2000, 1, 4);
    EXPECT_LE(r.rel_error, 0.10);
    EXPECT_GT(r.fitted_scale, 0.0);
    EXPECT_THROW(shift_average_hilbert(SampledFunction::from_function(0, 1, 100, [](double) { return Complex(1); }), 4, 1),
                 ShapeMismatch);
}

TEST(ShiftAverage, DoublingGridsDoesNotHurtOnPairedSeeds)
{
    const SampledFunction f =
        SampledFunction::from_function(0.0, 1.0, 256, [](double x) { return Complex(bump(x, 0.45, 0.3)); });
    double sum_diff = 0.0, sum_sq = 0.0;
    const int seeds = 8;
    for (int s = 0; s < seeds; ++s) {
        // Grid g of a run depends only on (seed, g), so the larger run
        // contains the smaller one.
        const double small = shift_average_hilbert(f, 100, 500 + static_cast<std::uint64_t>(s), 4).rel_error;
        const double large = shift_average_hilbert(f, 200, 500 + static_cast<std::uint64_t>(s), 4).rel_error;
        sum_diff += large - small;
        sum_sq += (large - small) * (large - small);
    }
    const double mean = sum_diff / seeds;
    const double sd = std::sqrt(std::max(0.0, sum_sq / seeds - mean * mean));
    EXPECT_LE(mean, 2.0 * sd / std::sqrt(static_cast<double>(seeds)));
}
