#include <gtest/gtest.h>

#include <cmath>

#include "dyadic/errors.hpp"
#include "dyadic/field_norms.hpp"
#include "dyadic/matrix_field.hpp"
#include "oracles.hpp"

using namespace dyadic;

namespace {

MatrixField scalar_field(std::initializer_list<double> values)
{
    const int levels = static_cast<int>(std::log2(values.size()));
    MatrixField f = MatrixField::standard(1, levels, 1);
    std::size_t c = 0;
    for (double v : values) f.cell(c++)(0, 0) = v;
    return f;
}

MatrixField random_field(int n, int L, int d, std::uint64_t seed)
{
    Rng rng(seed);
    return MatrixField::random(DyadicGrid::standard(n, L), d, rng);
}

} // namespace

TEST(HaarAnalyze, TwoCellExample)
{
    const HaarCoefficients c = haar_analyze(scalar_field({1.0, 3.0}));
    EXPECT_NEAR(c.coarse()(0, 0).real(), 2.0, 1e-15);
    EXPECT_NEAR(c.at(0, 0, 1)(0, 0).real(), -1.0, 1e-15);
}

TEST(HaarAnalyze, ConstantHasOnlyAverage)
{
    Mat u(2, 2);
    u << Complex(1, 2), 3, Complex(0, -1), 4;
    const HaarCoefficients c = haar_analyze(MatrixField::constant(DyadicGrid::standard(2, 3), u));
    EXPECT_LT((c.coarse() - u).norm(), 1e-14);
    for (std::size_t i = 1; i < c.size(); ++i) EXPECT_LT(c.entry(i).norm(), 1e-14);
}

TEST(HaarAnalyze, MatchesCellSumOracle)
{
    for (int n : {1, 2}) {
        const MatrixField f = random_field(n, n == 1 ? 5 : 3, 3, 11 + static_cast<std::uint64_t>(n));
        const HaarCoefficients c = haar_analyze(f);
        EXPECT_EQ(c.size(), f.cell_count());
        for (int level = 0; level < f.levels(); ++level)
            for (std::size_t q = 0; q < (std::size_t{1} << (level * n)); ++q)
                for (unsigned theta = 1; theta < (1u << n); ++theta)
                    EXPECT_LT((c.at(level, q, theta) - oracle::haar_coefficient(f, level, q, theta)).norm(), 1e-12);
    }
}

TEST(HaarSynthesize, RoundTripAcrossShapes)
{
    for (int n : {1, 2})
        for (int L : {1, 4, 8}) {
            if (n == 2 && L > 5) continue;
            for (int d : {1, 8}) {
                const MatrixField f = random_field(n, L, d, static_cast<std::uint64_t>(100 * n + 10 * L + d));
                EXPECT_LE(max_abs_diff(haar_synthesize(haar_analyze(f)), f), 1e-12);
            }
        }
}

TEST(HaarSynthesize, RoundTripOnShiftedGrid)
{
    auto grid = DyadicGrid::shifted(2, 4, std::make_shared<const ShiftStream>(sample_shift(3, 4, 2)));
    Rng rng(3);
    const MatrixField f = MatrixField::random(grid, 4, rng);
    EXPECT_LE(max_abs_diff(haar_synthesize(haar_analyze(f)), f), 1e-12);
}

TEST(HaarSynthesize, ZeroAndBasisVector)
{
    auto grid = DyadicGrid::standard(2, 3);
    const MatrixField zero(grid, 2);
    EXPECT_EQ(haar_synthesize(haar_analyze(zero)).max_abs(), 0.0);

    HaarCoefficients c(grid, 2);
    c.at(1, 2, 3) = Mat::Identity(2, 2);
    const MatrixField f = haar_synthesize(c);
    for (std::size_t cell = 0; cell < f.cell_count(); ++cell) {
        const double h = oracle::haar_at(2, 3, 1, 2, 3, cell);
        EXPECT_LT((f.cell(cell) - h * Mat::Identity(2, 2)).norm(), 1e-14);
    }
}

TEST(HaarSynthesize, LayoutMismatchThrows)
{
    auto grid = DyadicGrid::standard(1, 3);
    EXPECT_THROW(haar_synthesize(HaarCoefficients(grid, 2, std::vector<Complex>(5))), LayoutMismatch);
}

TEST(CondExpect, ExamplesAndTowerProperty)
{
    const MatrixField e0 = cond_expect(scalar_field({1.0, 3.0}), 0);
    EXPECT_NEAR(e0.cell(0)(0, 0).real(), 2.0, 1e-15);
    EXPECT_NEAR(e0.cell(1)(0, 0).real(), 2.0, 1e-15);

    const MatrixField f = random_field(2, 4, 2, 5);
    EXPECT_THROW(cond_expect(f, 5), LevelOutOfRange);
    EXPECT_THROW(cond_expect(f, -1), LevelOutOfRange);
    EXPECT_LE(max_abs_diff(cond_expect(f, 4), f), 0.0);
    for (int j = 0; j <= 4; ++j) {
        EXPECT_LE(max_abs_diff(cond_expect(f, j), oracle::average(f, j)), 1e-12);
        EXPECT_TRUE(is_measurable(cond_expect(f, j), j, 1e-12));
        for (int k = 0; k <= 4; ++k)
            EXPECT_LE(max_abs_diff(cond_expect(cond_expect(f, k), j), oracle::average(f, std::min(j, k))), 1e-12);
    }
}

TEST(CondExpect, SelfAdjointAndModuleMap)
{
    const MatrixField f = random_field(1, 6, 3, 8);
    const MatrixField g = random_field(1, 6, 3, 9);
    Rng rng(10);
    const Mat u = rng.matrix(3);
    for (int k = 0; k <= 6; ++k) {
        EXPECT_LT(std::abs(pairing(cond_expect(g, k), f) - pairing(g, cond_expect(f, k))), 1e-12);
        EXPECT_LE(max_abs_diff(cond_expect(left_multiply(u, f), k), left_multiply(u, cond_expect(f, k))), 1e-12);
    }
}

TEST(MartDiff, ConstantHaarAndTelescoping)
{
    auto grid = DyadicGrid::standard(1, 4);
    const MatrixField constant = MatrixField::constant(grid, Mat::Constant(2, 2, Complex(1, -1)));
    for (int k = 1; k <= 4; ++k) EXPECT_LE(mart_diff(constant, k).max_abs(), 1e-15);

    const MatrixField h = haar_function(grid, 0, 0, 1, Mat::Identity(2, 2));
    EXPECT_LE(max_abs_diff(mart_diff(h, 1), h), 1e-15);
    for (int k = 2; k <= 4; ++k) EXPECT_LE(mart_diff(h, k).max_abs(), 1e-15);

    const MatrixField f = random_field(2, 3, 3, 17);
    MatrixField sum = cond_expect(f, 0);
    for (int k = 1; k <= 3; ++k) sum += mart_diff(f, k);
    EXPECT_LE(max_abs_diff(sum, f), 1e-12);
    EXPECT_THROW(mart_diff(f, 0), LevelOutOfRange);
}

TEST(Pairing, PositivityOrthogonalityParseval)
{
    const MatrixField f = random_field(2, 3, 2, 21);
    const MatrixField g = random_field(2, 3, 2, 22);
    EXPECT_GE(pairing(f, f).real(), 0.0);
    EXPECT_NEAR(pairing(f, f).imag(), 0.0, 1e-14);
    EXPECT_LT(std::abs(pairing(g, f) - std::conj(pairing(f, g))), 1e-13);
    EXPECT_LT(std::abs(pairing(g, Complex(0, 2) * f) - Complex(0, 2) * pairing(g, f)), 1e-13);
    for (int j = 1; j <= 3; ++j)
        for (int k = 1; k <= 3; ++k)
            if (j != k) EXPECT_LT(std::abs(pairing(mart_diff(f, j), mart_diff(g, k))), 1e-13);

    const HaarCoefficients c = haar_analyze(f);
    double energy = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) energy += c.entry(i).squaredNorm();
    double direct = 0.0;
    for (std::size_t cell = 0; cell < f.cell_count(); ++cell) direct += f.cell(cell).squaredNorm();
    direct *= f.cell_volume();
    EXPECT_NEAR(energy / direct, 1.0, 1e-10);
    EXPECT_NEAR(l2_norm_sq(f) / direct, 1.0, 1e-12);

    EXPECT_THROW(pairing(f, random_field(2, 3, 3, 1)), ShapeMismatch);
}

TEST(LpNorm, IdentityHomogeneityAndOracle)
{
    auto grid = DyadicGrid::standard(1, 3);
    const MatrixField id = MatrixField::identity(grid, 2);
    for (double p : {1.0, 1.5, 2.0, 4.0}) EXPECT_NEAR(lp_norm(id, p), std::pow(2.0, 1.0 / p), 1e-14);
    EXPECT_NEAR(lp_norm(id, INFINITY), 1.0, 1e-14);
    EXPECT_THROW(lp_norm(id, 0.5), InvalidExponent);

    const MatrixField f = random_field(2, 3, 3, 31);
    for (double p : {1.0, 2.0, 3.0, 4.0}) {
        EXPECT_NEAR(lp_norm(Complex(-2, 1) * f, p), std::sqrt(5.0) * lp_norm(f, p), 1e-12);
        EXPECT_NEAR(lp_norm(f, p), oracle::lp(f, p), 1e-12);
    }
    EXPECT_NEAR(lp_norm(f, 2.0), std::sqrt(pairing(f, f).real()), 1e-12);
    double sup = 0.0;
    for (std::size_t c = 0; c < f.cell_count(); ++c) sup = std::max(sup, oracle::op_norm(f.cell(c)));
    EXPECT_NEAR(lp_norm(f, INFINITY), sup, 1e-12);
}

TEST(HardyColNorm, Examples)
{
    auto grid = DyadicGrid::standard(1, 5);
    EXPECT_EQ(hardy_col_norm(MatrixField::identity(grid, 2), 2.0), 0.0);

    const MatrixField f = random_field(2, 3, 3, 41);
    EXPECT_NEAR(hardy_col_norm(f, 2.0), std::sqrt(l2_norm_sq(f - cond_expect(f, 0))), 1e-10);

    const MatrixField d1 = mart_diff(random_field(1, 5, 3, 42), 1);
    for (double p : {1.0, 2.0, 4.0}) EXPECT_NEAR(hardy_col_norm(d1, p), lp_norm(d1, p), 1e-10);
    EXPECT_THROW(hardy_col_norm(f, 0.9), InvalidExponent);
}

TEST(BmoMart, ExamplesAndOracle)
{
    auto grid = DyadicGrid::standard(1, 4);
    EXPECT_EQ(bmo_mart_norm(MatrixField::identity(grid, 2)), 0.0);
    EXPECT_NEAR(bmo_mart_norm(haar_function(grid, 0, 0, 1, Mat::Identity(2, 2))), 1.0, 1e-14);

    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const MatrixField f = random_field(1 + static_cast<int>(seed % 2), 3, 2, 50 + seed);
        double expected = 0.0;
        for (int k = 1; k <= f.levels(); ++k) {
            const MatrixField e = oracle::average(f, k - 1);
            const MatrixField dev = MatrixField::from_function(f.grid(), 1, [&](std::size_t c) {
                return Mat::Constant(1, 1, std::pow(oracle::op_norm(f.cell(c) - e.cell(c)), 2));
            });
            expected = std::max(expected, std::sqrt(oracle::average(dev, k).max_abs()));
        }
        EXPECT_NEAR(bmo_mart_norm(f), expected, 1e-12);
        EXPECT_LE(bmo_mart_norm(f), 2.0 * lp_norm(f, INFINITY));
    }
}

TEST(BmoBourgain, ExamplesAndOracle)
{
    auto grid = DyadicGrid::standard(1, 4);
    EXPECT_EQ(bmo_bourgain_norm(MatrixField::identity(grid, 2), *grid), 0.0);
    EXPECT_NEAR(bmo_bourgain_norm(haar_function(grid, 0, 0, 1, Mat::Identity(2, 2)), *grid), 1.0, 1e-14);

    const MatrixField f = random_field(2, 3, 2, 61);
    const double base = bmo_bourgain_norm(f, *f.grid());
    EXPECT_NEAR(base, oracle::bmo_standard(f), 1e-12);
    Rng rng(62);
    const MatrixField shifted = f + MatrixField::constant(f.grid(), rng.matrix(2));
    EXPECT_NEAR(bmo_bourgain_norm(shifted, *f.grid()), base, 1e-12);
    EXPECT_NEAR(bmo_bourgain_norm(f, offset_system(*f.grid())), base, 1e-12);
}

TEST(BmoCube, DominatesAndAgreesWithIntervalScan)
{
    auto grid = DyadicGrid::standard(1, 5);
    EXPECT_EQ(bmo_cube_norm(MatrixField::identity(grid, 2)), 0.0);
    // Factor 2^{n/2} c with c = 2 for n = 1.
    const double factor = 2.0 * std::sqrt(2.0);
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const MatrixField f = random_field(1, 3 + static_cast<int>(seed % 4), 2, 70 + seed);
        const double cube = bmo_cube_norm(f);
        EXPECT_GE(cube + 1e-12, bmo_bourgain_norm(f, *f.grid()));
        const double scan = oracle::bmo_all_intervals_1d(f);
        EXPECT_LE(cube, factor * scan);
        EXPECT_LE(scan, factor * cube);
    }
    const MatrixField g = random_field(2, 3, 2, 80);
    EXPECT_GE(bmo_cube_norm(g) + 1e-12, bmo_bourgain_norm(g, *g.grid()));
}

TEST(BmoVariants, MutuallyBoundedOnRandomSuite)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const MatrixField f = random_field(1 + static_cast<int>(seed % 2), 3, 2, 90 + seed);
        const double ratio = bmo_mart_norm(f) / bmo_bourgain_norm(f, *f.grid());
        EXPECT_GT(ratio, 0.25);
        EXPECT_LT(ratio, 4.0);
    }
}

TEST(Doob, LowerEnvelope)
{
    for (double p : {1.0, 2.0, 4.0}) {
        const MatrixField f = random_field(2, 3, 2, 99);
        const double doob = doob_maximal(f, p);
        EXPECT_TRUE(std::isfinite(doob));
        EXPECT_GE(doob, std::pow(lp_norm(f, p), p) / std::pow(2.0, p));
        EXPECT_GE(doob + 1e-12, std::pow(lp_norm(f, p), p));
    }
}

TEST(FieldAlgebra, PointwiseOperations)
{
    const MatrixField a = random_field(1, 3, 2, 1);
    const MatrixField b = random_field(1, 3, 2, 2);
    const MatrixField ab = product(a, b);
    const MatrixField adj = a.adjoint();
    for (std::size_t c = 0; c < a.cell_count(); ++c) {
        EXPECT_LT((ab.cell(c) - a.cell(c) * b.cell(c)).norm(), 1e-14);
        EXPECT_EQ((adj.cell(c) - a.cell(c).adjoint()).norm(), 0.0);
    }
    EXPECT_LE(max_abs_diff((a + b) - b, a), 1e-15);
    EXPECT_THROW(product(a, random_field(1, 4, 2, 3)), ShapeMismatch);
}
