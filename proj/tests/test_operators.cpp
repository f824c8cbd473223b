#include <gtest/gtest.h>

#include <cmath>

#include "dyadic/compatibility.hpp"
#include "dyadic/errors.hpp"
#include "dyadic/field_norms.hpp"
#include "dyadic/figiel.hpp"
#include "dyadic/operators.hpp"
#include "dyadic/perfect.hpp"
#include "dyadic/shift.hpp"
#include "dyadic/tensor.hpp"
#include "oracles.hpp"

using namespace dyadic;

namespace {

MatrixField random_field(const GridHandle& grid, int d, std::uint64_t seed)
{
    Rng rng(seed);
    return MatrixField::random(grid, d, rng);
}

/// Haar coefficient matrix times the Haar function, added into `out`.
void add_haar_term(MatrixField& out, int level, std::size_t cube, unsigned theta, const Mat& coefficient)
{
    for (std::size_t c = 0; c < out.cell_count(); ++c) {
        const double h = oracle::haar_at(out.dim(), out.levels(), level, cube, theta, c);
        if (h != 0.0) out.cell(c) += h * coefficient;
    }
}

/// Average of f over the standard cube (level, cube).
Mat cube_average(const MatrixField& f, int level, std::size_t cube)
{
    return oracle::haar_coefficient(f, level, cube, 0) * std::pow(2.0, 0.5 * level * f.dim());
}

std::size_t cubes_at(int dim, int level) { return std::size_t{1} << (level * dim); }

} // namespace

TEST(Paraproduct, Examples)
{
    auto grid = DyadicGrid::standard(2, 3);
    const MatrixField f = random_field(grid, 2, 1);
    Rng rng(2);
    const Mat c = rng.matrix(2);
    EXPECT_LE(paraproduct(MatrixField::constant(grid, c), f).max_abs(), 1e-14);
    const MatrixField b = random_field(grid, 2, 3);
    EXPECT_LE(max_abs_diff(paraproduct(b, MatrixField::constant(grid, c)),
                           right_multiply(b - cond_expect(b, 0), c)),
              1e-13);
    EXPECT_THROW(paraproduct(b, random_field(grid, 3, 4)), ShapeMismatch);
}

TEST(Paraproduct, MatchesCubeByCubeSum)
{
    for (int d : {1, 3}) {
        auto grid = DyadicGrid::standard(1, 6);
        const MatrixField b = random_field(grid, d, 10 + static_cast<std::uint64_t>(d));
        const MatrixField f = random_field(grid, d, 20 + static_cast<std::uint64_t>(d));
        MatrixField expected(grid, d);
        for (int level = 0; level < 6; ++level)
            for (std::size_t q = 0; q < cubes_at(1, level); ++q) {
                const Mat fq = cube_average(f, level, q);
                add_haar_term(expected, level, q, 1, oracle::haar_coefficient(b, level, q, 1) * fq);
            }
        EXPECT_LE(max_abs_diff(paraproduct(b, f), expected), 1e-11);
    }
}

TEST(ParaproductAdjoint, PairingAndTrivialCases)
{
    auto grid = DyadicGrid::standard(2, 3);
    const MatrixField b = random_field(grid, 3, 1);
    const MatrixField f = random_field(grid, 3, 2);
    const MatrixField g = random_field(grid, 3, 3);
    EXPECT_LT(std::abs(pairing(g, paraproduct(b, f)) - pairing(paraproduct_adjoint(b.adjoint(), g), f)), 1e-10);
    EXPECT_LE(paraproduct_adjoint(MatrixField::identity(grid, 3), f).max_abs(), 1e-14);
    EXPECT_LE(paraproduct_adjoint(b, MatrixField::identity(grid, 3)).max_abs(), 1e-14);
}

TEST(HaarMultiplier, SplittingAndHomogeneity)
{
    auto grid = DyadicGrid::standard(2, 3);
    const MatrixField b = random_field(grid, 4, 5);
    const MatrixField f = random_field(grid, 4, 6);
    EXPECT_LE(haar_multiplier(MatrixField::identity(grid, 4), f).max_abs(), 1e-14);
    EXPECT_LE(max_abs_diff(product(b, f), haar_multiplier(b, f) + r_operator(b, f)), 1e-11);
    const Complex lambda(0.5, -2.0);
    EXPECT_LE(max_abs_diff(haar_multiplier(lambda * b, f), lambda * haar_multiplier(b, f)), 1e-12);

    const MatrixField g = random_field(grid, 4, 7);
    EXPECT_LT(std::abs(pairing(g, haar_multiplier(b, f)) - pairing(haar_multiplier_adjoint(b, g), f)), 1e-10);
}

TEST(ROperator, ExamplesAndHaarForm)
{
    auto grid = DyadicGrid::standard(1, 5);
    Rng rng(8);
    const Mat c = rng.matrix(2);
    const MatrixField f = random_field(grid, 2, 9);
    const MatrixField b = random_field(grid, 2, 10);
    EXPECT_LE(max_abs_diff(r_operator(MatrixField::constant(grid, c), f), left_multiply(c, f)), 1e-12);
    EXPECT_LE(max_abs_diff(r_operator(b, MatrixField::constant(grid, c)), left_multiply(cube_average(b, 0, 0), MatrixField::constant(grid, c))), 1e-12);

    for (int n : {1, 2}) {
        auto g2 = DyadicGrid::standard(n, n == 1 ? 5 : 3);
        const MatrixField bb = random_field(g2, 2, 11);
        const MatrixField ff = random_field(g2, 2, 12);
        MatrixField expected = MatrixField::constant(g2, cube_average(bb, 0, 0) * cube_average(ff, 0, 0));
        for (int level = 0; level < g2->levels(); ++level)
            for (std::size_t q = 0; q < cubes_at(n, level); ++q)
                for (unsigned theta = 1; theta < (1u << n); ++theta)
                    add_haar_term(expected, level, q, theta,
                                  cube_average(bb, level, q) * oracle::haar_coefficient(ff, level, q, theta));
        EXPECT_LE(max_abs_diff(r_operator(bb, ff), expected), 1e-11);
    }
}

TEST(MartTransform, ExamplesAndIsometry)
{
    auto grid = DyadicGrid::standard(2, 3);
    const MatrixField f = random_field(grid, 3, 13);
    const MatrixField centered = f - cond_expect(f, 0);
    EXPECT_LE(max_abs_diff(mart_transform(AdaptedSequence::constant(grid, Mat::Identity(3, 3)), f), centered), 1e-12);
    EXPECT_LE(mart_transform(AdaptedSequence::constant(grid, Mat::Zero(3, 3)), f).max_abs(), 0.0);

    Rng rng(14);
    const AdaptedSequence unitary = AdaptedSequence::random_unitary(grid, 3, rng);
    EXPECT_NEAR(std::sqrt(l2_norm_sq(mart_transform(unitary, f))), std::sqrt(l2_norm_sq(centered)), 1e-10);

    for (int trial = 0; trial < 20; ++trial) {
        const AdaptedSequence xi = AdaptedSequence::random(grid, 3, rng);
        EXPECT_LE(std::sqrt(l2_norm_sq(mart_transform(xi, f))), xi.sup_norm() * std::sqrt(l2_norm_sq(centered)) * (1 + 1e-12));
    }

    const MatrixField g = random_field(grid, 3, 15);
    const AdaptedSequence xi = AdaptedSequence::random(grid, 3, rng);
    EXPECT_LT(std::abs(pairing(g, mart_transform(xi, f)) - pairing(mart_transform_adjoint(xi, g), f)), 1e-10);
}

TEST(MartTransform, RejectsNonAdaptedSequence)
{
    auto grid = DyadicGrid::standard(1, 3);
    std::vector<MatrixField> terms;
    for (int k = 0; k < 3; ++k) terms.push_back(MatrixField::identity(grid, 2));
    terms[1] = random_field(grid, 2, 1);
    EXPECT_THROW(AdaptedSequence{terms}, NotAdapted);
}

TEST(SummationIdentity, EveryLevel)
{
    auto grid = DyadicGrid::standard(1, 6);
    const MatrixField f = random_field(grid, 3, 16);
    const MatrixField g = random_field(grid, 3, 17);
    for (int ell = 1; ell <= 6; ++ell)
        EXPECT_LE(max_abs_diff(summation_lhs(f, g, ell), summation_rhs(f, g, ell)), 1e-11);
}

TEST(Perfect, ZeroAndConstantInput)
{
    auto grid = DyadicGrid::standard(1, 5);
    const MatrixField f = random_field(grid, 2, 18);
    EXPECT_LE(apply_perfect(PerfectDyadicCZO(grid, 2), f).max_abs(), 0.0);

    Rng rng(19);
    const PerfectDyadicCZO t = PerfectDyadicCZO::random(grid, 2, rng, false);
    const MatrixField one = MatrixField::identity(grid, 2);
    EXPECT_LE(max_abs_diff(apply_perfect(t, one), t.b_col() - cond_expect(t.b_col(), 0)), 1e-12);
    EXPECT_LE(max_abs_diff(perfect_coarse_term(t, one), cond_expect(t.b_col(), 0)), 1e-12);
}

TEST(Perfect, TripleDecompositionForSymmetricOperators)
{
    auto grid = DyadicGrid::standard(1, 6);
    Rng rng(20);
    for (int trial = 0; trial < 5; ++trial) {
        const PerfectDyadicCZO t = PerfectDyadicCZO::random(grid, 4, rng, true);
        ASSERT_TRUE(t.is_symmetric());
        const MatrixField f = MatrixField::random(grid, 4, rng);
        const MatrixField rhs = mart_transform(xi_sequence(t), f) + haar_multiplier(t.b_col(), f);
        EXPECT_LE(max_abs_diff(apply_perfect(t, f), rhs), 1e-10);
    }
}

TEST(Perfect, BracketTermsMatchOracle)
{
    auto grid = DyadicGrid::standard(1, 5);
    Rng rng(21);
    const PerfectDyadicCZO t = PerfectDyadicCZO::random(grid, 2, rng, false);
    const MatrixField f = MatrixField::random(grid, 2, rng);
    const MatrixField g = MatrixField::random(grid, 2, rng);

    Complex diagonal{}, adjoint_para{}, para{};
    for (int level = 0; level < 5; ++level)
        for (std::size_t q = 0; q < cubes_at(1, level); ++q) {
            const Mat gi = oracle::haar_coefficient(g, level, q, 1);
            const Mat fi = oracle::haar_coefficient(f, level, q, 1);
            diagonal += (gi.adjoint() * t.xi(level, q, 1, 1) * fi).trace();
            // h_I^2 = |I|^{-1} 1_I, so the bracket pairs b_I f_I with the average of g on I.
            const Mat bi = oracle::haar_coefficient(t.b_row(), level, q, 1);
            adjoint_para += (cube_average(g, level, q).adjoint() * bi * fi).trace();
            const Mat bc = oracle::haar_coefficient(t.b_col(), level, q, 1);
            para += (gi.adjoint() * bc * cube_average(f, level, q)).trace();
        }
    const PerfectPairing terms = perfect_pairing_terms(t, f, g);
    EXPECT_LT(std::abs(terms.diagonal - diagonal), 1e-10);
    EXPECT_LT(std::abs(terms.adjoint_paraproduct - adjoint_para), 1e-10);
    EXPECT_LT(std::abs(terms.paraproduct - para), 1e-10);
    const Complex direct = pairing(g, apply_perfect(t, f));
    EXPECT_LT(std::abs(terms.total() - direct), 1e-10 * std::max(1.0, std::abs(direct)));
}

TEST(Perfect, CellKernelRepresentation)
{
    for (int n : {1, 2}) {
        auto grid = DyadicGrid::standard(n, n == 1 ? 5 : 3);
        Rng rng(22 + static_cast<std::uint64_t>(n));
        for (int trial = 0; trial < 5; ++trial) {
            const CellKernel k = CellKernel::random_perfect(grid, 2, rng);
            const PerfectDyadicCZO t = from_cell_kernel(k);
            const MatrixField f = MatrixField::random(grid, 2, rng);
            EXPECT_LE(max_abs_diff(apply_perfect(t, f) + perfect_coarse_term(t, f), k.apply(f)), 1e-10);
            EXPECT_LE(max_abs_diff(apply_perfect(t.adjoint(), f) + perfect_coarse_term(t.adjoint(), f),
                                   k.adjoint().apply(f)),
                      1e-10);
        }
    }
}

TEST(Tensor, IdentitySingleEntryAndAdjoint)
{
    auto grid = DyadicGrid::standard(2, 3);
    const MatrixField f = random_field(grid, 2, 30);
    EXPECT_LE(max_abs_diff(apply_tensor(HaarTensorOperator::identity(grid, 2), f), f), 1e-12);

    Rng rng(31);
    const Mat u = rng.matrix(2);
    HaarTensorOperator single(grid, 2);
    const std::size_t row = haar_index(2, 1, 3, 2);
    const std::size_t col = haar_index(2, 2, 9, 3);
    single.set(row, col, u);
    MatrixField expected(grid, 2);
    add_haar_term(expected, 1, 3, 2, u * oracle::haar_coefficient(f, 2, 9, 3));
    EXPECT_LE(max_abs_diff(apply_tensor(single, f), expected), 1e-12);

    EXPECT_THROW(single.add(grid->cell_count(), 0, u), EntryOutOfRange);
    EXPECT_THROW(single.add(0, 0, Mat::Zero(3, 3)), EntryOutOfRange);

    const HaarTensorOperator t = random_banded_tensor(grid, 2, 1, 0.1, rng);
    const MatrixField g = random_field(grid, 2, 32);
    EXPECT_LT(std::abs(pairing(g, apply_tensor(t, f)) - std::conj(pairing(f, apply_tensor(t.adjoint(), g)))), 1e-10);
    EXPECT_LE(t.band(), 1);
}

TEST(Tensor, PerfectOperatorTensorAgrees)
{
    auto grid = DyadicGrid::standard(1, 5);
    Rng rng(33);
    const PerfectDyadicCZO t = PerfectDyadicCZO::random(grid, 3, rng, false);
    const MatrixField f = MatrixField::random(grid, 3, rng);
    EXPECT_LE(max_abs_diff(apply_tensor(to_tensor(t), f), apply_perfect(t, f)), 1e-10);
}

TEST(Figiel, ZeroPerfectAndBanded)
{
    auto grid = DyadicGrid::standard(1, 5);
    Rng rng(34);
    const MatrixField f = MatrixField::random(grid, 2, rng);
    const MatrixField g = MatrixField::random(grid, 2, rng);

    const FigielTerms zero = figiel_terms(HaarTensorOperator(grid, 2), f, g);
    EXPECT_EQ(std::abs(zero.total()), 0.0);

    const FigielTerms perfect = figiel_terms(to_tensor(PerfectDyadicCZO::random(grid, 2, rng, false)), f, g);
    for (const auto* by_m : {&perfect.a_by_m, &perfect.b0_by_m, &perfect.c0_by_m})
        for (const auto& [m, value] : *by_m)
            if (m != Index{0}) EXPECT_LT(std::abs(value), 1e-13);

    for (int trial = 0; trial < 5; ++trial) {
        const HaarTensorOperator t = random_banded_tensor(grid, 2, 2, 0.05, rng);
        const FigielTerms terms = figiel_terms(t, f, g);
        const Complex direct = pairing(g, apply_tensor(t, f));
        EXPECT_LT(std::abs(terms.total() - direct), 1e-10 * std::max(1.0, std::abs(direct)));
        Complex a{};
        for (const auto& [m, value] : terms.a_by_m) a += value;
        EXPECT_LT(std::abs(a - terms.a), 1e-12);
    }
}

TEST(Compatibility, ClassCountAndPairAudit)
{
    const GoodBadParams params{2, 0.5, 8};
    auto shift = std::make_shared<const ShiftStream>(sample_shift(35, 16, 1));
    const std::vector<DyadicCube> good = good_cubes(shift, 1, 7, params);
    ASSERT_FALSE(good.empty());
    Rng rng(36);
    int audited = 0;
    for (std::int64_t m0 : {0, 1, -3, 5, 12}) {
        const std::vector<std::int64_t> m{m0};
        const int depth = compatibility_depth(m, params);
        const auto classes = compatibility_partition(m, params, good);
        EXPECT_EQ(classes.size(), static_cast<std::size_t>(2 * (1 + depth)));
        std::size_t total = 0;
        std::vector<const CompatibilityClass*> populated;
        for (const auto& cls : classes) {
            total += cls.cubes.size();
            if (cls.cubes.size() > 1) populated.push_back(&cls);
        }
        EXPECT_EQ(total, good.size());
        ASSERT_FALSE(populated.empty());
        for (int pair = 0; pair < 200; ++pair) {
            const auto& cubes = populated[rng.below(populated.size())]->cubes;
            const DyadicCube& i = cubes[rng.below(cubes.size())];
            const DyadicCube& j = cubes[rng.below(cubes.size())];
            EXPECT_TRUE(m_compatible(i, j, m)) << "m " << m0 << " I " << i.level() << ":" << i.index()[0]
                                               << " J " << j.level() << ":" << j.index()[0];
            ++audited;
        }
    }
    EXPECT_EQ(audited, 1000);
}

TEST(Compatibility, TwoDimensionalTranslations)
{
    const GoodBadParams params{2, 0.5, 6};
    auto shift = std::make_shared<const ShiftStream>(sample_shift(37, 12, 2));
    const std::vector<DyadicCube> good = good_cubes(shift, 2, 5, params);
    Rng rng(38);
    for (const std::vector<std::int64_t>& m : {std::vector<std::int64_t>{1, 0}, {2, -3}, {4, 4}}) {
        const auto classes = compatibility_partition(m, params, good);
        for (int pair = 0; pair < 100; ++pair) {
            const auto& cls = classes[rng.below(classes.size())];
            if (cls.cubes.empty()) continue;
            EXPECT_TRUE(m_compatible(cls.cubes[rng.below(cls.cubes.size())], cls.cubes[rng.below(cls.cubes.size())], m));
        }
    }
}

TEST(Shift, SingleCoefficientAndConstant)
{
    auto grid = DyadicGrid::standard(1, 4);
    Rng rng(40);
    const DyadicShift s = DyadicShift::random(grid, rng);
    const Mat u = rng.matrix(2);
    for (int level = 1; level < 4; ++level)
        for (std::size_t q = 0; q < cubes_at(1, level); ++q) {
            MatrixField expected(grid, 2);
            add_haar_term(expected, level - 1, q / 2, 1, s.sign(level, q, 1) * u);
            EXPECT_LE(max_abs_diff(dyadic_shift(s, haar_function(grid, level, q, 1, u)), expected), 1e-13);
        }
    EXPECT_LE(dyadic_shift(s, haar_function(grid, 0, 0, 1, u)).max_abs(), 0.0);
    EXPECT_LE(dyadic_shift(s, MatrixField::constant(grid, u)).max_abs(), 1e-14);
}

TEST(Shift, SingleCoefficientInputsGainExactlySqrtOfSignatureCount)
{
    for (int n : {1, 2}) {
        auto grid = DyadicGrid::standard(n, 3);
        Rng rng(41);
        const DyadicShift s = DyadicShift::random(grid, rng);
        const double factor = std::sqrt(static_cast<double>((1 << n) - 1));
        for (int level = 1; level < 3; ++level) {
            const MatrixField h = haar_function(grid, level, rng.below(cubes_at(n, level)), kTheta0, rng.matrix(2));
            EXPECT_NEAR(std::sqrt(l2_norm_sq(dyadic_shift(s, h))), factor * std::sqrt(l2_norm_sq(h)), 1e-12);
        }
    }
}

TEST(Shift, SiblingInputsAddCoherentlyAtTheParent)
{
    // Siblings with equal signs land on the same parent coefficient, so the
    // gain over f reaches sqrt(2^n (2^n - 1)) rather than sqrt(2^n - 1).
    for (int n : {1, 2}) {
        auto grid = DyadicGrid::standard(n, 3);
        const DyadicShift s(grid);
        const unsigned children = 1u << n;
        MatrixField f(grid, 1);
        for (unsigned e = 0; e < children; ++e)
            f += haar_function(grid, 1, grid->child_of(0, 0, e), kTheta0, Mat::Identity(1, 1));
        const double gain = std::sqrt(l2_norm_sq(dyadic_shift(s, f)) / l2_norm_sq(f));
        EXPECT_NEAR(gain, std::sqrt(static_cast<double>(children * (children - 1))), 1e-12);
        EXPECT_GT(gain, std::sqrt(static_cast<double>(children - 1)));

        Rng rng(46);
        const DyadicShift random = DyadicShift::random(grid, rng);
        for (int trial = 0; trial < 10; ++trial) {
            const MatrixField g = MatrixField::random(grid, 2, rng);
            EXPECT_LE(std::sqrt(l2_norm_sq(dyadic_shift(random, g))),
                      gain * std::sqrt(l2_norm_sq(g)) * (1 + 1e-12));
        }
    }
}

TEST(Commutator, ConstantSymbolScalarOracleAndLinearity)
{
    auto grid = DyadicGrid::standard(1, 5);
    Rng rng(42);
    const DyadicShift s = DyadicShift::random(grid, rng);
    const MatrixField f = MatrixField::random(grid, 2, rng);
    EXPECT_LE(commutator(s, MatrixField::identity(grid, 2), f).max_abs(), 1e-13);
    EXPECT_LE(commutator_formula(s, MatrixField::identity(grid, 2), f).max_abs(), 1e-13);

    const MatrixField b1 = MatrixField::random(grid, 1, rng);
    const MatrixField hj = haar_function(grid, 3, 5, 1, Mat::Identity(1, 1));
    MatrixField b_hj = product(b1, hj);
    MatrixField shifted(grid, 1);
    add_haar_term(shifted, 2, 2, 1, s.sign(3, 5, 1) * Mat::Identity(1, 1));
    const MatrixField expected = dyadic_shift(s, b_hj) - product(b1, shifted);
    EXPECT_LE(max_abs_diff(commutator(s, b1, hj), expected), 1e-12);

    const MatrixField b = MatrixField::random(grid, 2, rng);
    const MatrixField f2 = MatrixField::random(grid, 2, rng);
    const Complex a(1.5, -0.5);
    EXPECT_LE(max_abs_diff(commutator(s, b, f + a * f2), commutator(s, b, f) + a * commutator(s, b, f2)), 1e-12);
    EXPECT_LE(max_abs_diff(commutator(s, a * b, f), a * commutator(s, b, f)), 1e-12);
}

TEST(Commutator, SplitsIntoMultiplierAndFormula)
{
    for (int n : {1, 2}) {
        auto grid = DyadicGrid::standard(n, n == 1 ? 6 : 3);
        Rng rng(43 + static_cast<std::uint64_t>(n));
        const DyadicShift s = DyadicShift::random(grid, rng);
        const MatrixField b = MatrixField::random(grid, 3, rng);
        const MatrixField f = MatrixField::random(grid, 3, rng);
        const MatrixField lambda_part = dyadic_shift(s, haar_multiplier(b, f)) - haar_multiplier(b, dyadic_shift(s, f));
        const MatrixField residual = commutator(s, b, f) - lambda_part - commutator_formula(s, b, f);
        EXPECT_LE(max_abs_diff(residual, commutator_coarse_term(s, b, f)), 1e-10);
    }
}

TEST(Commutator, OnlyParentPairsWithUnitCoefficients)
{
    auto grid = DyadicGrid::standard(1, 4);
    Rng rng(45);
    const DyadicShift s = DyadicShift::random(grid, rng);
    for (std::size_t col = 1; col < grid->cell_count(); ++col) {
        const HaarLabel from = haar_label(1, col);
        const HaarCoefficients image = haar_analyze(dyadic_shift(s, basis_field(grid, col, Mat::Identity(1, 1))));
        for (std::size_t row = 0; row < image.size(); ++row) {
            const double value = image.entry(row)(0, 0).real();
            if (std::abs(value) < 1e-12) continue;
            const HaarLabel to = haar_label(1, row);
            EXPECT_EQ(to.cube_level, from.cube_level - 1);
            EXPECT_EQ(to.cube, from.cube / 2);
            EXPECT_NEAR(std::abs(value), 1.0, 1e-12);
        }
    }
}
