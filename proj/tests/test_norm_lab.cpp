#include <gtest/gtest.h>

#include <cmath>

#include "dyadic/errors.hpp"
#include "dyadic/field_norms.hpp"
#include "dyadic/norm_lab.hpp"

using namespace dyadic;

namespace {

GridHandle grid_1d(int levels) { return DyadicGrid::standard(1, levels); }

} // namespace

TEST(OpNorm, IdentityByBothMethods)
{
    const LinearOperator id = identity_operator(grid_1d(4), 2);
    EXPECT_NEAR(op_norm(id).norm, 1.0, 1e-10);
    EXPECT_NEAR(op_norm(id, NormMethod::Dense).norm, 1.0, 1e-10);
    const Mat dense = materialize(id);
    EXPECT_LT((dense - Mat::Identity(dense.rows(), dense.cols())).norm(), 1e-12);
}

TEST(OpNorm, IdentityMartingaleTransformIsProjection)
{
    auto grid = grid_1d(4);
    const LinearOperator t = mart_transform_operator(AdaptedSequence::constant(grid, Mat::Identity(2, 2)));
    EXPECT_NEAR(op_norm(t).norm, 1.0, 1e-8);
    EXPECT_NEAR(op_norm(t, NormMethod::Dense).norm, 1.0, 1e-8);
}

TEST(OpNorm, PowerIterationMatchesDenseOnPerfectOperators)
{
    auto grid = grid_1d(4);
    Rng rng(7);
    for (int trial = 0; trial < 5; ++trial) {
        const LinearOperator t = perfect_operator(PerfectDyadicCZO::random(grid, 2, rng, trial % 2 == 0));
        const NormReport dense = op_norm(t, NormMethod::Dense);
        const NormReport power = op_norm(t, NormMethod::PowerIteration, 1e-12, 20000, 11);
        EXPECT_TRUE(power.converged);
        EXPECT_NEAR(power.norm / dense.norm, 1.0, 1e-6);
        EXPECT_LE(power.norm, dense.norm + 1e-8);
        for (std::size_t k = 1; k < power.history.size(); ++k)
            EXPECT_GE(power.history[k], power.history[k - 1] * (1 - 1e-12));
    }
}

TEST(OpNorm, ScalingAndAdjoint)
{
    auto grid = grid_1d(4);
    Rng rng(8);
    for (int trial = 0; trial < 4; ++trial) {
        const LinearOperator t = perfect_operator(PerfectDyadicCZO::random(grid, 2, rng, false));
        const Complex lambda(rng.normal(), rng.normal());
        const double base = op_norm(t, NormMethod::Dense).norm;
        EXPECT_NEAR(op_norm(t.scaled(lambda), NormMethod::Dense).norm / (std::abs(lambda) * base), 1.0, 1e-8);
        EXPECT_NEAR(op_norm(t.adjoint(), NormMethod::Dense).norm / base, 1.0, 1e-6);
        const NormReport p1 = op_norm(t.scaled(lambda), NormMethod::PowerIteration, 1e-12, 20000, 3);
        EXPECT_NEAR(p1.norm / (std::abs(lambda) * base), 1.0, 1e-6);
    }
}

TEST(OpNorm, DenseLimitAndZeroOperator)
{
    EXPECT_THROW(op_norm(identity_operator(grid_1d(11), 2), NormMethod::Dense), DimensionTooLarge);
    const NormReport zero = op_norm(zero_operator(grid_1d(3), 2));
    EXPECT_EQ(zero.norm, 0.0);
    EXPECT_TRUE(zero.converged);
}

TEST(LinearOperators, LinearityAndAdjointPairing)
{
    auto grid = DyadicGrid::standard(1, 4);
    Rng rng(9);
    const MatrixField b = MatrixField::random(grid, 2, rng);
    std::vector<LinearOperator> ops{
        paraproduct_operator(b),
        haar_multiplier_operator(b),
        mart_transform_operator(AdaptedSequence::random(grid, 2, rng)),
        perfect_operator(PerfectDyadicCZO::random(grid, 2, rng, false)),
        tensor_operator(random_banded_tensor(grid, 2, 1, 0.1, rng)),
        shift_operator(DyadicShift::random(grid, rng), 2),
    };
    for (const LinearOperator& t : ops) {
        EXPECT_LE(linearity_defect(t, rng), 1e-10) << t.name();
        const MatrixField f = MatrixField::random(grid, 2, rng);
        const MatrixField g = MatrixField::random(grid, 2, rng);
        EXPECT_LT(std::abs(pairing(g, t(f)) - pairing(t.apply_adjoint(g), f)), 1e-10) << t.name();
        const Mat dense = materialize(t);
        EXPECT_LT((materialize(t.adjoint()) - dense.adjoint()).norm(), 1e-10) << t.name();
    }
}

TEST(RatioSuite, DeterministicAndParallelInvariant)
{
    auto grid = grid_1d(4);
    const RatioFamily family = [grid](Rng& rng) {
        const MatrixField b = MatrixField::random(grid, 2, rng);
        const MatrixField f = MatrixField::random(grid, 2, rng);
        return RatioSample{haar_multiplier(b, f), f, bmo_mart_norm(b)};
    };
    const FieldNorm in = [](const MatrixField& f) { return lp_norm(f, 4.0); };
    const FieldNorm out = [](const MatrixField& f) { return hardy_col_norm(f, 4.0); };
    const RatioStats a = ratio_suite(family, in, out, 30, 99, 1);
    const RatioStats b = ratio_suite(family, in, out, 30, 99, 4);
    EXPECT_EQ(a.ratios, b.ratios);
    EXPECT_EQ(a.max, b.max);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.q99, b.q99);
    EXPECT_LE(a.q50, a.q90);
    EXPECT_LE(a.q90, a.max);
}

TEST(RatioSuite, ZeroFamilyAndDegenerateInputs)
{
    auto grid = grid_1d(3);
    const FieldNorm l2 = [](const MatrixField& f) { return lp_norm(f, 2.0); };
    const RatioStats zero = ratio_suite(
        [grid](Rng& rng) {
            const MatrixField f = MatrixField::random(grid, 2, rng);
            return RatioSample{MatrixField(grid, 2), f, 1.0};
        },
        l2, l2, 20, 1);
    EXPECT_EQ(zero.max, 0.0);
    EXPECT_EQ(zero.skipped, 0u);

    const RatioStats degenerate = ratio_suite(
        [grid](Rng&) { return RatioSample{MatrixField(grid, 2), MatrixField(grid, 2), 1.0}; }, l2, l2, 5, 1);
    EXPECT_EQ(degenerate.skipped, 5u);
    EXPECT_TRUE(degenerate.ratios.empty());
}

TEST(RatioSuite, MartingaleTransformAtPTwoIsContractive)
{
    auto grid = DyadicGrid::standard(1, 5);
    const RatioFamily family = [grid](Rng& rng) {
        const AdaptedSequence xi = AdaptedSequence::random(grid, 3, rng);
        const MatrixField f = MatrixField::random(grid, 3, rng);
        return RatioSample{mart_transform(xi, f), f - cond_expect(f, 0), xi.sup_norm()};
    };
    const FieldNorm l2 = [](const MatrixField& f) { return lp_norm(f, 2.0); };
    const RatioStats stats = ratio_suite(family, l2, l2, 50, 5, 2);
    EXPECT_LE(stats.max, 1.0 + 1e-8);
}

TEST(Growth, MonotoneUnderEmbedding)
{
    GrowthOptions options;
    options.levels = 3;
    options.random_candidates = 3;
    options.perturbation_steps = 6;
    options.tol = 1e-9;
    const std::vector<GrowthRow> rows = paraproduct_growth({1, 2, 4}, 17, options);
    ASSERT_EQ(rows.size(), 3u);
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GE(rows[i].ratio, rows[i - 1].ratio - 1e-9);
    for (const GrowthRow& row : rows) {
        EXPECT_GT(row.ratio, 0.0);
        EXPECT_GT(row.candidates, 0u);
    }
    const std::vector<GrowthRow> again = paraproduct_growth({1, 2, 4}, 17, options);
    for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(rows[i].ratio, again[i].ratio);
}

TEST(Growth, ScalarRatioStaysInsideClassicalEnvelope)
{
    GrowthOptions options;
    options.levels = 3;
    options.random_candidates = 4;
    options.perturbation_steps = 4;
    const std::vector<GrowthRow> rows = paraproduct_growth({1}, 3, options);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_LE(rows[0].ratio, 2.0);
    EXPECT_GT(rows[0].ratio, 0.1);
}
