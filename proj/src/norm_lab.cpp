#include "dyadic/norm_lab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "dyadic/errors.hpp"
#include "dyadic/field_norms.hpp"
#include "dyadic/parallel.hpp"

namespace dyadic {

LinearOperator::LinearOperator(GridHandle grid, int d, Map apply, Map apply_adjoint, std::string name)
    : grid_(std::move(grid)), d_(d), apply_(std::move(apply)), adjoint_(std::move(apply_adjoint)),
      name_(std::move(name))
{
}

std::size_t LinearOperator::dimension() const
{
    return grid_->cell_count() * static_cast<std::size_t>(d_ * d_);
}

LinearOperator LinearOperator::adjoint() const
{
    return LinearOperator(grid_, d_, adjoint_, apply_, name_ + "*");
}

LinearOperator LinearOperator::scaled(Complex lambda) const
{
    auto forward = apply_;
    auto backward = adjoint_;
    return LinearOperator(
        grid_, d_, [forward, lambda](const MatrixField& f) { return lambda * forward(f); },
        [backward, lambda](const MatrixField& g) { return std::conj(lambda) * backward(g); },
        name_ + "*scaled");
}

LinearOperator identity_operator(GridHandle grid, int d)
{
    auto same = [](const MatrixField& f) { return f; };
    return LinearOperator(std::move(grid), d, same, same, "identity");
}

LinearOperator zero_operator(GridHandle grid, int d)
{
    auto zero = [](const MatrixField& f) { return MatrixField(f.grid(), f.matrix_size()); };
    return LinearOperator(std::move(grid), d, zero, zero, "zero");
}

LinearOperator paraproduct_operator(MatrixField b)
{
    const MatrixField b_star = b.adjoint();
    GridHandle grid = b.grid();
    const int d = b.matrix_size();
    return LinearOperator(
        grid, d, [b](const MatrixField& f) { return paraproduct(b, f); },
        [b_star](const MatrixField& g) { return paraproduct_adjoint(b_star, g); }, "paraproduct");
}

LinearOperator haar_multiplier_operator(MatrixField b)
{
    GridHandle grid = b.grid();
    const int d = b.matrix_size();
    return LinearOperator(
        grid, d, [b](const MatrixField& f) { return haar_multiplier(b, f); },
        [b](const MatrixField& g) { return haar_multiplier_adjoint(b, g); }, "haar_multiplier");
}

LinearOperator mart_transform_operator(AdaptedSequence xi)
{
    if (xi.levels() == 0) throw ShapeMismatch("martingale transform needs at least one level");
    GridHandle grid = xi[0].grid();
    const int d = xi[0].matrix_size();
    return LinearOperator(
        grid, d, [xi](const MatrixField& f) { return mart_transform(xi, f); },
        [xi](const MatrixField& g) { return mart_transform_adjoint(xi, g); }, "mart_transform");
}

LinearOperator perfect_operator(PerfectDyadicCZO t)
{
    GridHandle grid = t.grid();
    const int d = t.matrix_size();
    PerfectDyadicCZO t_star = t.adjoint();
    return LinearOperator(
        grid, d, [t](const MatrixField& f) { return apply_perfect(t, f); },
        [t_star](const MatrixField& g) { return apply_perfect(t_star, g); }, "perfect");
}

LinearOperator tensor_operator(HaarTensorOperator t)
{
    GridHandle grid = t.grid();
    const int d = t.matrix_size();
    HaarTensorOperator t_star = t.adjoint();
    return LinearOperator(
        grid, d, [t](const MatrixField& f) { return apply_tensor(t, f); },
        [t_star](const MatrixField& g) { return apply_tensor(t_star, g); }, "tensor");
}

LinearOperator shift_operator(DyadicShift s, int d)
{
    GridHandle grid = s.grid();
    // The adjoint of a shift sends each parent coefficient back to its children.
    auto adjoint = [s](const MatrixField& g) {
        const auto& grid = *g.grid();
        const HaarCoefficients in = haar_analyze(g);
        HaarCoefficients out(g.grid(), g.matrix_size());
        const unsigned count = signature_count(grid.dim());
        for (int j = 1; j < grid.levels(); ++j)
            for (std::size_t cube = 0; cube < grid.cube_count(j); ++cube)
                for (unsigned theta = 1; theta <= count; ++theta)
                    out.at(j, cube, kTheta0) +=
                        static_cast<double>(s.sign(j, cube, theta)) * in.at(j - 1, grid.parent_of(j, cube), theta);
        return haar_synthesize(out);
    };
    return LinearOperator(
        grid, d, [s](const MatrixField& f) { return dyadic_shift(s, f); }, adjoint, "dyadic_shift");
}

double linearity_defect(const LinearOperator& t, Rng& rng, int probes)
{
    double worst = 0.0;
    for (int p = 0; p < probes; ++p) {
        const MatrixField f = MatrixField::random(t.grid(), t.matrix_size(), rng);
        const MatrixField g = MatrixField::random(t.grid(), t.matrix_size(), rng);
        const Complex a(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
        const MatrixField tf = t(f);
        const MatrixField tg = t(g);
        const MatrixField combined = t(a * f + g);
        const double scale = std::max({1.0, tf.max_abs() * std::abs(a), tg.max_abs()});
        worst = std::max(worst, max_abs_diff(combined, a * tf + tg) / scale);
    }
    return worst;
}

Mat materialize(const LinearOperator& t)
{
    const std::size_t n = t.dimension();
    if (n > kDenseLimit)
        throw DimensionTooLarge("dense materialization of dimension " + std::to_string(n) +
                                " exceeds " + std::to_string(kDenseLimit));
    Mat a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    MatrixField unit(t.grid(), t.matrix_size());
    for (std::size_t q = 0; q < n; ++q) {
        unit.data()[q] = 1.0;
        const MatrixField image = t(unit);
        unit.data()[q] = 0.0;
        const auto data = image.data();
        for (std::size_t r = 0; r < n; ++r)
            a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(q)) = data[r];
    }
    return a;
}

std::string to_string(NormMethod method)
{
    return method == NormMethod::Dense ? "dense" : "power-iteration";
}

namespace {

struct PowerResult {
    NormReport report;
    MatrixField vector;
};

PowerResult power_iteration(const LinearOperator& t, MatrixField x, double tol, int max_iter)
{
    NormReport report;
    report.method = NormMethod::PowerIteration;
    report.converged = false;
    double norm_x = std::sqrt(l2_norm_sq(x));
    if (norm_x == 0.0) throw ShapeMismatch("power iteration start vector vanishes");
    x *= 1.0 / norm_x;
    for (int it = 1; it <= max_iter; ++it) {
        const MatrixField y = t(x);
        const double lambda = l2_norm_sq(y);
        report.history.push_back(lambda);
        report.iterations = it;
        report.norm = std::sqrt(lambda);
        if (lambda == 0.0) {
            report.residual = 0.0;
            report.converged = true;
            break;
        }
        MatrixField z = t.apply_adjoint(y);
        const double z_norm = std::sqrt(l2_norm_sq(z));
        report.residual = std::sqrt(l2_norm_sq(z - Complex(lambda) * x)) / lambda;
        x = std::move(z);
        x *= 1.0 / z_norm;
        if (report.residual <= tol) {
            report.converged = true;
            break;
        }
    }
    return {std::move(report), std::move(x)};
}

} // namespace

NormReport op_norm(const LinearOperator& t, NormMethod method, double tol, int max_iter, std::uint64_t seed)
{
    if (method == NormMethod::Dense) {
        const Mat a = materialize(t);
        NormReport report;
        report.method = NormMethod::Dense;
        report.seed = seed;
        report.norm = a.size() ? Eigen::BDCSVD<Mat>(a).singularValues()(0) : 0.0;
        return report;
    }
    Rng rng(substream_seed(seed, "power-start"));
    PowerResult result =
        power_iteration(t, MatrixField::random(t.grid(), t.matrix_size(), rng), tol, max_iter);
    result.report.seed = seed;
    return result.report;
}

RatioStats ratio_suite(const RatioFamily& family, const FieldNorm& norm_in, const FieldNorm& norm_out,
                       std::size_t trials, std::uint64_t seed, int jobs)
{
    std::vector<std::optional<double>> slots(trials);
    parallel_for(trials, jobs, [&](std::size_t trial) {
        Rng rng(substream_seed(seed, static_cast<std::uint64_t>(trial)));
        const RatioSample sample = family(rng);
        const double denominator = sample.input_scale * norm_in(sample.input);
        if (denominator == 0.0) {
            const double numerator = norm_out(sample.image);
            if (numerator == 0.0) return; // 0/0 is a degenerate input
            slots[trial] = std::numeric_limits<double>::infinity();
            return;
        }
        slots[trial] = norm_out(sample.image) / denominator;
    });

    RatioStats stats;
    stats.trials = trials;
    stats.seed = seed;
    for (const auto& s : slots) {
        if (s) {
            stats.ratios.push_back(*s);
        } else {
            ++stats.skipped;
        }
    }
    if (stats.ratios.empty()) return stats;
    std::vector<double> sorted = stats.ratios;
    std::sort(sorted.begin(), sorted.end());
    auto quantile = [&](double q) {
        const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())) - 1);
        return sorted[std::min(idx, sorted.size() - 1)];
    };
    stats.max = sorted.back();
    stats.mean = std::accumulate(stats.ratios.begin(), stats.ratios.end(), 0.0) /
                 static_cast<double>(stats.ratios.size());
    stats.q50 = quantile(0.5);
    stats.q90 = quantile(0.9);
    stats.q99 = quantile(0.99);
    return stats;
}

// ------------------------------------------------------------ growth search

namespace {

Mat gaussian_matrix(int d, Rng& rng)
{
    Mat m(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index k = 0; k < d; ++k) {
            const double re = rng.normal();
            const double im = rng.normal();
            m(i, k) = Complex(re, im);
        }
    return m;
}

double haar_size(const GridHandle& grid, std::size_t index)
{
    return std::sqrt(std::ldexp(1.0, -haar_label(grid->dim(), index).cube_level * grid->dim()));
}

/// Random symbol with Haar coefficients of size |I|^{1/2}, zero mean.
MatrixField random_symbol(const GridHandle& grid, int d, Rng& rng)
{
    HaarCoefficients c(grid, d);
    for (std::size_t index = 1; index < c.size(); ++index) c.entry(index) = haar_size(grid, index) * gaussian_matrix(d, rng);
    return haar_synthesize(c);
}

/// Perturbs the Haar coefficient of one randomly chosen cube.
MatrixField coordinate_perturbation(const MatrixField& b, double scale, Rng& rng)
{
    HaarCoefficients c = haar_analyze(b);
    const std::size_t index = 1 + static_cast<std::size_t>(rng.below(c.size() - 1));
    c.entry(index) += (scale * haar_size(b.grid(), index)) * gaussian_matrix(b.matrix_size(), rng);
    return haar_synthesize(c);
}

MatrixField normalized(MatrixField b)
{
    const double sup = lp_norm(b, std::numeric_limits<double>::infinity());
    if (sup > 0.0) b *= 1.0 / sup;
    return b;
}

MatrixField embed(const MatrixField& small, int d)
{
    MatrixField out(small.grid(), d);
    const int s = small.matrix_size();
    for (std::size_t c = 0; c < small.cell_count(); ++c) out.cell(c).topLeftCorner(s, s) = small.cell(c);
    return out;
}

struct Candidate {
    MatrixField symbol;
    PowerResult result;
    std::string source;
};

} // namespace

std::vector<GrowthRow> paraproduct_growth(const std::vector<int>& d_list, std::uint64_t seed,
                                          const GrowthOptions& options)
{
    if (!std::is_sorted(d_list.begin(), d_list.end()))
        throw ConfigInvalid("paraproduct_growth needs an ascending d list");
    const GridHandle grid = DyadicGrid::standard(1, options.levels);
    std::vector<GrowthRow> rows;
    std::vector<Candidate> best_by_d;

    for (int d : d_list) {
        const std::uint64_t d_seed = substream_seed(seed, "growth-d" + std::to_string(d));
        auto evaluate = [&](MatrixField symbol, std::optional<MatrixField> start, std::uint64_t start_seed,
                            std::string source) {
            const LinearOperator op = paraproduct_operator(symbol);
            if (!start) {
                Rng rng(substream_seed(start_seed, "power-start"));
                start = MatrixField::random(grid, d, rng);
            }
            PowerResult result = power_iteration(op, std::move(*start), options.tol, options.max_iter);
            result.report.seed = start_seed;
            return Candidate{std::move(symbol), std::move(result), std::move(source)};
        };

        std::vector<std::optional<Candidate>> random_slots(static_cast<std::size_t>(options.random_candidates));
        parallel_for(random_slots.size(), options.jobs, [&](std::size_t i) {
            const std::uint64_t s = substream_seed(d_seed, static_cast<std::uint64_t>(i));
            Rng rng(s);
            random_slots[i] = evaluate(normalized(random_symbol(grid, d, rng)), std::nullopt, s, "random");
        });
        std::size_t evaluated = random_slots.size();

        std::optional<Candidate> best;
        auto consider = [&](Candidate c) {
            if (!best || c.result.report.norm > best->result.report.norm) best = std::move(c);
        };
        for (auto& slot : random_slots) consider(std::move(*slot));

        for (const auto& smaller : best_by_d) {
            if (smaller.symbol.matrix_size() >= d) continue;
            consider(evaluate(embed(smaller.symbol, d), embed(smaller.result.vector, d),
                              smaller.result.report.seed, "embedded"));
            ++evaluated;
        }

        Rng walk(substream_seed(d_seed, "perturb"));
        for (int step = 0; step < options.perturbation_steps; ++step) {
            MatrixField trial = coordinate_perturbation(best->symbol, options.perturbation_scale, walk);
            Candidate c = evaluate(normalized(std::move(trial)), best->result.vector, d_seed + static_cast<std::uint64_t>(step),
                                   "perturbed");
            ++evaluated;
            consider(std::move(c));
        }

        GrowthRow row;
        row.d = d;
        row.ratio = best->result.report.norm;
        row.source = best->source;
        row.seed = best->result.report.seed;
        row.iterations = best->result.report.iterations;
        row.residual = best->result.report.residual;
        row.candidates = evaluated;
        rows.push_back(row);
        best_by_d.push_back(std::move(*best));
    }
    return rows;
}

} // namespace dyadic
