#include "dyadic/kernel_lab.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

#include "dyadic/errors.hpp"
#include "dyadic/grid.hpp"
#include "dyadic/matrix_field.hpp"
#include "dyadic/parallel.hpp"
#include "dyadic/shift.hpp"

namespace dyadic {

KernelModel KernelModel::scaled(Complex c) const
{
    KernelModel out = *this;
    const Eval inner = eval;
    out.eval = [inner, c](double x, double y) { return Mat(c * inner(x, y)); };
    out.size_constant *= std::abs(c);
    out.name = name + "*scaled";
    return out;
}

KernelModel hilbert_kernel()
{
    KernelModel k;
    k.name = "hilbert";
    k.eval = [](double x, double y) { return Mat::Constant(1, 1, Complex(1.0 / (x - y))); };
    return k;
}

KernelModel smoothed_abs_kernel(double eps)
{
    KernelModel k;
    k.name = "smoothed-abs";
    k.eval = [eps](double x, double y) {
        const double t = x - y;
        return Mat::Constant(1, 1, Complex(1.0 / std::sqrt(t * t + eps * eps)));
    };
    return k;
}

KernelModel constant_kernel(Mat value)
{
    KernelModel k;
    k.name = "constant";
    k.matrix_size = static_cast<int>(value.rows());
    k.size_constant = std::numeric_limits<double>::infinity();
    k.eval = [value](double, double) { return value; };
    return k;
}

KernelModel zero_kernel(int matrix_size)
{
    KernelModel k = constant_kernel(Mat::Zero(matrix_size, matrix_size));
    k.name = "zero";
    k.size_constant = 0.0;
    return k;
}

KernelParts symmetrize(const KernelModel& k)
{
    KernelParts parts{k, k};
    const KernelModel::Eval inner = k.eval;
    parts.even.name = k.name + "-even";
    parts.even.eval = [inner](double x, double y) { return Mat((inner(x, y) + inner(y, x)) / 2.0); };
    parts.odd.name = k.name + "-odd";
    parts.odd.eval = [inner](double x, double y) { return Mat((inner(x, y) - inner(y, x)) / 2.0); };
    return parts;
}

// ---------------------------------------------------------------- quadrature

namespace {

using Rule = boost::math::quadrature::gauss<double, 10>;

struct Node {
    double x; // in [0, 1]
    double w;
};

const std::array<Node, 10>& unit_rule()
{
    static const std::array<Node, 10> nodes = [] {
        std::array<Node, 10> out{};
        const auto& abscissa = Rule::abscissa();
        const auto& weights = Rule::weights();
        std::size_t k = 0;
        for (std::size_t i = 0; i < abscissa.size(); ++i) {
            out[k++] = {0.5 * (1.0 + abscissa[i]), 0.5 * weights[i]};
            out[k++] = {0.5 * (1.0 - abscissa[i]), 0.5 * weights[i]};
        }
        return out;
    }();
    return nodes;
}

/// Composite tensor rule for fn(u, v) on [0,1]^2 with `panels` per direction.
Mat tensor_rule(const std::function<Mat(double, double)>& fn, int panels, int d)
{
    Mat sum = Mat::Zero(d, d);
    const double width = 1.0 / panels;
    for (int pu = 0; pu < panels; ++pu)
        for (const Node& a : unit_rule()) {
            const double u = (pu + a.x) * width;
            for (int pv = 0; pv < panels; ++pv)
                for (const Node& b : unit_rule()) {
                    const double v = (pv + b.x) * width;
                    sum += (a.w * b.w * width * width) * fn(u, v);
                }
        }
    return sum;
}

bool same_point(double a, double b, double scale)
{
    return std::abs(a - b) <= 1e-12 * scale;
}

enum class Geometry { Disjoint, Corner, Diagonal, Overlap };

struct Corner {
    double x0, y0;
    double sx, sy; // directions pointing into the rectangle
};

Geometry classify(Interval x, Interval y, Corner& corner)
{
    const double scale = std::max(x.side, y.side);
    const double x1 = x.start + x.side, y1 = y.start + y.side;
    if (same_point(x.start, y.start, scale) && same_point(x.side, y.side, scale)) return Geometry::Diagonal;
    if (same_point(x1, y.start, scale)) {
        corner = {x1, y.start, -1.0, 1.0};
        return Geometry::Corner;
    }
    if (same_point(y1, x.start, scale)) {
        corner = {x.start, y1, 1.0, -1.0};
        return Geometry::Corner;
    }
    if (x1 < y.start || y1 < x.start) return Geometry::Disjoint;
    return Geometry::Overlap;
}

Mat rectangle_at(const KernelModel& k, Interval x, Interval y, int panels, PvRule rule)
{
    const int d = k.matrix_size;
    Corner c{};
    switch (classify(x, y, c)) {
    case Geometry::Disjoint:
        return tensor_rule(
            [&](double u, double v) {
                return Mat(x.side * y.side * k(x.start + u * x.side, y.start + v * y.side));
            },
            panels, d);
    case Geometry::Corner: {
        if (rule == PvRule::None) throw SingularOverlap("rectangle touches the diagonal at a corner");
        const double hx = x.side, hy = y.side;
        // Duffy split of [0,hx] x [0,hy] into the triangles below and above v = (hy/hx) u.
        auto lower = [&](double s, double t) {
            const double u = s * hx, v = t * (hy / hx) * u;
            return Mat(hx * (hy / hx) * u * k(c.x0 + c.sx * u, c.y0 + c.sy * v));
        };
        auto upper = [&](double s, double t) {
            const double v = s * hy, u = t * (hx / hy) * v;
            return Mat(hy * (hx / hy) * v * k(c.x0 + c.sx * u, c.y0 + c.sy * v));
        };
        return tensor_rule(lower, panels, d) + tensor_rule(upper, panels, d);
    }
    case Geometry::Diagonal: {
        if (rule == PvRule::None) throw SingularOverlap("square on the diagonal needs a principal-value rule");
        const double h = x.side, a = x.start;
        // x = y + t over 0 < t < h, a < y < a + h - t, pairing K(x,y) with K(y,x).
        auto pair = [&](double s, double r) {
            const double t = s * h, len = h - t, y0 = a + r * len;
            return Mat(h * len * (k(y0 + t, y0) + k(y0, y0 + t)));
        };
        return tensor_rule(pair, panels, d);
    }
    case Geometry::Overlap:
        break;
    }
    throw SingularOverlap("rectangles overlap without sharing a diagonal square");
}

void require_one_dimensional(const KernelModel& k)
{
    if (k.dim != 1) throw ShapeMismatch("kernel quadrature is implemented for n = 1");
}

} // namespace

QuadratureValue integrate_rectangle(const KernelModel& k, Interval x_range, Interval y_range, int level,
                                    PvRule rule)
{
    require_one_dimensional(k);
    if (level < 0 || level > 12) throw LevelOutOfRange("quadrature level must lie in [0, 12]");
    const Mat coarse = rectangle_at(k, x_range, y_range, 1 << level, rule);
    const Mat fine = rectangle_at(k, x_range, y_range, 2 << level, rule);
    return {fine, (fine - coarse).norm()};
}

QuadratureValue haar_coeff_kernel(const KernelModel& k, Interval cube, std::int64_t m, int quadrature_level,
                                  unsigned eta, unsigned theta, PvRule rule)
{
    if (eta > 1 || theta > 1) throw EntryOutOfRange("signatures are 0 or 1 in one dimension");
    const Interval target = cube.translated(m);
    const double half = cube.side / 2.0;
    QuadratureValue out{Mat::Zero(k.matrix_size, k.matrix_size), 0.0};
    for (unsigned ex = 0; ex < 2; ++ex)
        for (unsigned ey = 0; ey < 2; ++ey) {
            const double sign = ((eta & ex) ? -1.0 : 1.0) * ((theta & ey) ? -1.0 : 1.0);
            const QuadratureValue part =
                integrate_rectangle(k, {target.start + ex * half, half}, {cube.start + ey * half, half},
                                    quadrature_level, rule);
            out.value += (sign / cube.side) * part.value;
            out.error += part.error / cube.side;
        }
    return out;
}

DecayFit decay_fit(const KernelModel& k, const std::vector<std::int64_t>& m_values, Interval cube,
                   int quadrature_level, PvRule rule)
{
    if (m_values.size() < 8) throw InsufficientPoints("decay_fit needs at least 8 translations");
    DecayFit fit;
    constexpr std::array<std::array<unsigned, 2>, 3> pairs{{{1, 1}, {0, 1}, {1, 0}}};
    for (std::int64_t m : m_values) {
        DecayPoint point{m, 0.0, 0.0};
        for (const auto& [eta, theta] : pairs) {
            const QuadratureValue q = haar_coeff_kernel(k, cube, m, quadrature_level, eta, theta, rule);
            const double norm = q.value.rows() == 1 ? std::abs(q.value(0, 0))
                                                    : Eigen::JacobiSVD<Mat>(q.value).singularValues()(0);
            if (norm >= point.coeff_norm) point.coeff_norm = norm;
            point.error = std::max(point.error, q.error);
        }
        fit.points.push_back(point);
    }

    std::vector<double> xs, ys;
    for (const DecayPoint& p : fit.points) {
        if (p.coeff_norm <= 0.0) continue;
        xs.push_back(std::log1p(static_cast<double>(std::llabs(p.m))));
        ys.push_back(std::log(p.coeff_norm));
    }
    if (xs.size() < 8) throw InsufficientPoints("fewer than 8 nonzero coefficients to fit");
    const double count = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i] / count;
        my += ys[i] / count;
    }
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0) throw InsufficientPoints("translations must take at least two distinct sizes");
    fit.exponent = sxy / sxx;
    fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

// ------------------------------------------------------------ shift average

bool SampledFunction::supported_inside() const
{
    return !samples.empty() && samples.front() == Complex{} && samples.back() == Complex{};
}

SampledFunction SampledFunction::from_function(double start, double width, std::size_t count,
                                               const std::function<Complex(double)>& fn)
{
    SampledFunction f{start, width, std::vector<Complex>(count)};
    for (std::size_t i = 0; i < count; ++i) f.samples[i] = fn(f.point(i));
    return f;
}

double bump(double x, double center, double radius)
{
    const double s = (x - center) / radius;
    return std::abs(s) < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0;
}

SampledFunction periodic_hilbert(const SampledFunction& f)
{
    SampledFunction out{f.start, f.width, std::vector<Complex>(f.samples.size())};
    const double h = f.h();
    const std::size_t n = f.samples.size();
    // The kernel depends only on (i - j) mod n.
    std::vector<double> weight(n, 0.0);
    for (std::size_t k = 1; k < n; ++k)
        weight[k] = h / std::tan(std::numbers::pi * static_cast<double>(k) * h / f.width) / f.width;
    for (std::size_t i = 0; i < n; ++i) {
        Complex sum{};
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) sum += f.samples[j] * weight[(i + n - j) % n];
        out.samples[i] = sum;
    }
    return out;
}

ShiftAverageResult shift_average_hilbert(const SampledFunction& f, std::size_t grids, std::uint64_t seed,
                                         int jobs)
{
    const std::size_t n = f.samples.size();
    if (n < 2 || !std::has_single_bit(n)) throw ShapeMismatch("sample count must be a power of two >= 2");
    if (grids == 0) throw ShapeMismatch("shift averaging needs at least one grid");
    const int levels = std::countr_zero(n);

    std::vector<std::vector<Complex>> images(grids);
    parallel_for(grids, jobs, [&](std::size_t g) {
        auto stream = std::make_shared<const ShiftStream>(
            sample_shift(substream_seed(seed, static_cast<std::uint64_t>(g)), levels, 1));
        const GridHandle grid = DyadicGrid::shifted(1, levels, stream);
        // With stream depth L the finest cells coincide with the sample cells.
        std::vector<std::size_t> sample_of(n);
        for (std::size_t c = 0; c < n; ++c)
            sample_of[c] = static_cast<std::size_t>(std::llround(grid->corner(levels, c, 0) * static_cast<double>(n))) % n;
        const MatrixField input = MatrixField::from_function(
            grid, 1, [&](std::size_t c) { return Mat::Constant(1, 1, f.samples[sample_of[c]]); });
        const MatrixField image = dyadic_shift(DyadicShift::petermichl(grid), input);
        std::vector<Complex> out(n);
        for (std::size_t c = 0; c < n; ++c) out[sample_of[c]] = image.cell(c)(0, 0);
        images[g] = std::move(out);
    });

    ShiftAverageResult result;
    result.approx = {f.start, f.width, std::vector<Complex>(n)};
    for (const auto& image : images)
        for (std::size_t i = 0; i < n; ++i) result.approx.samples[i] += image[i];
    for (Complex& v : result.approx.samples) v /= static_cast<double>(grids);
    result.hilbert = periodic_hilbert(f);

    double hh = 0.0, avg_sq = 0.0;
    Complex ha{};
    for (std::size_t i = 0; i < n; ++i) {
        hh += std::norm(result.hilbert.samples[i]);
        avg_sq += std::norm(result.approx.samples[i]);
        ha += std::conj(result.hilbert.samples[i]) * result.approx.samples[i];
    }
    result.fitted_scale = hh > 0.0 ? ha.real() / hh : 0.0;
    if (avg_sq > 0.0) {
        double diff = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            diff += std::norm(result.fitted_scale * result.hilbert.samples[i] - result.approx.samples[i]);
        result.rel_error = std::sqrt(diff / avg_sq);
    }
    return result;
}

// ----------------------------------------------------------------- audits

AuditValue wbp_audit(const KernelModel& k, const std::vector<Interval>& cubes, int level, double tol,
                     int max_level)
{
    AuditValue audit;
    for (const Interval& cube : cubes) {
        bool stable = false;
        for (int q = level; q <= max_level; ++q) {
            const QuadratureValue v = integrate_rectangle(k, cube, cube, q, PvRule::SymmetricPair);
            const double norm = v.value.rows() == 1 ? std::abs(v.value(0, 0))
                                                    : Eigen::JacobiSVD<Mat>(v.value).singularValues()(0);
            if (v.error <= tol * std::max(1.0, norm)) {
                audit.value = std::max(audit.value, norm / cube.side);
                audit.error = std::max(audit.error, v.error / cube.side);
                stable = true;
                break;
            }
        }
        if (!stable) throw QuadratureFailure("diagonal integral did not stabilize by level " + std::to_string(max_level));
    }
    return audit;
}

double size_audit(const KernelModel& k, double lo, double hi, std::size_t pairs, std::uint64_t seed)
{
    Rng rng(seed);
    double worst = 0.0;
    for (std::size_t i = 0; i < pairs; ++i) {
        const double x = rng.uniform(lo, hi), y = rng.uniform(lo, hi);
        if (x == y) continue;
        const Mat v = k(x, y);
        const double norm = v.rows() == 1 ? std::abs(v(0, 0)) : Eigen::JacobiSVD<Mat>(v).singularValues()(0);
        worst = std::max(worst, norm * std::pow(std::abs(x - y), k.dim));
    }
    return worst;
}

} // namespace dyadic
