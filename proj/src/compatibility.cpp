#include "dyadic/compatibility.hpp"

#include <cmath>

#include "dyadic/errors.hpp"

namespace dyadic {

int compatibility_depth(std::span<const std::int64_t> m, const GoodBadParams& params)
{
    params.validate();
    double norm_sq = 0.0;
    for (auto x : m) norm_sq += static_cast<double>(x) * static_cast<double>(x);
    const double log_plus = norm_sq > 1.0 ? 0.5 * std::log2(norm_sq) : 0.0;
    const int scaled = static_cast<int>(std::ceil(log_plus / (1.0 - params.gamma) - 1e-12));
    return std::max(params.r, scaled);
}

int class_level_label(const DyadicCube& cube, int depth)
{
    const int period = depth + 1;
    return ((-cube.level()) % period + period) % period;
}

int class_orbit_label(const DyadicCube& cube, std::span<const std::int64_t> m)
{
    if (static_cast<int>(m.size()) != cube.dim()) throw ShapeMismatch("translation has wrong dimension");
    const int j = cube.level();
    int best_valuation = j;
    std::size_t best_coord = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const std::int64_t reduced = j == 0 ? 0 : ((m[i] % (std::int64_t{1} << j)) + (std::int64_t{1} << j)) % (std::int64_t{1} << j);
        if (reduced == 0) continue;
        const int valuation = __builtin_ctzll(static_cast<unsigned long long>(reduced));
        if (valuation < best_valuation) {
            best_valuation = valuation;
            best_coord = i;
        }
    }
    if (best_valuation == j) return 0;
    return static_cast<int>((cube.index()[best_coord] >> best_valuation) & 1);
}

std::vector<CompatibilityClass> compatibility_partition(std::span<const std::int64_t> m,
                                                        const GoodBadParams& params,
                                                        std::span<const DyadicCube> cubes)
{
    const int depth = compatibility_depth(m, params);
    std::vector<CompatibilityClass> classes;
    for (int k = 0; k <= depth; ++k)
        for (int v = 0; v <= 1; ++v) classes.push_back({k, v, {}});
    for (const auto& cube : cubes) {
        const int k = class_level_label(cube, depth);
        const int v = class_orbit_label(cube, m);
        classes[static_cast<std::size_t>(2 * k + v)].cubes.push_back(cube);
    }
    return classes;
}

namespace {

bool disjoint(const DyadicCube& a, const DyadicCube& b)
{
    return !contains(a, b) && !contains(b, a);
}

} // namespace

bool m_compatible(const DyadicCube& i, const DyadicCube& j, std::span<const std::int64_t> m)
{
    if (i == j) return true;
    const DyadicCube im = translate(i, m);
    const DyadicCube jm = translate(j, m);
    // Dyadic cubes of one grid are nested or disjoint.
    const bool unions_disjoint = disjoint(i, j) && disjoint(i, jm) && disjoint(im, j) && disjoint(im, jm);
    if (unions_disjoint) return true;
    auto inside = [](const DyadicCube& a, const DyadicCube& a_shift, const DyadicCube& host) {
        return contains(host, a) && contains(host, a_shift);
    };
    return inside(i, im, j) || inside(i, im, jm) || inside(j, jm, i) || inside(j, jm, im);
}

std::vector<DyadicCube> good_cubes(const ShiftHandle& shift, int dim, int levels,
                                   const GoodBadParams& params)
{
    std::vector<DyadicCube> out;
    for (int j = 0; j <= levels; ++j) {
        const std::size_t count = std::size_t{1} << (j * dim);
        for (std::size_t flat = 0; flat < count; ++flat) {
            Index index(static_cast<std::size_t>(dim));
            for (int i = 0; i < dim; ++i)
                index[static_cast<std::size_t>(i)] =
                    static_cast<std::int64_t>((flat >> (j * i)) & ((std::size_t{1} << j) - 1));
            DyadicCube cube(j, std::move(index), shift);
            if (!is_bad(cube, params)) out.push_back(std::move(cube));
        }
    }
    return out;
}

} // namespace dyadic
