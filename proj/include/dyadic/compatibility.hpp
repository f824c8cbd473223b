#pragma once

// Partition of good cubes into pairwise m-compatible classes D^m_{k,v}.
//
// M(m) = max{r, ceil((1-gamma)^{-1} log2+ |m|)} with |m| Euclidean,
// a(I) = log2 side(I) mod (M+1), and b(I) alternates along each orbit of
// I -> I + m. On level j the orbit of index k under +m runs through the
// coordinate i* whose m_i has the smallest 2-adic valuation v modulo 2^j,
// so b(I) = bit v of k_{i*} (0 when m vanishes modulo 2^j).

#include <span>
#include <vector>

#include "dyadic/grid.hpp"

namespace dyadic {

int compatibility_depth(std::span<const std::int64_t> m, const GoodBadParams& params);

int class_level_label(const DyadicCube& cube, int depth);
int class_orbit_label(const DyadicCube& cube, std::span<const std::int64_t> m);

struct CompatibilityClass {
    int k = 0; ///< a(I)
    int v = 0; ///< b(I)
    std::vector<DyadicCube> cubes;
};

/// Classes ordered by (k, v), k = 0..M(m), v = 0, 1; empty classes kept.
std::vector<CompatibilityClass> compatibility_partition(std::span<const std::int64_t> m,
                                                        const GoodBadParams& params,
                                                        std::span<const DyadicCube> cubes);

/// Either I u (I + m) and J u (J + m) are disjoint, or one union lies in
/// the other cube or its translate (containment as point sets). A cube is
/// compatible with itself.
bool m_compatible(const DyadicCube& i, const DyadicCube& j, std::span<const std::int64_t> m);

/// All good cubes at levels 0..levels of the grid carried by `shift`.
std::vector<DyadicCube> good_cubes(const ShiftHandle& shift, int dim, int levels,
                                   const GoodBadParams& params);

} // namespace dyadic
