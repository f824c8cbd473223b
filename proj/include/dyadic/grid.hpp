#pragma once

// Standard and randomly shifted dyadic systems on the n-torus (R/Z)^n.
//
// A cube at level j of the system D^beta has index m in [0, 2^j)^n and
// occupies, per coordinate, [2^-j m + s_j, 2^-j (m + 1) + s_j) mod 1 with
// s_j = sum_{i > j} 2^-i beta_i. The children of index m are the level-(j+1)
// cubes 2m + beta_{j+1} + e, e in {0,1}^n, with e = 0 the left half.
// Positions are dyadic rationals and are handled as exact integers.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace dyadic {

using Index = std::vector<std::int64_t>;

/// Upper bound for cube levels and stream depth; positions are stored in
/// units of 2^-kMaxLevel in unsigned 64-bit integers.
inline constexpr int kMaxLevel = 60;

/// The bit sequence beta = (beta_j), j = 1..depth, each beta_j in {0,1}^n.
class ShiftStream {
public:
    ShiftStream(int dim, std::vector<std::vector<std::uint8_t>> bits);

    /// All-zero stream (the standard grid truncated at `depth`).
    static ShiftStream zeros(int dim, int depth);

    int dim() const { return dim_; }
    int depth() const { return static_cast<int>(bits_.size()); }
    /// beta_level[coord]; zero for levels beyond the stream.
    int bit(int level, int coord) const;

    /// Offset s_j in coordinate `coord`, in units of 2^-kMaxLevel.
    std::uint64_t offset_units(int level, int coord) const;

    bool operator==(const ShiftStream& other) const = default;

    /// One line per level, each line n characters '0'/'1'.
    void write(std::ostream& out) const;
    static ShiftStream read(std::istream& in);
    std::string to_string() const;

private:
    int dim_;
    std::vector<std::vector<std::uint8_t>> bits_;
};

using ShiftHandle = std::shared_ptr<const ShiftStream>;

/// Bernoulli(1/2) bits, a deterministic function of (seed, depth, dim).
ShiftStream sample_shift(std::uint64_t seed, int depth, int dim);

struct GoodBadParams {
    int r = 8;
    double gamma = 0.5;
    int k_max = 24;

    void validate() const;
};

class DyadicCube {
public:
    /// Cube of the standard grid.
    DyadicCube(int level, Index index);
    /// Cube of the shifted grid D^beta; a null handle means the standard grid.
    DyadicCube(int level, Index index, ShiftHandle shift);

    int dim() const { return static_cast<int>(index_.size()); }
    int level() const { return level_; }
    const Index& index() const { return index_; }
    const ShiftHandle& shift() const { return shift_; }

    double side() const;
    double volume() const;

    /// Left corner per coordinate in units of 2^-kMaxLevel (mod 2^kMaxLevel).
    std::uint64_t corner_units(int coord) const;
    double corner(int coord) const;

    /// Same grid and same (level, index).
    bool operator==(const DyadicCube& other) const;

private:
    int level_;
    Index index_;
    ShiftHandle shift_;
};

DyadicCube translate(const DyadicCube& cube, std::span<const std::int64_t> m);
DyadicCube ancestor(const DyadicCube& cube, int k);
DyadicCube parent(const DyadicCube& cube);
/// Child selected by the bit mask `which` (bit i set = right half in coord i).
DyadicCube child(const DyadicCube& cube, unsigned which);

/// Point-set containment on the torus.
bool contains(const DyadicCube& outer, const DyadicCube& inner);

/// Infinity-metric distance from the closure of `inner` to the complement
/// of `outer`, in units of side(inner). Requires inner to lie in outer.
/// Returns -1 when the complement is empty (outer is the whole torus).
std::int64_t boundary_distance(const DyadicCube& outer, const DyadicCube& inner);

/// True when dist(I, J^c) <= side(I)^gamma side(J)^(1-gamma) for some
/// J = I^(k), r <= k <= k_max. Ancestors at level 0 have an empty
/// complement and never make a cube bad.
bool is_bad(const DyadicCube& cube, const GoodBadParams& params);

/// Threshold comparison used by is_bad: distance (in units of the small
/// side) against 2^{k (1 - gamma)}. Exact for integral exponents.
bool within_badness_threshold(std::int64_t distance_units, int k, double gamma);

struct McEstimate {
    double estimate = 0.0;
    double stderr_ = 0.0;
    std::uint64_t samples = 0;
};

/// Monte-Carlo estimate of P(reference cube is good). The reference cube
/// sits at level k_max + 1 so that every tested ancestor is a proper cube.
McEstimate estimate_pi_good(int dim, const GoodBadParams& params, std::uint64_t samples,
                            std::uint64_t seed, int jobs = 1);

/// Exact pi_good for n = 1 by enumerating all 2^k_max relative offsets of
/// the reference cube inside its k_max-th ancestor; pi_good(n) = pi_good(1)^n.
/// `levels_available` bounds the ancestors that exist (level - 1), so the
/// same routine gives the torus value for shallow cubes.
double exact_pi_good_1d(const GoodBadParams& params, int levels_available = -1);

/// A cube functional with finite support: the sum over D^beta only visits
/// cubes inside the listed windows.
struct CubeWindow {
    int level = 0;
    Index first;                    ///< lowest index per coordinate
    std::vector<std::int64_t> count; ///< window extent per coordinate
};

struct CubeFunctional {
    std::vector<CubeWindow> windows;
    std::function<double(const DyadicCube&)> value;
};

struct DecouplingResult {
    double lhs = 0.0;     ///< pi_good * E sum_I phi(I)
    double rhs = 0.0;     ///< E sum_{I good} phi(I)
    double stderr_ = 0.0; ///< standard error of lhs - rhs
};

DecouplingResult verify_good_decoupling(const CubeFunctional& phi, const GoodBadParams& params,
                                        std::uint64_t samples, std::uint64_t seed, int jobs = 1);

/// Tree tables for all cubes of one grid at levels 0..L, used by the
/// piecewise-constant field machinery. Flat index of a multi-index k at
/// level j is sum_i k_i 2^{j i}.
class DyadicGrid {
public:
    DyadicGrid(int dim, int levels, ShiftHandle shift = nullptr);

    static std::shared_ptr<const DyadicGrid> standard(int dim, int levels);
    static std::shared_ptr<const DyadicGrid> shifted(int dim, int levels, ShiftHandle shift);

    int dim() const { return dim_; }
    int levels() const { return levels_; }
    const ShiftHandle& shift() const { return shift_; }
    /// Number of cubes at level j.
    std::size_t cube_count(int level) const { return std::size_t{1} << (level * dim_); }
    std::size_t cell_count() const { return cube_count(levels_); }
    unsigned children_per_cube() const { return 1u << dim_; }

    /// Flat level-j index of the ancestor of finest cell `cell`.
    std::size_t ancestor_of_cell(int level, std::size_t cell) const
    {
        return ancestors_[level][cell];
    }
    /// Flat level-(j+1) index of child `which` of the level-j cube `cube`.
    std::size_t child_of(int level, std::size_t cube, unsigned which) const
    {
        return children_[level][cube * children_per_cube() + which];
    }

    /// Flat level-(j-1) index of the parent of the level-j cube `cube`.
    std::size_t parent_of(int level, std::size_t cube) const
    {
        return parents_[level][cube];
    }
    /// Child bit mask e with cube = child_of(level - 1, parent, e).
    unsigned position_in_parent(int level, std::size_t cube) const
    {
        return positions_[level][cube];
    }

    Index unflatten(int level, std::size_t flat) const;
    std::size_t flatten(int level, std::span<const std::int64_t> index) const;
    DyadicCube cube(int level, std::size_t flat) const;

    /// Left corner of a cube as a real number in [0, 1).
    double corner(int level, std::size_t flat, int coord) const;

    /// Same dimension, depth and realized shift bits.
    bool same_as(const DyadicGrid& other) const;

private:
    int dim_;
    int levels_;
    ShiftHandle shift_;
    std::vector<std::vector<std::size_t>> ancestors_;
    std::vector<std::vector<std::size_t>> children_;
    std::vector<std::vector<std::size_t>> parents_;
    std::vector<std::vector<unsigned>> positions_;
};

using GridHandle = std::shared_ptr<const DyadicGrid>;

} // namespace dyadic
