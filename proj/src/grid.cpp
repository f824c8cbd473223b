#include "dyadic/grid.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "dyadic/errors.hpp"
#include "dyadic/parallel.hpp"
#include "dyadic/rng.hpp"

namespace dyadic {
namespace {

constexpr std::uint64_t kUnitMask = (std::uint64_t{1} << kMaxLevel) - 1;

std::int64_t reduce_mod_pow2(std::int64_t value, int level)
{
    if (level == 0) return 0;
    const std::int64_t modulus = std::int64_t{1} << level;
    const std::int64_t r = value % modulus;
    return r < 0 ? r + modulus : r;
}

void check_level(int level)
{
    if (level < 0 || level > kMaxLevel)
        throw LevelOutOfRange("level " + std::to_string(level) + " outside [0, " +
                              std::to_string(kMaxLevel) + "]");
}

int stream_bit(const ShiftHandle& shift, int level, int coord)
{
    return shift ? shift->bit(level, coord) : 0;
}

} // namespace

// ---------------------------------------------------------------- ShiftStream

ShiftStream::ShiftStream(int dim, std::vector<std::vector<std::uint8_t>> bits)
    : dim_(dim), bits_(std::move(bits))
{
    if (dim_ < 1) throw ShapeMismatch("shift stream dimension must be positive");
    if (depth() > kMaxLevel) throw LevelOutOfRange("shift stream deeper than kMaxLevel");
    for (const auto& level_bits : bits_) {
        if (static_cast<int>(level_bits.size()) != dim_)
            throw ShapeMismatch("shift stream level has wrong number of coordinates");
        for (auto b : level_bits)
            if (b > 1) throw FormatError("shift bits must be 0 or 1");
    }
}

ShiftStream ShiftStream::zeros(int dim, int depth)
{
    return ShiftStream(dim, std::vector<std::vector<std::uint8_t>>(
                                static_cast<std::size_t>(depth),
                                std::vector<std::uint8_t>(static_cast<std::size_t>(dim), 0)));
}

int ShiftStream::bit(int level, int coord) const
{
    if (level < 1 || level > depth()) return 0;
    return bits_[static_cast<std::size_t>(level - 1)][static_cast<std::size_t>(coord)];
}

std::uint64_t ShiftStream::offset_units(int level, int coord) const
{
    std::uint64_t offset = 0;
    for (int i = level + 1; i <= depth(); ++i)
        offset += static_cast<std::uint64_t>(bit(i, coord)) << (kMaxLevel - i);
    return offset & kUnitMask;
}

void ShiftStream::write(std::ostream& out) const
{
    out << "# shift-stream n=" << dim_ << " depth=" << depth() << '\n';
    for (const auto& level_bits : bits_) {
        for (auto b : level_bits) out << (b ? '1' : '0');
        out << '\n';
    }
}

ShiftStream ShiftStream::read(std::istream& in)
{
    int dim = -1;
    std::vector<std::vector<std::uint8_t>> bits;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            const auto pos = line.find("n=");
            if (pos != std::string::npos && dim < 0) dim = std::stoi(line.substr(pos + 2));
            continue;
        }
        std::vector<std::uint8_t> level_bits;
        for (char c : line) {
            if (c != '0' && c != '1') throw FormatError("unexpected character in shift stream");
            level_bits.push_back(static_cast<std::uint8_t>(c - '0'));
        }
        if (dim < 0) dim = static_cast<int>(level_bits.size());
        if (static_cast<int>(level_bits.size()) != dim)
            throw FormatError("inconsistent line width in shift stream");
        bits.push_back(std::move(level_bits));
    }
    if (dim < 1) throw FormatError("shift stream has no dimension information");
    return ShiftStream(dim, std::move(bits));
}

std::string ShiftStream::to_string() const
{
    std::ostringstream out;
    write(out);
    return out.str();
}

ShiftStream sample_shift(std::uint64_t seed, int depth, int dim)
{
    if (depth < 0 || depth > kMaxLevel) throw LevelOutOfRange("shift depth out of range");
    Rng rng(mix_seed(seed ^ (static_cast<std::uint64_t>(depth) << 32) ^
                     static_cast<std::uint64_t>(dim)));
    std::vector<std::vector<std::uint8_t>> bits(static_cast<std::size_t>(depth),
                                                std::vector<std::uint8_t>(static_cast<std::size_t>(dim)));
    for (auto& level_bits : bits)
        for (auto& b : level_bits) b = static_cast<std::uint8_t>(rng.bit());
    return ShiftStream(dim, std::move(bits));
}

void GoodBadParams::validate() const
{
    if (r < 1) throw ConfigInvalid("r must be a positive integer");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigInvalid("gamma must lie in (0, 1)");
    if (k_max < r) throw ConfigInvalid("k_max must be at least r");
    if (k_max >= kMaxLevel) throw ConfigInvalid("k_max too large");
}

// ----------------------------------------------------------------- DyadicCube

DyadicCube::DyadicCube(int level, Index index) : DyadicCube(level, std::move(index), nullptr) {}

DyadicCube::DyadicCube(int level, Index index, ShiftHandle shift)
    : level_(level), index_(std::move(index)), shift_(std::move(shift))
{
    check_level(level_);
    if (index_.empty()) throw ShapeMismatch("cube index must have at least one coordinate");
    if (shift_ && shift_->dim() != dim())
        throw ShapeMismatch("cube and shift stream dimensions differ");
    for (auto& k : index_) k = reduce_mod_pow2(k, level_);
}

double DyadicCube::side() const { return std::ldexp(1.0, -level_); }

double DyadicCube::volume() const { return std::ldexp(1.0, -level_ * dim()); }

std::uint64_t DyadicCube::corner_units(int coord) const
{
    const auto base = static_cast<std::uint64_t>(index_[static_cast<std::size_t>(coord)])
                      << (kMaxLevel - level_);
    const std::uint64_t offset = shift_ ? shift_->offset_units(level_, coord) : 0;
    return (base + offset) & kUnitMask;
}

double DyadicCube::corner(int coord) const
{
    return std::ldexp(static_cast<double>(corner_units(coord)), -kMaxLevel);
}

bool DyadicCube::operator==(const DyadicCube& other) const
{
    if (level_ != other.level_ || index_ != other.index_) return false;
    if (shift_ == other.shift_) return true;
    for (int c = 0; c < dim(); ++c)
        if (corner_units(c) != other.corner_units(c)) return false;
    return true;
}

DyadicCube translate(const DyadicCube& cube, std::span<const std::int64_t> m)
{
    if (static_cast<int>(m.size()) != cube.dim())
        throw ShapeMismatch("translation vector has wrong dimension");
    Index index = cube.index();
    for (std::size_t i = 0; i < index.size(); ++i) index[i] += m[i];
    return DyadicCube(cube.level(), std::move(index), cube.shift());
}

DyadicCube parent(const DyadicCube& cube) { return ancestor(cube, 1); }

DyadicCube ancestor(const DyadicCube& cube, int k)
{
    if (k < 0 || cube.level() - k < 0)
        throw AncestorOutOfRange("cannot take ancestor " + std::to_string(k) + " of a level-" +
                                 std::to_string(cube.level()) + " cube");
    Index index = cube.index();
    for (int level = cube.level(); level > cube.level() - k; --level)
        for (std::size_t i = 0; i < index.size(); ++i)
            index[i] = reduce_mod_pow2(index[i] - stream_bit(cube.shift(), level, static_cast<int>(i)),
                                       level) >> 1;
    return DyadicCube(cube.level() - k, std::move(index), cube.shift());
}

DyadicCube child(const DyadicCube& cube, unsigned which)
{
    if (cube.level() + 1 > kMaxLevel) throw LevelOutOfRange("child below kMaxLevel");
    Index index = cube.index();
    for (std::size_t i = 0; i < index.size(); ++i)
        index[i] = 2 * index[i] + stream_bit(cube.shift(), cube.level() + 1, static_cast<int>(i)) +
                   static_cast<std::int64_t>((which >> i) & 1u);
    return DyadicCube(cube.level() + 1, std::move(index), cube.shift());
}

bool contains(const DyadicCube& outer, const DyadicCube& inner)
{
    if (outer.dim() != inner.dim()) throw ShapeMismatch("cube dimensions differ");
    if (outer.level() > inner.level()) return false;
    if (outer.level() == 0) return true;
    const std::uint64_t side_out = std::uint64_t{1} << (kMaxLevel - outer.level());
    const std::uint64_t side_in = std::uint64_t{1} << (kMaxLevel - inner.level());
    for (int c = 0; c < outer.dim(); ++c) {
        const std::uint64_t offset = (inner.corner_units(c) - outer.corner_units(c)) & kUnitMask;
        if (offset + side_in > side_out) return false;
    }
    return true;
}

std::int64_t boundary_distance(const DyadicCube& outer, const DyadicCube& inner)
{
    if (!contains(outer, inner)) throw ShapeMismatch("boundary_distance requires nested cubes");
    if (outer.level() == 0) return -1;
    const std::uint64_t side_out = std::uint64_t{1} << (kMaxLevel - outer.level());
    const int unit_shift = kMaxLevel - inner.level();
    const std::uint64_t side_in = std::uint64_t{1} << unit_shift;
    std::uint64_t best = side_out;
    for (int c = 0; c < outer.dim(); ++c) {
        const std::uint64_t offset = (inner.corner_units(c) - outer.corner_units(c)) & kUnitMask;
        best = std::min({best, offset, side_out - offset - side_in});
    }
    return static_cast<std::int64_t>(best >> unit_shift);
}

bool within_badness_threshold(std::int64_t distance_units, int k, double gamma)
{
    const double exponent = k * (1.0 - gamma);
    const double rounded = std::round(exponent);
    if (std::abs(exponent - rounded) < 1e-12) {
        const int e = static_cast<int>(rounded);
        if (e >= 62) return true;
        return distance_units <= (std::int64_t{1} << e);
    }
    return static_cast<double>(distance_units) <= std::exp2(exponent);
}

bool is_bad(const DyadicCube& cube, const GoodBadParams& params)
{
    params.validate();
    const int j = cube.level();
    if (cube.shift() && cube.shift()->depth() < j)
        throw InsufficientShiftDepth("stream depth " + std::to_string(cube.shift()->depth()) +
                                     " cannot realize ancestors of a level-" + std::to_string(j) +
                                     " cube");
    const int k_top = std::min(params.k_max, j - 1);
    if (k_top < params.r) return false;

    // offsets[i] is the position of I inside I^(k) in units of side(I);
    // index[i] tracks the level-(j-k) ancestor index.
    const auto n = static_cast<std::size_t>(cube.dim());
    std::vector<std::int64_t> offsets(n, 0);
    Index index = cube.index();
    for (int k = 1; k <= k_top; ++k) {
        const int level = j - k + 1;
        std::int64_t distance = std::numeric_limits<std::int64_t>::max();
        for (std::size_t i = 0; i < n; ++i) {
            const std::int64_t rel =
                reduce_mod_pow2(index[i] - stream_bit(cube.shift(), level, static_cast<int>(i)), level);
            offsets[i] += (rel & 1) << (k - 1);
            index[i] = rel >> 1;
            const std::int64_t span = std::int64_t{1} << k;
            distance = std::min({distance, offsets[i], span - 1 - offsets[i]});
        }
        if (k >= params.r && within_badness_threshold(distance, k, params.gamma)) return true;
    }
    return false;
}

McEstimate estimate_pi_good(int dim, const GoodBadParams& params, std::uint64_t samples,
                            std::uint64_t seed, int jobs)
{
    params.validate();
    if (samples < 100) throw ConfigInvalid("estimate_pi_good needs at least 100 samples");
    const int level = params.k_max + 1;
    std::vector<std::uint8_t> good(samples, 0);
    parallel_for(samples, jobs, [&](std::size_t s) {
        auto stream = std::make_shared<const ShiftStream>(
            sample_shift(substream_seed(seed, static_cast<std::uint64_t>(s)), level, dim));
        DyadicCube reference(level, Index(static_cast<std::size_t>(dim), 0), std::move(stream));
        good[s] = is_bad(reference, params) ? 0 : 1;
    });
    const auto count = std::accumulate(good.begin(), good.end(), std::uint64_t{0});
    McEstimate result;
    result.samples = samples;
    result.estimate = static_cast<double>(count) / static_cast<double>(samples);
    result.stderr_ =
        std::sqrt(result.estimate * (1.0 - result.estimate) / static_cast<double>(samples));
    return result;
}

double exact_pi_good_1d(const GoodBadParams& params, int levels_available)
{
    params.validate();
    const int k_top = levels_available < 0 ? params.k_max : std::min(params.k_max, levels_available);
    if (k_top < params.r) return 1.0;
    if (k_top > 30) throw ConfigInvalid("exact enumeration limited to k_max <= 30");

    std::vector<std::int64_t> thresholds(static_cast<std::size_t>(k_top + 1));
    for (int k = params.r; k <= k_top; ++k) {
        // Largest integer distance that still counts as bad at this k.
        std::int64_t t = 0;
        while (within_badness_threshold(t + 1, k, params.gamma)) ++t;
        thresholds[static_cast<std::size_t>(k)] = t;
    }

    const std::uint64_t total = std::uint64_t{1} << k_top;
    std::uint64_t good = 0;
    for (std::uint64_t o = 0; o < total; ++o) {
        bool bad = false;
        for (int k = params.r; k <= k_top && !bad; ++k) {
            const auto span = std::int64_t{1} << k;
            const auto offset = static_cast<std::int64_t>(o & static_cast<std::uint64_t>(span - 1));
            const std::int64_t distance = std::min(offset, span - 1 - offset);
            bad = distance <= thresholds[static_cast<std::size_t>(k)];
        }
        if (!bad) ++good;
    }
    return static_cast<double>(good) / static_cast<double>(total);
}

DecouplingResult verify_good_decoupling(const CubeFunctional& phi, const GoodBadParams& params,
                                        std::uint64_t samples, std::uint64_t seed, int jobs)
{
    params.validate();
    if (samples < 2) throw ConfigInvalid("decoupling check needs at least two samples");
    if (phi.windows.empty() || !phi.value) return {};

    const int dim = static_cast<int>(phi.windows.front().first.size());
    int max_level = 0;
    for (const auto& w : phi.windows) {
        if (static_cast<int>(w.first.size()) != dim || static_cast<int>(w.count.size()) != dim)
            throw ShapeMismatch("cube window dimensions differ");
        max_level = std::max(max_level, w.level);
    }
    const int depth = std::min(kMaxLevel, max_level + 30);

    std::vector<double> pi_by_level(static_cast<std::size_t>(max_level + 1));
    for (int j = 0; j <= max_level; ++j)
        pi_by_level[static_cast<std::size_t>(j)] = std::pow(exact_pi_good_1d(params, j - 1), dim);

    auto visit = [&](const ShiftHandle& stream, bool good_only) {
        double sum = 0.0;
        for (const auto& w : phi.windows) {
            const std::int64_t total = std::accumulate(w.count.begin(), w.count.end(),
                                                       std::int64_t{1}, std::multiplies<>());
            for (std::int64_t flat = 0; flat < total; ++flat) {
                Index index(static_cast<std::size_t>(dim));
                std::int64_t rest = flat;
                for (std::size_t i = 0; i < index.size(); ++i) {
                    index[i] = w.first[i] + rest % w.count[i];
                    rest /= w.count[i];
                }
                DyadicCube cube(w.level, std::move(index), stream);
                const double v = phi.value(cube);
                if (v == 0.0) continue;
                if (good_only) {
                    if (!is_bad(cube, params)) sum += v;
                } else {
                    sum += pi_by_level[static_cast<std::size_t>(w.level)] * v;
                }
            }
        }
        return sum;
    };

    std::vector<double> lhs(samples), rhs(samples);
    parallel_for(samples, jobs, [&](std::size_t s) {
        const std::uint64_t base = substream_seed(seed, static_cast<std::uint64_t>(s));
        auto first = std::make_shared<const ShiftStream>(
            sample_shift(substream_seed(base, "lhs"), depth, dim));
        auto second = std::make_shared<const ShiftStream>(
            sample_shift(substream_seed(base, "rhs"), depth, dim));
        lhs[s] = visit(first, false);
        rhs[s] = visit(second, true);
    });

    auto mean_var = [](const std::vector<double>& v) {
        const double n = static_cast<double>(v.size());
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        return std::pair{mean, ss / (n - 1.0)};
    };
    const auto [lhs_mean, lhs_var] = mean_var(lhs);
    const auto [rhs_mean, rhs_var] = mean_var(rhs);
    const double n = static_cast<double>(samples);
    return {lhs_mean, rhs_mean, std::sqrt(lhs_var / n + rhs_var / n)};
}

// ----------------------------------------------------------------- DyadicGrid

DyadicGrid::DyadicGrid(int dim, int levels, ShiftHandle shift)
    : dim_(dim), levels_(levels), shift_(std::move(shift))
{
    if (dim_ < 1) throw ShapeMismatch("grid dimension must be positive");
    if (levels_ < 0 || levels_ * dim_ > 26)
        throw LevelOutOfRange("grid with 2^(L n) cells too large or negative");
    if (shift_ && shift_->dim() != dim_) throw ShapeMismatch("shift stream dimension differs");

    const unsigned kids = children_per_cube();
    children_.resize(static_cast<std::size_t>(levels_));
    for (int j = 0; j < levels_; ++j) {
        auto& table = children_[static_cast<std::size_t>(j)];
        table.resize(cube_count(j) * kids);
        for (std::size_t cube = 0; cube < cube_count(j); ++cube) {
            const Index index = unflatten(j, cube);
            for (unsigned e = 0; e < kids; ++e) {
                Index c(index.size());
                for (std::size_t i = 0; i < index.size(); ++i)
                    c[i] = reduce_mod_pow2(2 * index[i] + stream_bit(shift_, j + 1, static_cast<int>(i)) +
                                               static_cast<std::int64_t>((e >> i) & 1u),
                                           j + 1);
                table[cube * kids + e] = flatten(j + 1, c);
            }
        }
    }

    parents_.resize(static_cast<std::size_t>(levels_ + 1));
    positions_.resize(static_cast<std::size_t>(levels_ + 1));
    for (int j = 0; j < levels_; ++j) {
        auto& up = parents_[static_cast<std::size_t>(j + 1)];
        auto& pos = positions_[static_cast<std::size_t>(j + 1)];
        up.resize(cube_count(j + 1));
        pos.resize(cube_count(j + 1));
        for (std::size_t cube = 0; cube < cube_count(j); ++cube)
            for (unsigned e = 0; e < kids; ++e) {
                up[child_of(j, cube, e)] = cube;
                pos[child_of(j, cube, e)] = e;
            }
    }

    ancestors_.resize(static_cast<std::size_t>(levels_ + 1));
    auto& finest = ancestors_[static_cast<std::size_t>(levels_)];
    finest.resize(cell_count());
    std::iota(finest.begin(), finest.end(), std::size_t{0});
    for (int j = levels_ - 1; j >= 0; --j) {
        const auto& up = parents_[static_cast<std::size_t>(j + 1)];
        auto& table = ancestors_[static_cast<std::size_t>(j)];
        const auto& below = ancestors_[static_cast<std::size_t>(j + 1)];
        table.resize(cell_count());
        for (std::size_t cell = 0; cell < cell_count(); ++cell) table[cell] = up[below[cell]];
    }
}

std::shared_ptr<const DyadicGrid> DyadicGrid::standard(int dim, int levels)
{
    return std::make_shared<const DyadicGrid>(dim, levels);
}

std::shared_ptr<const DyadicGrid> DyadicGrid::shifted(int dim, int levels, ShiftHandle shift)
{
    return std::make_shared<const DyadicGrid>(dim, levels, std::move(shift));
}

Index DyadicGrid::unflatten(int level, std::size_t flat) const
{
    Index index(static_cast<std::size_t>(dim_));
    const std::size_t mask = (std::size_t{1} << level) - 1;
    for (int i = 0; i < dim_; ++i)
        index[static_cast<std::size_t>(i)] = static_cast<std::int64_t>((flat >> (level * i)) & mask);
    return index;
}

std::size_t DyadicGrid::flatten(int level, std::span<const std::int64_t> index) const
{
    std::size_t flat = 0;
    for (int i = 0; i < dim_; ++i)
        flat |= static_cast<std::size_t>(reduce_mod_pow2(index[static_cast<std::size_t>(i)], level))
                << (level * i);
    return flat;
}

DyadicCube DyadicGrid::cube(int level, std::size_t flat) const
{
    return DyadicCube(level, unflatten(level, flat), shift_);
}

double DyadicGrid::corner(int level, std::size_t flat, int coord) const
{
    return cube(level, flat).corner(coord);
}

bool DyadicGrid::same_as(const DyadicGrid& other) const
{
    if (dim_ != other.dim_ || levels_ != other.levels_) return false;
    const int depth = std::max(shift_ ? shift_->depth() : 0, other.shift_ ? other.shift_->depth() : 0);
    for (int level = 1; level <= depth; ++level)
        for (int c = 0; c < dim_; ++c)
            if (stream_bit(shift_, level, c) != stream_bit(other.shift_, level, c)) return false;
    return true;
}

} // namespace dyadic
