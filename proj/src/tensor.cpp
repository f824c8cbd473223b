#include "dyadic/tensor.hpp"

#include <algorithm>
#include <cstdlib>

#include "dyadic/errors.hpp"

namespace dyadic {

HaarTensorOperator::HaarTensorOperator(GridHandle grid, int d) : grid_(std::move(grid)), d_(d)
{
    if (!grid_) throw ShapeMismatch("tensor operator requires a grid");
    if (d_ < 1) throw ShapeMismatch("matrix size must be positive");
}

HaarTensorOperator HaarTensorOperator::identity(GridHandle grid, int d)
{
    HaarTensorOperator t(std::move(grid), d);
    for (std::size_t i = 0; i < t.basis_size(); ++i) t.set(i, i, Mat::Identity(d, d));
    return t;
}

void HaarTensorOperator::check_key(std::size_t row, std::size_t col, const Mat& value) const
{
    if (row >= basis_size() || col >= basis_size())
        throw EntryOutOfRange("basis index (" + std::to_string(row) + ", " + std::to_string(col) +
                              ") beyond 2^(L n) = " + std::to_string(basis_size()));
    if (value.rows() != d_ || value.cols() != d_)
        throw EntryOutOfRange("entry matrix has wrong size");
}

void HaarTensorOperator::add(std::size_t row, std::size_t col, const Mat& value)
{
    check_key(row, col, value);
    auto [it, inserted] = entries_.try_emplace({row, col}, value);
    if (!inserted) it->second += value;
}

void HaarTensorOperator::set(std::size_t row, std::size_t col, const Mat& value)
{
    check_key(row, col, value);
    entries_[{row, col}] = value;
}

Mat HaarTensorOperator::entry(std::size_t row, std::size_t col) const
{
    const auto it = entries_.find({row, col});
    return it == entries_.end() ? Mat::Zero(d_, d_) : it->second;
}

std::int64_t HaarTensorOperator::band() const
{
    std::int64_t widest = -1;
    const int n = grid_->dim();
    for (const auto& [key, value] : entries_) {
        const HaarLabel r = haar_label(n, key.first);
        const HaarLabel c = haar_label(n, key.second);
        if (r.coarse || c.coarse || r.cube_level != c.cube_level) continue;
        for (auto m : centered_translation(*grid_, r.cube_level, c.cube, r.cube))
            widest = std::max(widest, std::abs(m));
    }
    return widest;
}

HaarTensorOperator HaarTensorOperator::adjoint() const
{
    HaarTensorOperator out(grid_, d_);
    for (const auto& [key, value] : entries_) out.set(key.second, key.first, value.adjoint());
    return out;
}

MatrixField apply_tensor(const HaarTensorOperator& t, const MatrixField& f)
{
    if (f.matrix_size() != t.matrix_size() || !f.grid()->same_as(*t.grid()))
        throw ShapeMismatch("apply_tensor: field and tensor shapes differ");
    const HaarCoefficients in = haar_analyze(f);
    HaarCoefficients out(f.grid(), f.matrix_size());
    for (const auto& [key, value] : t.entries())
        out.entry(key.first).noalias() += value * in.entry(key.second);
    return haar_synthesize(out);
}

Index centered_translation(const DyadicGrid& grid, int level, std::size_t from, std::size_t to)
{
    const Index a = grid.unflatten(level, from);
    const Index b = grid.unflatten(level, to);
    Index m(a.size());
    const std::int64_t period = std::int64_t{1} << level;
    for (std::size_t i = 0; i < a.size(); ++i) {
        std::int64_t delta = level == 0 ? 0 : ((b[i] - a[i]) % period + period) % period;
        if (level > 0 && delta >= period / 2) delta -= period;
        m[i] = delta;
    }
    return m;
}

HaarTensorOperator random_banded_tensor(GridHandle grid, int d, int band, double cross_density,
                                        Rng& rng)
{
    HaarTensorOperator t(grid, d);
    const int n = grid->dim();
    for (std::size_t r = 0; r < t.basis_size(); ++r) {
        const HaarLabel row = haar_label(n, r);
        for (std::size_t c = 0; c < t.basis_size(); ++c) {
            const HaarLabel col = haar_label(n, c);
            bool keep = false;
            if (!row.coarse && !col.coarse && row.cube_level == col.cube_level) {
                keep = true;
                for (auto m : centered_translation(*grid, row.cube_level, col.cube, row.cube))
                    keep = keep && std::abs(m) <= band;
            } else {
                keep = rng.uniform() < cross_density;
            }
            if (keep) t.set(r, c, rng.matrix(d));
        }
    }
    return t;
}

} // namespace dyadic
