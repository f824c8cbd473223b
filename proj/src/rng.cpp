#include "dyadic/rng.hpp"

#include <cmath>
#include <numbers>

namespace dyadic {

std::uint64_t mix_seed(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t substream_seed(std::uint64_t root, std::string_view name)
{
    // FNV-1a over the name, folded into the root seed.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return mix_seed(root ^ mix_seed(h));
}

std::uint64_t substream_seed(std::uint64_t root, std::uint64_t index)
{
    return mix_seed(mix_seed(root) + 0x632be59bd9b4e019ULL * (index + 1));
}

double Rng::uniform()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t n)
{
    // Rejection sampling keeps the result exactly uniform.
    const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
}

double Rng::normal()
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u = uniform();
    while (u <= 0.0) u = uniform();
    const double v = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u));
    const double angle = 2.0 * std::numbers::pi * v;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

Mat Rng::matrix(int d)
{
    Mat m(d, d);
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i) {
            const double re = uniform(-1.0, 1.0);
            const double im = uniform(-1.0, 1.0);
            m(i, j) = Complex(re, im);
        }
    return m;
}

Mat Rng::unitary(int d)
{
    Mat g(d, d);
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i) {
            const double re = normal();
            const double im = normal();
            g(i, j) = Complex(re, im);
        }
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ();
    const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < d; ++i) {
        const Complex diag = r(i, i);
        const double mag = std::abs(diag);
        if (mag > 0.0) q.col(i) *= diag / mag;
    }
    return q;
}

} // namespace dyadic
