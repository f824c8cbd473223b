#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Dense>

namespace dyadic {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;

/// splitmix64 finalizer; used to derive independent seeds.
std::uint64_t mix_seed(std::uint64_t x);

/// Seed for a named (or numbered) substream of a root seed.
std::uint64_t substream_seed(std::uint64_t root, std::string_view name);
std::uint64_t substream_seed(std::uint64_t root, std::uint64_t index);

/// Deterministic random source. Only raw engine output is consumed, so the
/// streams are identical across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    int bit() { return static_cast<int>(engine_() >> 63); }
    /// Uniform on [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);
    double normal();
    int sign() { return bit() ? 1 : -1; }

    /// d x d matrix with independent entries uniform in the unit square.
    Mat matrix(int d);
    /// Haar-ish random unitary (QR of a Gaussian matrix with phase fix).
    Mat unitary(int d);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace dyadic
