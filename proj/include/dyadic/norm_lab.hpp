#pragma once

// Operator norms on the finite-dimensional space L2 of matrix fields and
// empirical ratio statistics for norm inequalities.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dyadic/matrix_field.hpp"
#include "dyadic/operators.hpp"
#include "dyadic/perfect.hpp"
#include "dyadic/shift.hpp"
#include "dyadic/tensor.hpp"

namespace dyadic {

/// A linear map on fields of one shape together with its adjoint.
class LinearOperator {
public:
    using Map = std::function<MatrixField(const MatrixField&)>;

    LinearOperator(GridHandle grid, int d, Map apply, Map apply_adjoint, std::string name);

    const GridHandle& grid() const { return grid_; }
    int matrix_size() const { return d_; }
    const std::string& name() const { return name_; }
    /// Complex dimension 2^{L n} d^2 of the domain.
    std::size_t dimension() const;

    MatrixField operator()(const MatrixField& f) const { return apply_(f); }
    MatrixField apply_adjoint(const MatrixField& g) const { return adjoint_(g); }

    LinearOperator adjoint() const;
    LinearOperator scaled(Complex lambda) const;

private:
    GridHandle grid_;
    int d_;
    Map apply_;
    Map adjoint_;
    std::string name_;
};

LinearOperator identity_operator(GridHandle grid, int d);
LinearOperator zero_operator(GridHandle grid, int d);
LinearOperator paraproduct_operator(MatrixField b);
LinearOperator haar_multiplier_operator(MatrixField b);
LinearOperator mart_transform_operator(AdaptedSequence xi);
LinearOperator perfect_operator(PerfectDyadicCZO t);
LinearOperator tensor_operator(HaarTensorOperator t);
LinearOperator shift_operator(DyadicShift s, int d);

/// max over random probes of ||T(a f + g) - a T f - T g||_inf relative to
/// the size of the images.
double linearity_defect(const LinearOperator& t, Rng& rng, int probes = 3);

/// Dense matrix of T in the orthonormal coordinates sqrt(|cell|) * data.
/// Throws DimensionTooLarge above 4096.
Mat materialize(const LinearOperator& t);

enum class NormMethod { PowerIteration, Dense };

std::string to_string(NormMethod method);

struct NormReport {
    double norm = 0.0;
    NormMethod method = NormMethod::PowerIteration;
    int iterations = 0;
    double residual = 0.0;
    bool converged = true;
    std::uint64_t seed = 0;
    /// Successive Rayleigh estimates ||T x_k||^2 of power iteration.
    std::vector<double> history;
};

inline constexpr std::size_t kDenseLimit = 4096;

/// Power iteration on T^*T from a seeded random start, stopping when the
/// relative eigen-residual ||T^*T x - lambda x|| / lambda drops below tol;
/// or the largest singular value of the materialized matrix.
NormReport op_norm(const LinearOperator& t, NormMethod method = NormMethod::PowerIteration,
                   double tol = 1e-8, int max_iter = 2000, std::uint64_t seed = 0);

/// One draw of a ratio experiment: the operator image norm is divided by
/// input_scale * norm_in(f).
struct RatioSample {
    MatrixField image;
    MatrixField input;
    double input_scale = 1.0;
};

using RatioFamily = std::function<RatioSample(Rng&)>;
using FieldNorm = std::function<double(const MatrixField&)>;

struct RatioStats {
    std::size_t trials = 0;
    std::size_t skipped = 0;
    double max = 0.0;
    double mean = 0.0;
    double q50 = 0.0;
    double q90 = 0.0;
    double q99 = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> ratios;
};

/// Trial t draws from Rng(substream_seed(seed, t)); trials whose
/// denominator vanishes are skipped and counted.
RatioStats ratio_suite(const RatioFamily& family, const FieldNorm& norm_in, const FieldNorm& norm_out,
                       std::size_t trials, std::uint64_t seed, int jobs = 1);

struct GrowthRow {
    int d = 0;
    double ratio = 0.0;         ///< best ||pi_b|| / ||b||_inf found
    std::string source;         ///< "random", "perturbed" or "embedded"
    std::uint64_t seed = 0;
    int iterations = 0;
    double residual = 0.0;
    std::size_t candidates = 0;
};

struct GrowthOptions {
    int levels = 5;
    int random_candidates = 16;
    int perturbation_steps = 64;
    double perturbation_scale = 0.25;
    double tol = 1e-8;
    int max_iter = 2000;
    int jobs = 1;
};

/// Best ratio ||pi_b||_{2->2} / ||b||_inf per d (n = 1) from random Haar
/// symbols, single-coefficient perturbations of the incumbent and block
/// embeddings diag(b', 0) of the best symbol for every smaller d in the
/// list. An embedded candidate restarts power iteration from the embedded
/// maximizer, so its estimate never falls below the smaller-d estimate.
std::vector<GrowthRow> paraproduct_growth(const std::vector<int>& d_list, std::uint64_t seed,
                                          const GrowthOptions& options = {});

} // namespace dyadic
