#include "dyadic/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>

#include <Eigen/Core>
#include <boost/version.hpp>

#include "dyadic/errors.hpp"
#include "dyadic/field_norms.hpp"
#include "dyadic/figiel.hpp"
#include "dyadic/kernel_lab.hpp"
#include "dyadic/norm_lab.hpp"
#include "dyadic/operators.hpp"
#include "dyadic/parallel.hpp"
#include "dyadic/perfect.hpp"
#include "dyadic/shift.hpp"
#include "dyadic/tensor.hpp"

namespace dyadic {

using nlohmann::json;

// ------------------------------------------------------------------ config

namespace {

double lookup(const std::vector<std::pair<double, double>>& table, double p, const char* family)
{
    for (const auto& [key, value] : table)
        if (key == p) return value;
    throw ConfigInvalid(std::string("no envelope for ") + family + " at p = " + std::to_string(p));
}

json envelope_json(const std::vector<std::pair<double, double>>& table)
{
    json out = json::object();
    for (const auto& [p, value] : table) {
        std::ostringstream key;
        key << p;
        out[key.str()] = value;
    }
    return out;
}

std::vector<std::pair<double, double>> envelope_from_json(const json& j)
{
    std::vector<std::pair<double, double>> out;
    for (const auto& [key, value] : j.items()) out.emplace_back(std::stod(key), value.get<double>());
    std::sort(out.begin(), out.end());
    return out;
}

/// Reads the known members of an object and rejects the rest.
class Reader {
public:
    Reader(const json& j, std::string where) : j_(j), where_(std::move(where))
    {
        if (!j_.is_object()) throw ConfigInvalid(where_ + " must be a JSON object");
    }

    template <class T>
    void read(const char* key, T& target)
    {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            target = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigInvalid(where_ + key + ": " + e.what());
        }
    }

    const json* section(const char* key)
    {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    void finish() const
    {
        for (const auto& item : j_.items())
            if (!seen_.count(item.key())) throw ConfigInvalid("unknown key '" + where_ + item.key() + "'");
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

std::string hex64(std::uint64_t v)
{
    char buffer[17];
    std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(v));
    return buffer;
}

std::string num(double v)
{
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.17g", v);
    return buffer;
}

} // namespace

double EnvelopeTable::lookup_lambda_b(double p) const { return lookup(lambda_b, p, "lambda_b"); }
double EnvelopeTable::lookup_m_xi(double p) const { return lookup(m_xi, p, "m_xi"); }

EnvelopeTable default_envelopes()
{
    return {{{2.0, 0.67}, {4.0, 0.63}}, {{2.0, 1.00000001}, {4.0, 0.68}}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j)
{
    ExperimentConfig c;
    Reader top(j, "");
    top.read("experiment", c.experiment);
    top.read("n", c.n);
    top.read("L", c.L);
    top.read("d", c.d);
    top.read("seed", c.seed);
    top.read("trials", c.trials);
    top.read("samples", c.samples);
    top.read("decoupling_samples", c.decoupling_samples);
    top.read("tolerance", c.tolerance);
    top.read("out", c.out);
    top.read("jobs", c.jobs);
    top.read("deterministic", c.deterministic);
    if (const json* g = top.section("grid")) {
        Reader r(*g, "grid.");
        r.read("r", c.grid.r);
        r.read("gamma", c.grid.gamma);
        r.read("k_max", c.grid.k_max);
        r.finish();
    }
    if (const json* s = top.section("decay")) {
        Reader r(*s, "decay.");
        r.read("kernel", c.decay.kernel);
        r.read("eps", c.decay.eps);
        r.read("m_min", c.decay.m_min);
        r.read("m_max", c.decay.m_max);
        r.read("quadrature_level", c.decay.quadrature_level);
        r.read("exponent_min", c.decay.exponent_min);
        r.read("exponent_max", c.decay.exponent_max);
        r.read("r_squared_min", c.decay.r_squared_min);
        r.finish();
    }
    if (const json* s = top.section("shift_avg")) {
        Reader r(*s, "shift_avg.");
        r.read("samples", c.shift_avg.samples);
        r.read("grids", c.shift_avg.grids);
        r.read("center", c.shift_avg.center);
        r.read("radius", c.shift_avg.radius);
        r.read("max_rel_error", c.shift_avg.max_rel_error);
        r.finish();
    }
    if (const json* s = top.section("growth")) {
        Reader r(*s, "growth.");
        r.read("d_list", c.growth.d_list);
        r.read("levels", c.growth.levels);
        r.read("random_candidates", c.growth.random_candidates);
        r.read("perturbation_steps", c.growth.perturbation_steps);
        r.read("perturbation_scale", c.growth.perturbation_scale);
        r.read("tol", c.growth.tol);
        r.read("max_iter", c.growth.max_iter);
        r.read("scalar_envelope", c.growth.scalar_envelope);
        r.finish();
    }
    if (const json* s = top.section("norms")) {
        Reader r(*s, "norms.");
        r.read("p_list", c.norms.p_list);
        r.read("agreement_tol", c.norms.agreement_tol);
        if (const json* e = r.section("envelopes")) {
            Reader er(*e, "norms.envelopes.");
            try {
                if (const json* t = er.section("lambda_b")) c.norms.envelopes.lambda_b = envelope_from_json(*t);
                if (const json* t = er.section("m_xi")) c.norms.envelopes.m_xi = envelope_from_json(*t);
            } catch (const std::exception& ex) {
                throw ConfigInvalid(std::string("norms.envelopes: ") + ex.what());
            }
            er.finish();
        }
        r.finish();
    }
    top.finish();
    c.validate();
    return c;
}

json ExperimentConfig::to_json() const
{
    return {
        {"experiment", experiment},
        {"n", n},
        {"L", L},
        {"d", d},
        {"grid", {{"r", grid.r}, {"gamma", grid.gamma}, {"k_max", grid.k_max}}},
        {"seed", seed},
        {"trials", trials},
        {"samples", samples},
        {"decoupling_samples", decoupling_samples},
        {"tolerance", tolerance},
        {"out", out},
        {"jobs", jobs},
        {"deterministic", deterministic},
        {"decay",
         {{"kernel", decay.kernel},
          {"eps", decay.eps},
          {"m_min", decay.m_min},
          {"m_max", decay.m_max},
          {"quadrature_level", decay.quadrature_level},
          {"exponent_min", decay.exponent_min},
          {"exponent_max", decay.exponent_max},
          {"r_squared_min", decay.r_squared_min}}},
        {"shift_avg",
         {{"samples", shift_avg.samples},
          {"grids", shift_avg.grids},
          {"center", shift_avg.center},
          {"radius", shift_avg.radius},
          {"max_rel_error", shift_avg.max_rel_error}}},
        {"growth",
         {{"d_list", growth.d_list},
          {"levels", growth.levels},
          {"random_candidates", growth.random_candidates},
          {"perturbation_steps", growth.perturbation_steps},
          {"perturbation_scale", growth.perturbation_scale},
          {"tol", growth.tol},
          {"max_iter", growth.max_iter},
          {"scalar_envelope", growth.scalar_envelope}}},
        {"norms",
         {{"p_list", norms.p_list},
          {"agreement_tol", norms.agreement_tol},
          {"envelopes",
           {{"lambda_b", envelope_json(norms.envelopes.lambda_b)},
            {"m_xi", envelope_json(norms.envelopes.m_xi)}}}}},
    };
}

void ExperimentConfig::validate() const
{
    static const std::set<std::string> names{"verify", "pi-good", "decay", "shift-avg", "growth", "norms"};
    auto fail = [](const std::string& what) { throw ConfigInvalid(what); };
    if (!names.count(experiment)) fail("unknown experiment '" + experiment + "'");
    if (n < 1 || n > 4) fail("n must lie in [1, 4]");
    if (L < 1 || L * n > 16) fail("L must be positive with L n <= 16");
    if (d < 1 || d > 64) fail("d must lie in [1, 64]");
    if (trials < 1) fail("trials must be positive");
    if (samples < 100) fail("samples must be at least 100");
    if (decoupling_samples < 2) fail("decoupling_samples must be at least 2");
    if (!(tolerance >= 0.0)) fail("tolerance must be non-negative");
    if (jobs < 1) fail("jobs must be positive");
    try {
        grid.validate();
    } catch (const Error& e) {
        fail(e.what());
    }
    if (decay.kernel != "hilbert" && decay.kernel != "smoothed-abs") fail("decay.kernel must be hilbert or smoothed-abs");
    if (!(decay.eps > 0.0)) fail("decay.eps must be positive");
    if (decay.m_min < 2 || decay.m_max < decay.m_min + 7) fail("decay needs 2 <= m_min and at least 8 translations");
    if (decay.quadrature_level < 0 || decay.quadrature_level > 8) fail("decay.quadrature_level must lie in [0, 8]");
    if (shift_avg.samples < 2 || (shift_avg.samples & (shift_avg.samples - 1)) || shift_avg.samples > (1u << 20))
        fail("shift_avg.samples must be a power of two in [2, 2^20]");
    if (shift_avg.grids < 1) fail("shift_avg.grids must be positive");
    if (!(shift_avg.radius > 0.0) || shift_avg.center - shift_avg.radius <= 0.0 || shift_avg.center + shift_avg.radius >= 1.0)
        fail("shift_avg bump must lie strictly inside (0, 1)");
    if (growth.d_list.empty() || !std::is_sorted(growth.d_list.begin(), growth.d_list.end()) || growth.d_list.front() < 1)
        fail("growth.d_list must be ascending positive sizes");
    if (growth.levels < 1 || growth.levels > 12) fail("growth.levels must lie in [1, 12]");
    if (growth.random_candidates < 1 || growth.perturbation_steps < 0 || growth.max_iter < 1 || !(growth.tol > 0.0))
        fail("growth search budget must be positive");
    for (double p : norms.p_list) {
        if (!(p >= 1.0) || std::isinf(p)) fail("norms.p_list entries must be finite and >= 1");
        norms.envelopes.lookup_lambda_b(p);
        norms.envelopes.lookup_m_xi(p);
    }
}

std::string ExperimentConfig::hash() const
{
    json canonical = to_json();
    canonical.erase("out");
    canonical.erase("jobs");
    canonical.erase("deterministic");
    const std::string text = canonical.dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return hex64(h);
}

// -------------------------------------------------------------- run record

RunRecord::RunRecord(std::string experiment, std::string config_hash)
    : experiment_(std::move(experiment)), config_hash_(std::move(config_hash))
{
}

void RunRecord::add(std::string name, double value, double tolerance, Relation relation)
{
    bool passed = false;
    switch (relation) {
    case Relation::AtMost: passed = value <= tolerance; break;
    case Relation::AtLeast: passed = value >= tolerance; break;
    case Relation::Above: passed = value > tolerance; break;
    }
    checks_.push_back({std::move(name), value, tolerance, relation, passed});
}

bool RunRecord::all_passed() const
{
    return std::all_of(checks_.begin(), checks_.end(), [](const Check& c) { return c.passed; });
}

json RunRecord::to_json() const
{
    json checks = json::array();
    for (const Check& c : checks_) {
        const char* rel = c.relation == Relation::AtMost ? "<=" : c.relation == Relation::AtLeast ? ">=" : ">";
        checks.push_back({{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"relation", rel},
                          {"passed", c.passed}});
    }
    return {{"experiment", experiment_},
            {"config_hash", config_hash_},
            {"checks", std::move(checks)},
            {"all_passed", all_passed()},
            {"wall_clock_seconds", wall_clock_seconds},
            {"versions",
             {{"tool", std::string(kToolName) + " " + kToolVersion},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"boost", BOOST_LIB_VERSION},
              {"compiler", __VERSION__}}}};
}

// ----------------------------------------------------------------- helpers

namespace {

int effective_jobs(const ExperimentConfig& c) { return c.deterministic ? 1 : c.jobs; }

std::string csv_preamble(const ExperimentConfig& c)
{
    return std::string("# ") + kToolName + " " + kToolVersion + " config_hash=" + c.hash() + "\n";
}

std::string checks_csv(const ExperimentConfig& c, const RunRecord& record)
{
    std::string csv = csv_preamble(c) + "check,value,tolerance,passed\n";
    for (const Check& check : record.checks())
        csv += check.name + "," + num(check.value) + "," + num(check.tolerance) + "," +
               (check.passed ? "true" : "false") + "\n";
    return csv;
}

json base_summary(const ExperimentConfig& c, const RunRecord& record)
{
    json checks = record.to_json()["checks"];
    return {{"tool", kToolName},
            {"version", kToolVersion},
            {"config_hash", c.hash()},
            {"config", c.to_json()},
            {"checks", std::move(checks)},
            {"all_passed", record.all_passed()}};
}

/// Worst value of `measure` over trials, trial t drawing from its own substream.
double worst_over_trials(const ExperimentConfig& c, const std::string& name,
                         const std::function<double(Rng&)>& measure)
{
    std::vector<double> values(c.trials);
    const std::uint64_t base = substream_seed(c.seed, "verify/" + name);
    parallel_for(c.trials, effective_jobs(c), [&](std::size_t t) {
        Rng rng(substream_seed(base, static_cast<std::uint64_t>(t)));
        values[t] = measure(rng);
    });
    return *std::max_element(values.begin(), values.end());
}

double field_scale(const MatrixField& f) { return std::max(1.0, f.max_abs()); }

} // namespace

// ------------------------------------------------------------------ verify

ExperimentOutput cmd_verify(const ExperimentConfig& c)
{
    c.validate();
    RunRecord record("verify", c.hash());
    const GridHandle grid = DyadicGrid::standard(c.n, c.L);
    const int d = c.d;

    record.add("haar_round_trip",
               worst_over_trials(c, "haar_round_trip",
                                 [&](Rng& rng) {
                                     const MatrixField f = MatrixField::random(grid, d, rng);
                                     return max_abs_diff(haar_synthesize(haar_analyze(f)), f) / field_scale(f);
                                 }),
               c.tolerance);

    record.add("parseval",
               worst_over_trials(c, "parseval",
                                 [&](Rng& rng) {
                                     const MatrixField f = MatrixField::random(grid, d, rng);
                                     const HaarCoefficients h = haar_analyze(f);
                                     double sum = 0.0;
                                     for (std::size_t i = 0; i < h.size(); ++i) sum += h.entry(i).squaredNorm();
                                     const double direct = l2_norm_sq(f);
                                     return std::abs(sum - direct) / std::max(direct, 1e-300);
                                 }),
               c.tolerance);

    record.add("perfect_representation",
               worst_over_trials(c, "perfect_representation",
                                 [&](Rng& rng) {
                                     const CellKernel k = CellKernel::random_perfect(grid, d, rng);
                                     const MatrixField f = MatrixField::random(grid, d, rng);
                                     const MatrixField g = MatrixField::random(grid, d, rng);
                                     const MatrixField tf = k.apply(f);
                                     const PerfectDyadicCZO t = from_cell_kernel(k);
                                     const Complex direct = pairing(g, tf);
                                     const Complex terms = perfect_pairing_terms(t, f, g).total() +
                                                           pairing(g, perfect_coarse_term(t, f));
                                     const double scale = std::max(1.0, std::sqrt(l2_norm_sq(g) * l2_norm_sq(tf)));
                                     return std::abs(direct - terms) / scale;
                                 }),
               c.tolerance);

    if (c.n == 1) {
        record.add("triple_decomposition",
                   worst_over_trials(c, "triple_decomposition",
                                     [&](Rng& rng) {
                                         const PerfectDyadicCZO t = PerfectDyadicCZO::random(grid, d, rng, true);
                                         const MatrixField f = MatrixField::random(grid, d, rng);
                                         const MatrixField direct = apply_perfect(t, f);
                                         const MatrixField split =
                                             mart_transform(xi_sequence(t), f) + haar_multiplier(t.b_col(), f);
                                         return max_abs_diff(direct, split) / field_scale(direct);
                                     }),
                   c.tolerance);
    }

    record.add("summation_identity",
               worst_over_trials(c, "summation_identity",
                                 [&](Rng& rng) {
                                     const MatrixField f = MatrixField::random(grid, d, rng);
                                     const MatrixField g = MatrixField::random(grid, d, rng);
                                     const int ell = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(c.L)));
                                     const MatrixField lhs = summation_lhs(f, g, ell);
                                     return max_abs_diff(lhs, summation_rhs(f, g, ell)) / field_scale(lhs);
                                 }),
               c.tolerance);

    record.add("unitary_martingale_isometry",
               worst_over_trials(c, "unitary_martingale_isometry",
                                 [&](Rng& rng) {
                                     const AdaptedSequence xi = AdaptedSequence::random_unitary(grid, d, rng);
                                     const MatrixField f = MatrixField::random(grid, d, rng);
                                     const double image = std::sqrt(l2_norm_sq(mart_transform(xi, f)));
                                     const double input = std::sqrt(l2_norm_sq(f - cond_expect(f, 0)));
                                     return std::abs(image - input) / std::max(1.0, input);
                                 }),
               c.tolerance);

    record.add("commutator_formula",
               worst_over_trials(c, "commutator_formula",
                                 [&](Rng& rng) {
                                     const DyadicShift s = DyadicShift::random(grid, rng);
                                     const MatrixField b = MatrixField::random(grid, d, rng);
                                     const MatrixField f = MatrixField::random(grid, d, rng);
                                     const MatrixField direct = commutator(s, b, f);
                                     const MatrixField lambda_part =
                                         dyadic_shift(s, haar_multiplier(b, f)) - haar_multiplier(b, dyadic_shift(s, f));
                                     const MatrixField assembled = lambda_part + commutator_formula(s, b, f) +
                                                                   commutator_coarse_term(s, b, f);
                                     return max_abs_diff(direct, assembled) / field_scale(direct);
                                 }),
               c.tolerance);

    record.add("figiel_total",
               worst_over_trials(c, "figiel_total",
                                 [&](Rng& rng) {
                                     const HaarTensorOperator t = random_banded_tensor(grid, d, 1, 0.05, rng);
                                     const MatrixField f = MatrixField::random(grid, d, rng);
                                     const MatrixField g = MatrixField::random(grid, d, rng);
                                     const MatrixField tf = apply_tensor(t, f);
                                     const Complex direct = pairing(g, tf);
                                     const double scale = std::max(1.0, std::sqrt(l2_norm_sq(g) * l2_norm_sq(tf)));
                                     return std::abs(figiel_terms(t, f, g).total() - direct) / scale;
                                 }),
               c.tolerance);

    ExperimentOutput out{record, checks_csv(c, record), {}};
    out.summary = base_summary(c, record);
    return out;
}

// ----------------------------------------------------------------- pi-good

ExperimentOutput cmd_pi_good(const ExperimentConfig& c)
{
    c.validate();
    RunRecord record("pi-good", c.hash());
    const int jobs = effective_jobs(c);
    const McEstimate mc = estimate_pi_good(c.n, c.grid, c.samples, substream_seed(c.seed, "pi-good"), jobs);
    record.add("pi_good_positive", mc.estimate, 0.0, Relation::Above);

    json summary_extra{{"estimate", mc.estimate}, {"stderr", mc.stderr_}, {"samples", mc.samples}};
    std::string csv = csv_preamble(c) + "quantity,value\n";
    csv += "estimate," + num(mc.estimate) + "\nstderr," + num(mc.stderr_) + "\nsamples," +
           std::to_string(mc.samples) + "\n";

    if (c.n == 1 && c.grid.k_max <= 24) {
        const double exact = exact_pi_good_1d(c.grid);
        const double z = std::abs(mc.estimate - exact) / std::max(mc.stderr_, 1e-300);
        record.add("pi_good_vs_exact_sigmas", z, 3.0);
        summary_extra["exact"] = exact;
        csv += "exact," + num(exact) + "\n";
    }

    // Two fixed functionals with finite support on the random grid.
    const int dim = c.n;
    auto window = [dim](int level, std::int64_t count) {
        return CubeWindow{level, Index(static_cast<std::size_t>(dim), 0),
                          std::vector<std::int64_t>(static_cast<std::size_t>(dim), count)};
    };
    const std::vector<std::pair<std::string, CubeFunctional>> functionals{
        {"decoupling_position",
         {{window(10, 16)},
          [](const DyadicCube& q) {
              double s = 0.0;
              for (int i = 0; i < q.dim(); ++i) s += q.corner(i);
              return 1.0 + s;
          }}},
        {"decoupling_two_levels",
         {{window(9, 8), window(12, 32)},
          [](const DyadicCube& q) {
              return std::cos(2.0 * std::numbers::pi * q.corner(0)) + static_cast<double>(q.level()) / 12.0;
          }}},
    };
    for (const auto& [name, phi] : functionals) {
        const DecouplingResult r =
            verify_good_decoupling(phi, c.grid, c.decoupling_samples, substream_seed(c.seed, name), jobs);
        record.add(name + "_sigmas", std::abs(r.lhs - r.rhs) / std::max(r.stderr_, 1e-300), 3.0);
        summary_extra[name] = {{"lhs", r.lhs}, {"rhs", r.rhs}, {"stderr", r.stderr_}};
        csv += name + "_lhs," + num(r.lhs) + "\n" + name + "_rhs," + num(r.rhs) + "\n" + name + "_stderr," +
               num(r.stderr_) + "\n";
    }

    ExperimentOutput out{record, std::move(csv), {}};
    out.summary = base_summary(c, record);
    out.summary["results"] = std::move(summary_extra);
    return out;
}

// ------------------------------------------------------------------- decay

ExperimentOutput cmd_decay(const ExperimentConfig& c)
{
    c.validate();
    RunRecord record("decay", c.hash());
    const KernelModel k = c.decay.kernel == "hilbert" ? hilbert_kernel() : smoothed_abs_kernel(c.decay.eps);
    std::vector<std::int64_t> ms;
    for (std::int64_t m = c.decay.m_min; m <= c.decay.m_max; ++m) ms.push_back(m);
    const DecayFit fit = decay_fit(k, ms, Interval{0.0, 1.0}, c.decay.quadrature_level);

    record.add("exponent_at_least", fit.exponent, c.decay.exponent_min, Relation::AtLeast);
    record.add("exponent_at_most", fit.exponent, c.decay.exponent_max);
    record.add("r_squared", fit.r_squared, c.decay.r_squared_min, Relation::AtLeast);

    std::string csv = csv_preamble(c) + "m,coeff_norm,error_estimate\n";
    double worst_error = 0.0;
    for (const DecayPoint& p : fit.points) {
        csv += std::to_string(p.m) + "," + num(p.coeff_norm) + "," + num(p.error) + "\n";
        worst_error = std::max(worst_error, p.error / std::max(p.coeff_norm, 1e-300));
    }
    record.add("quadrature_relative_change", worst_error, 1e-6);

    ExperimentOutput out{record, std::move(csv), {}};
    out.summary = base_summary(c, record);
    out.summary["results"] = {{"kernel", k.name}, {"exponent", fit.exponent}, {"r_squared", fit.r_squared}};
    return out;
}

// --------------------------------------------------------------- shift-avg

ExperimentOutput cmd_shift_avg(const ExperimentConfig& c)
{
    c.validate();
    RunRecord record("shift-avg", c.hash());
    const double center = c.shift_avg.center, radius = c.shift_avg.radius;
    const SampledFunction f = SampledFunction::from_function(
        0.0, 1.0, c.shift_avg.samples, [&](double x) { return Complex(bump(x, center, radius)); });
    const ShiftAverageResult r =
        shift_average_hilbert(f, c.shift_avg.grids, substream_seed(c.seed, "shift-avg"), effective_jobs(c));
    record.add("relative_l2_error", r.rel_error, c.shift_avg.max_rel_error);

    std::string csv = csv_preamble(c) + "x,f,shift_average,scaled_hilbert\n";
    for (std::size_t i = 0; i < f.samples.size(); ++i)
        csv += num(f.point(i)) + "," + num(f.samples[i].real()) + "," + num(r.approx.samples[i].real()) + "," +
               num(r.fitted_scale * r.hilbert.samples[i].real()) + "\n";

    ExperimentOutput out{record, std::move(csv), {}};
    out.summary = base_summary(c, record);
    out.summary["results"] = {{"fitted_scale", r.fitted_scale}, {"rel_error", r.rel_error}, {"grids", c.shift_avg.grids}};
    return out;
}

// ------------------------------------------------------------------ growth

ExperimentOutput cmd_growth(const ExperimentConfig& c)
{
    c.validate();
    RunRecord record("growth", c.hash());
    GrowthOptions options;
    options.levels = c.growth.levels;
    options.random_candidates = c.growth.random_candidates;
    options.perturbation_steps = c.growth.perturbation_steps;
    options.perturbation_scale = c.growth.perturbation_scale;
    options.tol = c.growth.tol;
    options.max_iter = c.growth.max_iter;
    options.jobs = effective_jobs(c);
    const std::vector<GrowthRow> rows = paraproduct_growth(c.growth.d_list, substream_seed(c.seed, "growth"), options);

    std::string csv = csv_preamble(c) + "d,ratio,seed,iterations,residual\n";
    json table = json::array();
    double worst_drop = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const GrowthRow& r = rows[i];
        csv += std::to_string(r.d) + "," + num(r.ratio) + "," + std::to_string(r.seed) + "," +
               std::to_string(r.iterations) + "," + num(r.residual) + "\n";
        table.push_back({{"d", r.d}, {"ratio", r.ratio}, {"source", r.source}, {"seed", r.seed},
                         {"iterations", r.iterations}, {"residual", r.residual}, {"candidates", r.candidates},
                         {"log_d", std::log(static_cast<double>(r.d))}});
        if (i > 0) worst_drop = std::max(worst_drop, rows[i - 1].ratio - r.ratio);
    }
    record.add("ratio_drop_between_sizes", worst_drop, 1e-9);
    if (!rows.empty() && rows.front().d == 1)
        record.add("scalar_ratio_under_envelope", rows.front().ratio, c.growth.scalar_envelope);

    ExperimentOutput out{record, std::move(csv), {}};
    out.summary = base_summary(c, record);
    out.summary["results"] = std::move(table);
    return out;
}

// ------------------------------------------------------------------- norms

namespace {

RatioFamily lambda_b_family(GridHandle grid, int d)
{
    return [grid, d](Rng& rng) {
        const MatrixField b = MatrixField::random(grid, d, rng);
        const MatrixField f = MatrixField::random(grid, d, rng);
        return RatioSample{haar_multiplier(b, f), f, bmo_mart_norm(b)};
    };
}

RatioFamily m_xi_family(GridHandle grid, int d)
{
    return [grid, d](Rng& rng) {
        const AdaptedSequence xi = AdaptedSequence::random(grid, d, rng);
        const MatrixField f = MatrixField::random(grid, d, rng);
        return RatioSample{mart_transform(xi, f), f, xi.sup_norm()};
    };
}

} // namespace

ExperimentOutput cmd_norms(const ExperimentConfig& c)
{
    c.validate();
    RunRecord record("norms", c.hash());
    const GridHandle grid = DyadicGrid::standard(c.n, c.L);
    const int jobs = effective_jobs(c);

    std::string csv = csv_preamble(c) + "family,p,trials,skipped,max,mean,q50,q90,q99,envelope\n";
    json suites = json::array();
    auto run_suite = [&](const std::string& family, const RatioFamily& gen, double p, double envelope) {
        const RatioStats s = ratio_suite(
            gen, [p](const MatrixField& f) { return lp_norm(f, p); },
            [p](const MatrixField& f) { return hardy_col_norm(f, p); }, c.trials,
            substream_seed(c.seed, "norms/" + family + "/" + num(p)), jobs);
        csv += family + "," + num(p) + "," + std::to_string(s.trials) + "," + std::to_string(s.skipped) + "," +
               num(s.max) + "," + num(s.mean) + "," + num(s.q50) + "," + num(s.q90) + "," + num(s.q99) + "," +
               num(envelope) + "\n";
        suites.push_back({{"family", family}, {"p", p}, {"max", s.max}, {"mean", s.mean}, {"skipped", s.skipped},
                          {"envelope", envelope}});
        record.add(family + "_p" + num(p) + "_max_ratio", s.max, envelope);
    };
    for (double p : c.norms.p_list) {
        run_suite("lambda_b", lambda_b_family(grid, c.d), p, c.norms.envelopes.lookup_lambda_b(p));
        run_suite("m_xi", m_xi_family(grid, c.d), p, c.norms.envelopes.lookup_m_xi(p));
    }

    // Power iteration against the dense decomposition.
    json agreement = json::array();
    auto compare = [&](const std::string& name, const LinearOperator& op) {
        const NormReport power = op_norm(op, NormMethod::PowerIteration, 1e-10, 5000, substream_seed(c.seed, name));
        const NormReport dense = op_norm(op, NormMethod::Dense);
        const double rel = std::abs(power.norm - dense.norm) / std::max(dense.norm, 1e-300);
        record.add(name + "_power_vs_dense", rel, c.norms.agreement_tol);
        agreement.push_back({{"operator", name}, {"dimension", op.dimension()}, {"power", power.norm},
                             {"dense", dense.norm}, {"iterations", power.iterations}, {"converged", power.converged}});
    };
    {
        Rng rng(substream_seed(c.seed, "norms/perfect-small"));
        compare("perfect_n1_L4_d2",
                perfect_operator(PerfectDyadicCZO::random(DyadicGrid::standard(1, 4), 2, rng, false)));
    }
    if (grid->cell_count() * static_cast<std::size_t>(c.d * c.d) <= kDenseLimit) {
        Rng rng(substream_seed(c.seed, "norms/perfect-config"));
        compare("perfect_config", perfect_operator(PerfectDyadicCZO::random(grid, c.d, rng, false)));
    }

    ExperimentOutput out{record, std::move(csv), {}};
    out.summary = base_summary(c, record);
    out.summary["results"] = {{"suites", std::move(suites)}, {"agreement", std::move(agreement)}};
    return out;
}

// ---------------------------------------------------------------- dispatch

ExperimentOutput run_experiment(const ExperimentConfig& config)
{
    static const std::vector<std::pair<std::string, std::function<ExperimentOutput(const ExperimentConfig&)>>>
        commands{{"verify", cmd_verify}, {"pi-good", cmd_pi_good}, {"decay", cmd_decay},
                 {"shift-avg", cmd_shift_avg}, {"growth", cmd_growth}, {"norms", cmd_norms}};
    const auto start = std::chrono::steady_clock::now();
    for (const auto& [name, command] : commands)
        if (name == config.experiment) {
            ExperimentOutput out = command(config);
            out.record.wall_clock_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            return out;
        }
    throw ConfigInvalid("unknown experiment '" + config.experiment + "'");
}

void write_outputs(const ExperimentOutput& output, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    const std::string stem = output.record.experiment();
    auto write = [](const std::filesystem::path& path, const std::string& text, std::ios::openmode mode) {
        std::ofstream out(path, std::ios::binary | mode);
        if (!out) throw FormatError("cannot open " + path.string() + " for writing");
        out << text;
        if (!out) throw FormatError("write to " + path.string() + " failed");
    };
    write(dir / (stem + ".csv"), output.csv, std::ios::trunc);
    write(dir / (stem + ".json"), output.summary.dump(2) + "\n", std::ios::trunc);
    write(dir / "runs.jsonl", output.record.to_json().dump() + "\n", std::ios::app);
}

} // namespace dyadic
