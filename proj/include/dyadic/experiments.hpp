#pragma once

// Batch experiments behind the czo-lab command line: configuration,
// run records and the six subcommands.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "dyadic/grid.hpp"

namespace dyadic {

inline constexpr const char* kToolName = "czo-lab";
inline constexpr const char* kToolVersion = "1.0.0";

struct DecayConfig {
    std::string kernel = "hilbert"; ///< "hilbert" or "smoothed-abs"
    double eps = 0.01;
    std::int64_t m_min = 2;
    std::int64_t m_max = 64;
    int quadrature_level = 3;
    double exponent_min = -2.3;
    double exponent_max = -1.7;
    double r_squared_min = 0.98;
};

struct ShiftAvgConfig {
    std::size_t samples = 512;
    std::size_t grids = 2000;
    double center = 0.5;
    double radius = 0.25;
    double max_rel_error = 0.10;
};

struct GrowthConfig {
    std::vector<int> d_list{1, 2, 4, 8, 16};
    int levels = 5;
    int random_candidates = 16;
    int perturbation_steps = 64;
    double perturbation_scale = 0.25;
    double tol = 1e-6;
    int max_iter = 500;
    double scalar_envelope = 2.0;
};

/// Frozen envelope constants for the ratio suites, keyed by p.
struct EnvelopeTable {
    std::vector<std::pair<double, double>> lambda_b;
    std::vector<std::pair<double, double>> m_xi;
    double lookup_lambda_b(double p) const;
    double lookup_m_xi(double p) const;
};

/// The committed calibration, identical to tests/fixtures/envelopes.json.
EnvelopeTable default_envelopes();

struct NormsConfig {
    std::vector<double> p_list{2.0, 4.0};
    EnvelopeTable envelopes = default_envelopes();
    double agreement_tol = 1e-6;
};

struct ExperimentConfig {
    std::string experiment = "verify";
    int n = 1;
    int L = 6;
    int d = 4;
    GoodBadParams grid{};
    std::uint64_t seed = 1;
    std::size_t trials = 10;
    std::uint64_t samples = 100000;
    std::uint64_t decoupling_samples = 4000;
    double tolerance = 1e-10;
    std::string out = "czo-out";
    int jobs = 1;
    bool deterministic = false;
    DecayConfig decay;
    ShiftAvgConfig shift_avg;
    GrowthConfig growth;
    NormsConfig norms;

    /// Missing keys keep their defaults; unknown keys and out-of-range values
    /// throw ConfigInvalid.
    static ExperimentConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    void validate() const;
    /// FNV-1a 64 of the canonical JSON without the keys "out", "jobs" and
    /// "deterministic", as 16 hex digits.
    std::string hash() const;
};

enum class Relation { AtMost, AtLeast, Above };

struct Check {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    Relation relation = Relation::AtMost;
    bool passed = false;
};

/// Checks are only ever appended.
class RunRecord {
public:
    RunRecord(std::string experiment, std::string config_hash);

    void add(std::string name, double value, double tolerance, Relation relation = Relation::AtMost);

    const std::string& experiment() const { return experiment_; }
    const std::string& config_hash() const { return config_hash_; }
    const std::vector<Check>& checks() const { return checks_; }
    bool all_passed() const;

    double wall_clock_seconds = 0.0;

    nlohmann::json to_json() const;

private:
    std::string experiment_;
    std::string config_hash_;
    std::vector<Check> checks_;
};

struct ExperimentOutput {
    RunRecord record;
    std::string csv;         ///< deterministic data table, header row first
    nlohmann::json summary;  ///< experiment results without timing
};

ExperimentOutput cmd_verify(const ExperimentConfig& config);
ExperimentOutput cmd_pi_good(const ExperimentConfig& config);
ExperimentOutput cmd_decay(const ExperimentConfig& config);
ExperimentOutput cmd_shift_avg(const ExperimentConfig& config);
ExperimentOutput cmd_growth(const ExperimentConfig& config);
ExperimentOutput cmd_norms(const ExperimentConfig& config);

/// Dispatches on config.experiment and records the wall clock.
ExperimentOutput run_experiment(const ExperimentConfig& config);

/// Writes <dir>/<experiment>.csv and <dir>/<experiment>.json and appends the
/// run record to <dir>/runs.jsonl.
void write_outputs(const ExperimentOutput& output, const std::filesystem::path& dir);

} // namespace dyadic
