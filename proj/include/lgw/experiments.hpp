#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lgw/random.hpp"
#include "lgw/report.hpp"

namespace lgw {

/// A flat `key = value` experiment description. Grids are comma lists.
struct ExperimentConfig {
    std::string kind;
    std::uint64_t seed = 0;
    std::string output_path;
    ReportFormat format = ReportFormat::Csv;
    std::map<std::string, std::string> params;

    bool has(const std::string& key) const { return params.count(key) != 0; }
    double number(const std::string& key, std::optional<double> fallback = {}) const;
    long integer(const std::string& key, std::optional<long> fallback = {}) const;
    std::vector<double> grid(const std::string& key, std::optional<std::vector<double>> fallback = {}) const;
    std::string text(const std::string& key, std::optional<std::string> fallback = {}) const;
    bool flag(const std::string& key, bool fallback) const;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

/// Keys accepted by each experiment kind (besides kind, seed, output, format).
const std::vector<std::string>& experiment_keys(const std::string& kind);

struct Criterion {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ExperimentResult {
    Table table;
    std::vector<Criterion> criteria;

    bool passed() const;
    Table criteria_table() const;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads = 1);

ExperimentResult run_width_sandwich(const ExperimentConfig& cfg, int threads = 1);
ExperimentResult run_oracle_coverage(const ExperimentConfig& cfg, int threads = 1);
ExperimentResult run_density_oracle(const ExperimentConfig& cfg, int threads = 1);
ExperimentResult run_maurey_check(const ExperimentConfig& cfg, int threads = 1);
ExperimentResult run_persistence(const ExperimentConfig& cfg, int threads = 1);
ExperimentResult run_rates_sweep(const ExperimentConfig& cfg, int threads = 1);

/// e^{−x} + 3·√(e^{−x}(1 − e^{−x})/replicates).
double coverage_tolerance(double x, long replicates);

/// Monte Carlo check of the fixed-point inequality
/// (σ/√n)·ℓ(T̃ ∩ t*B₂) ≤ t*²/2, where T̃ is the hull of μ_j/√n.
struct FixedPointWidthCheck {
    double t_star_sq = 0.0;
    bool side_condition = false;  ///< t* ≤ R
    double lhs = 0.0;             ///< σ/√n times the width estimate
    double lhs_stderr = 0.0;
    double rhs = 0.0;             ///< t*²/2
    bool passed = false;          ///< lhs ≤ rhs + 3·lhs_stderr
};

/// Uses M/2 Gaussian directions of empirical norm R and their negatives.
FixedPointWidthCheck fixed_point_width_check(long n, long M, double sigma, double R, long samples,
                                             const SeededStream& stream, int threads = 1);

} // namespace lgw
