#pragma once

#include "lmsv/asymptotics.hpp"
#include "lmsv/model.hpp"
#include "lmsv/simulate.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lmsv {

struct McConfig {
    ModelSpec spec;
    std::vector<std::size_t> n_grid{512, 1024, 2048, 4096, 8192, 16384};
    std::size_t replications = 500;
    std::uint64_t master_seed = 20240601;
    std::size_t workers = 1;
    SimConfig sim;  // template; n is taken from the grid, M from the largest n
    std::size_t normality_replications = 2000;
    std::optional<std::size_t> normality_n;  // defaults to the last grid point
    std::optional<double> sigma_y2;          // population sigma_y^2 when z is not Gaussian
};

/// Throws ConfigError on a malformed grid or zero counts.
void validate(const McConfig& config);

/// Replication seed for (master, n, index); mixes all three through splitmix64.
std::uint64_t replication_seed(std::uint64_t master, std::size_t n, std::size_t index);

struct McRow {
    std::size_t n = 0;
    std::size_t rep = 0;
    std::uint64_t seed = 0;
    double sr_hat = 0.0;
    double sr_error = 0.0;   // SR_hat - SR
    double mean_term = 0.0;  // W_n / sigma_y
    double var_term = 0.0;   // r_f (sigma_y_hat^2 - sigma_y^2) / (2 sigma_y^3)
    bool flagged = false;    // degenerate sample; numeric fields are NaN

    bool operator==(const McRow&) const = default;
};

struct NSummary {
    std::size_t n = 0;
    std::size_t count = 0;
    std::size_t flagged = 0;
    double sd_error = 0.0;
    double sd_mean_term = 0.0;
    double sd_var_term = 0.0;
    double mean_share = 0.0;  // var(mean_term) / var(sr_error)
};

struct RateRecord {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double ci_low = 0.0;  // 95% t-interval
    double ci_high = 0.0;
    double expected = 0.0;  // rate_exponent(spec)
};

struct NormalityRecord {
    std::size_t n = 0;
    std::size_t count = 0;
    double ks_distance = 0.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
};

struct VarianceMatch {
    double limit_var = 0.0;
    double scale_exponent = 0.0;  // statistic is n^{scale_exponent} (SR_hat - SR)
    std::vector<std::size_t> n;
    std::vector<double> ratio;
};

struct McReport {
    std::string experiment;
    std::vector<McRow> rows;
    std::vector<NSummary> summaries;
    std::size_t flagged = 0;
};

/// Simulates the path behind one replication and evaluates the filtered
/// Sharpe statistic and its two delta-method parts.
McRow run_replication(const PathSimulator& sim, double sigma_y2, std::uint64_t seed);
McRow run_replication(const ModelSpec& spec, std::size_t n, const SimConfig& sim,
                      std::uint64_t seed);

/// All (n, rep) rows for the grid in n-major order, plus per-n summaries.
/// Output is bitwise independent of config.workers.
McReport run_experiment(const McConfig& config, const std::string& experiment = "mc");

/// Same as run_experiment with the grid replaced by {n} and R replications.
McReport run_experiment_at(const McConfig& config, std::size_t n, std::size_t replications,
                           const std::string& experiment);

std::vector<NSummary> summarize(std::span<const McRow> rows);

/// OLS of log sd_error on log n with equal weights.
RateRecord estimate_rate(std::span<const NSummary> summaries, double expected);
RateRecord estimate_rate(const McConfig& config);

/// Centres and scales by the empirical mean and sd, then compares with N(0,1).
NormalityRecord normality_check(std::span<const double> errors);
NormalityRecord normality_check(const McConfig& config, std::size_t n);

/// Asymptotic 1% and 5% Kolmogorov-Smirnov critical values, 1.63/sqrt(R) and 1.36/sqrt(R).
double ks_band_1pct(std::size_t count);
double ks_band_5pct(std::size_t count);

std::vector<double> mean_contribution(std::span<const NSummary> summaries);
std::vector<double> mean_contribution(const McConfig& config);

/// var(n^{-rate} sr_error) / limit variance for each n.
VarianceMatch variance_match(std::span<const McRow> rows, const ModelSpec& spec, Truncation trunc);
VarianceMatch variance_match(const McConfig& config);

/// Rows whose sr_error is iid N(0, 1/n); checks the harness recovers slope -1/2.
McReport pseudo_error_report(std::span<const std::size_t> n_grid, std::size_t replications,
                             std::uint64_t seed);

/// Header: experiment,n,rep,seed,sr_hat,sr_error,mean_term,var_term
void write_rows_csv(std::ostream& os, const McReport& report);

/// Resolved truncation used for every n of the grid.
SimConfig resolve_for_grid(const McConfig& config);

}  // namespace lmsv
