#pragma once

#include "lmsv/model.hpp"

#include <optional>
#include <span>
#include <vector>

namespace lmsv {

/// Limiting constants of one ModelSpec. Fields that do not apply to the
/// memory regime (e.g. xi2 for short memory, v2_var for long memory) are empty.
struct AsymptoticConstants {
    double sigma2 = 0.0;
    double sigma_y2 = 0.0;
    double lambda2 = 0.0;
    std::optional<double> xi2;
    std::optional<double> xi2_filtered;
    double v1_var = 0.0;
    std::optional<double> v2_var;
    double v3_var = 0.0;
    std::optional<double> g2;
    std::optional<double> xi1_2;
    double sr_limit_var = 0.0;  // variance of n^{-rate_exponent} (SR_hat - SR) in the limit
    double rate_exponent = -0.5;
};

/// int_0^inf x^{-beta} (1 + x)^{-beta} dx = Gamma(1-beta) Gamma(2 beta - 1) / Gamma(beta).
double beta_integral(double beta);

/// Same integral by tanh-sinh quadrature after x = t / (1 - t).
double beta_integral_quadrature(double beta);

/// Limit variance of n^{beta - 3/2} sum x_t:
/// C^2 beta_integral(beta) / ((1 - beta)(3 - 2 beta)).
/// Cross-checked against the squared-kernel route; throws ConsistencyError
/// when the two disagree by more than 1e-4 relative.
double xi_squared(double C, double beta);

double xi_squared_closed_form(double C, double beta);

/// C^2 int_{-inf}^1 ( int_0^1 [(v - u)^+]^{-beta} dv )^2 du, by nested quadrature.
double xi_squared_kernel(double C, double beta);

/// Var(sum_{t=1}^n x_t) / n^{3 - 2 beta} for each n, from the exact identity
/// sum_{|k|<n} (n - |k|) gamma(k) = sum_p (S(p) - S(p - n))^2 with S the
/// partial sums of a; the sum over p runs exactly to 64 n plus an integral tail.
std::vector<double> cov_sum_limit(const CoefficientSpec& a, std::span<const std::size_t> n_grid);

/// Richardson-extrapolated limit of cov_sum_limit on the doubling grid
/// n_min, 2 n_min, ..., n_max; eliminates the n^{-(1-beta)} and n^{-2(1-beta)} corrections.
double cov_sum_extrapolated(const CoefficientSpec& a, std::size_t n_min = 1024,
                            std::size_t n_max = 1 << 18);

/// Reference Cesaro sum for finite coefficient vectors:
/// sum_{|k|<n} (1 - |k|/n) gamma(k) with gamma(k) = sum_j a_j a_{j+k}.
double cesaro_variance(std::span<const double> a, std::size_t n);

/// lambda^2 = sigma^2 (sum_j b_j)^2, long-run variance of sqrt(n) W_n.
double lambda_squared(const ModelSpec& spec, Truncation trunc = {});

/// delta^4 E e^{4x} E(eps^2 - 1)^2 (sum_j b_j^2)^2.
double v1_limit_var(const ModelSpec& spec, Truncation trunc = {});

/// 4 delta^4 sum_{h >= 1} E[e^{2 x_0 + 2 x_h}] gamma_b(h)^2 with gamma_b the
/// autocovariance of the taps b.
double v3_limit_var(const ModelSpec& spec, Truncation trunc = {});

/// The bracket as printed, delta^4 [Ee^{2x}]^2 [sum_{i!=j} b_i^2 b_j^2 + sum_k sum_{i!=j} b_i b_{i+k} b_j b_{j+k}];
/// kept for comparison only, it is a factor ~2 short of the simulated variance.
double v3_limit_var_printed(const ModelSpec& spec, Truncation trunc = {});

/// delta^4 (sum_j b_j^2)^2 sum_k e^{4 tau^2} (e^{4 gamma(k)} - 1); short memory only.
double v2_limit_var(const ModelSpec& spec, Truncation trunc = {});

/// Limit variance of sqrt(n) (SR_hat - SR):
/// lambda^2 / sigma_y^2 + r_f^2 g^2 / (4 sigma_y^6).
double xi1_squared(const ModelSpec& spec, Truncation trunc = {});

/// (C sum_j b_j^2)^2 beta_integral(beta) / ((1 - beta)(3 - 2 beta)).
double xi2_squared_filtered(const ModelSpec& spec, Truncation trunc = {});

/// Limit variance of n^{beta - 1/2} (SR_hat - SR):
/// [r_f delta^2 E e^{2x} / sigma_y^3]^2 xi2_squared_filtered.
double sr_limit_var_lm(const ModelSpec& spec, Truncation trunc = {});

/// -1/2 for short memory, 1/2 - beta for long memory.
double rate_exponent(const ModelSpec& spec);

AsymptoticConstants compute_constants(const ModelSpec& spec, Truncation trunc = {});

}  // namespace lmsv
