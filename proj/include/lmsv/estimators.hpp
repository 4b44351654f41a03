#pragma once

#include "lmsv/model.hpp"
#include "lmsv/simulate.hpp"

#include <span>

namespace lmsv {

struct SharpeEstimate {
    double mu_hat = 0.0;      // sample mean (W_n for a filtered series)
    double sigma2_hat = 0.0;  // divisor-n variance
    double sr_hat = 0.0;      // (mu_hat - r_f) / sqrt(sigma2_hat)
    std::size_t n = 0;
};

/// sigma2_hat - sigma^2 split into its martingale, volatility and mean parts.
struct VarErrorDecomposition {
    double martingale_term = 0.0;  // n^-1 sum v_t^2 (eps_t^2 - 1)
    double longmem_term = 0.0;     // n^-1 sum (v_t^2 - sigma^2)
    double mean_sq_term = 0.0;     // -mu_hat^2

    double sum() const { return martingale_term + longmem_term + mean_sq_term; }
};

/// sqrt(n) (n^-1 sum y_t^2 - sigma_y^2) = v1 + v2 + v3.
struct VDecomposition {
    double v1 = 0.0;  // squared-innovation martingale part
    double v2 = 0.0;  // volatility part, weights b_j^2
    double v3 = 0.0;  // cross products r_{t-i} r_{t-j}, i != j
};

/// Compensated (Neumaier) sum.
double accurate_sum(std::span<const double> values);

double mean_hat(std::span<const double> series);

/// n^-1 sum (x_t - mean)^2.
double var_hat(std::span<const double> series);

/// Same path for raw returns and for the filtered series y.
SharpeEstimate sharpe_hat(std::span<const double> series, double r_f);

/// Uses the in-sample r and v of the path; eps_t^2 = (r_t / v_t)^2.
/// sigma2 defaults to the Gaussian closed form at the path's truncation.
VarErrorDecomposition decompose_var_error(const SamplePath& path, const ModelSpec& spec);
VarErrorDecomposition decompose_var_error(const SamplePath& path, double sigma2);

/// Filter sums run over j < M_b using the path's pre-sample window.
VDecomposition v_decomposition(const SamplePath& path, const ModelSpec& spec);

/// n^{beta - 3/2} [ sum (v_t^2 - sigma^2) - delta^2 K'(0) sum x_t ].
double linearization_gap(const SamplePath& path, const ModelSpec& spec);

/// The retained term delta^2 K'(0) n^{beta - 3/2} sum x_t = 2 sigma^2 n^{beta - 3/2} sum x_t.
double linearized_term(const SamplePath& path, const ModelSpec& spec);

}  // namespace lmsv
