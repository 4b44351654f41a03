#include "lmsv/estimators.hpp"

#include "lmsv/errors.hpp"

#include <cmath>

namespace lmsv {

double accurate_sum(std::span<const double> values) {
    double sum = 0.0;
    double comp = 0.0;
    for (double v : values) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    return sum + comp;
}

double mean_hat(std::span<const double> series) {
    if (series.empty()) {
        throw DimensionError("mean of an empty series");
    }
    return accurate_sum(series) / static_cast<double>(series.size());
}

double var_hat(std::span<const double> series) {
    const double mu = mean_hat(series);
    std::vector<double> sq(series.size());
    for (std::size_t t = 0; t < series.size(); ++t) {
        const double d = series[t] - mu;
        sq[t] = d * d;
    }
    return accurate_sum(sq) / static_cast<double>(series.size());
}

SharpeEstimate sharpe_hat(std::span<const double> series, double r_f) {
    SharpeEstimate est;
    est.n = series.size();
    est.mu_hat = mean_hat(series);
    est.sigma2_hat = var_hat(series);
    if (!(est.sigma2_hat > 0.0)) {
        throw DegenerateSampleError("sample variance is zero; Sharpe ratio undefined");
    }
    est.sr_hat = (est.mu_hat - r_f) / std::sqrt(est.sigma2_hat);
    return est;
}

VarErrorDecomposition decompose_var_error(const SamplePath& path, double sigma2) {
    const auto r = path.r_in();
    const auto v = path.v_in();
    const std::size_t n = r.size();
    if (n == 0 || v.size() != n) {
        throw InvalidPathError("path has no in-sample returns");
    }
    std::vector<double> mart(n), vol(n);
    for (std::size_t t = 0; t < n; ++t) {
        if (!(v[t] > 0.0)) {
            throw InvalidPathError("volatility must be positive at every t");
        }
        const double v2 = v[t] * v[t];
        const double e = r[t] / v[t];
        mart[t] = v2 * (e * e - 1.0);
        vol[t] = v2 - sigma2;
    }
    const double mu = mean_hat(r);
    VarErrorDecomposition d;
    d.martingale_term = accurate_sum(mart) / static_cast<double>(n);
    d.longmem_term = accurate_sum(vol) / static_cast<double>(n);
    d.mean_sq_term = -mu * mu;
    return d;
}

VarErrorDecomposition decompose_var_error(const SamplePath& path, const ModelSpec& spec) {
    return decompose_var_error(path, sigma_squared(spec, path.trunc));
}

VDecomposition v_decomposition(const SamplePath& path, const ModelSpec& spec) {
    const std::size_t n = path.n;
    const std::size_t Mb = path.trunc.b;
    if (Mb != path.presample + 1 || path.y.size() != n) {
        throw InvalidPathError("path pre-sample window does not match its filter truncation");
    }
    const std::vector<double> b = build_coeffs(spec.b, Mb);
    const double e2x = gaussian_exp_moment(x_variance(spec, path.trunc.a), 2.0);
    const double d2 = spec.delta * spec.delta;

    // Per-index pieces on the extended (pre-sample + in-sample) window.
    const std::size_t len = path.r.size();
    std::vector<double> u1(len), u2(len), r2(len);
    for (std::size_t s = 0; s < len; ++s) {
        if (!(path.v[s] > 0.0)) {
            throw InvalidPathError("volatility must be positive at every t");
        }
        const double e = path.r[s] / path.v[s];
        const double ex = std::exp(2.0 * path.x[s]);
        u1[s] = ex * (e * e - 1.0);
        u2[s] = ex - e2x;
        r2[s] = path.r[s] * path.r[s];
    }
    std::vector<double> t1(n), t2(n), t3(n);
    for (std::size_t t = 0; t < n; ++t) {
        const std::size_t s0 = t + Mb - 1;  // index of time t in the extended arrays
        double a1 = 0.0, a2 = 0.0, diag = 0.0;
        for (std::size_t j = 0; j < Mb; ++j) {
            const double w = b[j] * b[j];
            a1 += w * u1[s0 - j];
            a2 += w * u2[s0 - j];
            diag += w * r2[s0 - j];
        }
        t1[t] = a1;
        t2[t] = a2;
        // sum_{i != j} b_i b_j r_{t-i} r_{t-j} = y_t^2 - sum_j b_j^2 r_{t-j}^2
        t3[t] = path.y[t] * path.y[t] - diag;
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    VDecomposition d;
    d.v1 = d2 * scale * accurate_sum(t1);
    d.v2 = d2 * scale * accurate_sum(t2);
    d.v3 = scale * accurate_sum(t3);
    return d;
}

namespace {

double lm_beta(const ModelSpec& spec) {
    const auto* h = std::get_if<HyperbolicLM>(&spec.a);
    if (!h) {
        throw NotApplicableError("linearization applies to long-memory latent processes only");
    }
    return h->beta;
}

}  // namespace

double linearized_term(const SamplePath& path, const ModelSpec& spec) {
    const double beta = lm_beta(spec);
    const double n = static_cast<double>(path.n);
    const double kp = spec.delta * spec.delta * k_prime_zero(spec, path.trunc);
    return kp * std::pow(n, beta - 1.5) * accurate_sum(path.x_in());
}

double linearization_gap(const SamplePath& path, const ModelSpec& spec) {
    const double beta = lm_beta(spec);
    const double sigma2 = sigma_squared(spec, path.trunc);
    const double kp = spec.delta * spec.delta * k_prime_zero(spec, path.trunc);
    const auto v = path.v_in();
    const auto x = path.x_in();
    std::vector<double> terms(path.n);
    for (std::size_t t = 0; t < path.n; ++t) {
        terms[t] = v[t] * v[t] - sigma2 - kp * x[t];
    }
    return std::pow(static_cast<double>(path.n), beta - 1.5) * accurate_sum(terms);
}

}  // namespace lmsv
