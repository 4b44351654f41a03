#include "lmsv/asymptotics.hpp"

#include "lmsv/errors.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <numeric>
#include <sstream>

namespace lmsv {

namespace {

using boost::math::quadrature::tanh_sinh;

constexpr double kQuadTol = 1e-10;

void require_beta(double beta) {
    if (!(beta > 0.5 && beta < 1.0)) {
        std::ostringstream os;
        os << "beta = " << beta << " outside (1/2, 1); the integral diverges";
        throw DomainError(os.str());
    }
}

const HyperbolicLM& require_lm(const CoefficientSpec& a) {
    const auto* h = std::get_if<HyperbolicLM>(&a);
    if (!h) {
        throw NotApplicableError("long-memory latent coefficients required");
    }
    return *h;
}

void require_gaussian(const ModelSpec& spec) {
    if (spec.z_law != InnovationLaw::StandardNormal) {
        throw NoClosedFormError("limit variances need Gaussian z for closed forms");
    }
}

// Concrete tap vector for a truncation; unbounded summable specs are cut
// where the remaining L2 mass is below double precision.
std::vector<double> taps(const CoefficientSpec& spec, std::size_t M) {
    if (M != kUnbounded) {
        return build_coeffs(spec, M);
    }
    if (const auto* e = std::get_if<ExplicitFinite>(&spec)) {
        return e->values;
    }
    if (const auto* g = std::get_if<Geometric>(&spec)) {
        if (g->rho == 0.0) return {g->scale};
        const double m = std::log(1e-17) / (2.0 * std::log(std::abs(g->rho)));
        return build_coeffs(spec, static_cast<std::size_t>(std::ceil(m)) + 1);
    }
    throw NotApplicableError("untruncated long-memory coefficients have no finite tap vector");
}

double autocov_of(std::span<const double> c, std::size_t h) {
    if (h >= c.size()) return 0.0;
    double s = 0.0;
    for (std::size_t j = 0; j + h < c.size(); ++j) s += c[j] * c[j + h];
    return s;
}

// gamma_a(h) = sum_j a_j a_{j+h} for the latent coefficients.
double latent_autocov(const CoefficientSpec& a, std::size_t M, std::size_t h) {
    if (const auto* hl = std::get_if<HyperbolicLM>(&a)) {
        const std::size_t J = (M == kUnbounded) ? (std::size_t{1} << 20) : M;
        if (h >= J) return 0.0;
        double s = 0.0;
        for (std::size_t j = J - h; j-- > 0;) {
            s += std::pow(static_cast<double>(j + 1), -hl->beta) *
                 std::pow(static_cast<double>(j + h + 1), -hl->beta);
        }
        s *= hl->scale * hl->scale;
        if (M == kUnbounded) {
            // integral tail, (x+1)^{-beta}(x+h+1)^{-beta} ~ x^{-2 beta} for x >> h
            s += hl->scale * hl->scale * std::pow(static_cast<double>(J - h), 1.0 - 2.0 * hl->beta) /
                 (2.0 * hl->beta - 1.0);
        }
        return s;
    }
    if (const auto* g = std::get_if<Geometric>(&a)) {
        const double r2 = g->rho * g->rho;
        double s = g->scale * g->scale * std::pow(g->rho, static_cast<double>(h)) / (1.0 - r2);
        if (M != kUnbounded) {
            if (h >= M) return 0.0;
            s *= 1.0 - std::pow(r2, static_cast<double>(M - h));
        }
        return s;
    }
    const auto c = taps(a, M);
    return autocov_of(c, h);
}

// int_0^1 f(t) dt where f receives t and 1 - t, both accurate near the endpoints.
template <class F>
double integrate_unit(F f, double tol) {
    tanh_sinh<double> integrator;
    return integrator.integrate(
        [&](double t, double tc) {
            const double left = tc < 0 ? -tc : t;         // t
            const double right = tc > 0 ? tc : 1.0 - t;  // 1 - t
            return f(left, right);
        },
        0.0, 1.0, tol);
}

}  // namespace

double beta_integral(double beta) {
    require_beta(beta);
    return std::tgamma(1.0 - beta) * std::tgamma(2.0 * beta - 1.0) / std::tgamma(beta);
}

double beta_integral_quadrature(double beta) {
    require_beta(beta);
    // x = t / (1 - t): x^{-beta} (1 + x)^{-beta} dx = t^{-beta} (1 - t)^{2 beta - 2} dt
    return integrate_unit(
        [beta](double t, double tc) { return std::pow(t, -beta) * std::pow(tc, 2.0 * beta - 2.0); },
        kQuadTol);
}

double xi_squared_closed_form(double C, double beta) {
    return C * C * beta_integral(beta) / ((1.0 - beta) * (3.0 - 2.0 * beta));
}

double xi_squared_kernel(double C, double beta) {
    require_beta(beta);
    const double e = 1.0 - beta;
    // u in [0, 1]: inner = int_0^{1-u} w^{-beta} dw
    auto inner_pos = [e](double width) { return std::pow(width, e) / e; };
    // u = -s < 0: inner = int_0^1 (v + s)^{-beta} dv = ((1 + s)^e - s^e) / e
    auto inner_neg = [e](double s) {
        if (s == 0.0) return 1.0 / e;
        return std::pow(s, e) * std::expm1(e * std::log1p(1.0 / s)) / e;
    };
    const double pos = integrate_unit(
        [&](double u, double uc) {
            const double k = inner_pos(uc);
            (void)u;
            return k * k;
        },
        kQuadTol);
    // s = t / (1 - t)
    const double neg = integrate_unit(
        [&](double t, double tc) {
            const double s = t / tc;
            const double k = inner_neg(s) / tc;
            return k * k;
        },
        kQuadTol);
    return C * C * (pos + neg);
}

double xi_squared(double C, double beta) {
    const double closed = xi_squared_closed_form(C, beta);
    const double kernel = xi_squared_kernel(C, beta);
    if (std::abs(closed - kernel) > 1e-4 * std::abs(closed)) {
        std::ostringstream os;
        os.precision(10);
        os << "xi^2 routes disagree at beta = " << beta << ": closed form " << closed
           << ", squared kernel " << kernel;
        throw ConsistencyError(os.str());
    }
    return closed;
}

std::vector<double> cov_sum_limit(const CoefficientSpec& a, std::span<const std::size_t> n_grid) {
    const auto& h = require_lm(a);
    const double beta = h.beta;
    const double C = h.scale;
    std::vector<double> out;
    out.reserve(n_grid.size());
    for (std::size_t n : n_grid) {
        if (n == 0) {
            throw DomainError("n must be >= 1");
        }
        const std::size_t P = 64 * n;
        // Window sums S(p) - S(p - n) = sum_{i=max(0,p-n+1)}^{p} a_i, kept in a ring of a_i.
        std::vector<double> ring(n, 0.0);
        long double window = 0.0L;
        long double total = 0.0L;
        for (std::size_t p = 0; p <= P; ++p) {
            const double ai = C * std::pow(static_cast<double>(p + 1), -beta);
            const std::size_t slot = p % n;
            window += static_cast<long double>(ai) - ring[slot];
            ring[slot] = ai;
            total += window * window;
        }
        // Tail p > P: midpoint-rule window sum, then the sum over p as an integral.
        const double nd = static_cast<double>(n);
        // window(p) = int_{p-n+1/2}^{p+1/2} C (s+1)^{-beta} ds
        auto window_at = [&](double p) {
            const double q = p + 1.5;
            return C * std::pow(q, 1.0 - beta) *
                   -std::expm1((1.0 - beta) * std::log1p(-nd / q)) / (1.0 - beta);
        };
        const double start = static_cast<double>(P) + 0.5;
        const double tail = integrate_unit(
            [&](double t, double tc) {
                if (tc <= 0.0) return 0.0;
                const double w = window_at(start + nd * t / tc) / tc;
                return nd * w * w;
            },
            1e-12);
        const double var = static_cast<double>(total) + tail;
        out.push_back(var / std::pow(nd, 3.0 - 2.0 * beta));
    }
    return out;
}

double cov_sum_extrapolated(const CoefficientSpec& a, std::size_t n_min, std::size_t n_max) {
    const double beta = require_lm(a).beta;
    std::vector<std::size_t> grid;
    for (std::size_t n = n_min; n <= n_max; n *= 2) grid.push_back(n);
    if (grid.size() < 3) {
        throw DomainError("extrapolation needs at least three doubling grid points");
    }
    std::vector<double> v = cov_sum_limit(a, grid);
    for (double alpha : {1.0 - beta, 2.0 - 2.0 * beta}) {
        const double q = std::pow(2.0, alpha);
        for (std::size_t i = 0; i + 1 < v.size(); ++i) {
            v[i] = (q * v[i + 1] - v[i]) / (q - 1.0);
        }
        v.pop_back();
    }
    return v.back();
}

double cesaro_variance(std::span<const double> a, std::size_t n) {
    if (n == 0) {
        throw DomainError("n must be >= 1");
    }
    double s = autocov_of(a, 0);
    for (std::size_t k = 1; k < n; ++k) {
        s += 2.0 * (1.0 - static_cast<double>(k) / static_cast<double>(n)) * autocov_of(a, k);
    }
    return s;
}

double lambda_squared(const ModelSpec& spec, Truncation trunc) {
    const double sb = coeff_sum(spec.b, trunc.b);
    return sigma_squared(spec, trunc) * sb * sb;
}

double v1_limit_var(const ModelSpec& spec, Truncation trunc) {
    require_gaussian(spec);
    const double tau2 = x_variance(spec, trunc.a);
    const double b2 = coeff_l2(spec.b, trunc.b);
    const double d4 = std::pow(spec.delta, 4);
    return d4 * gaussian_exp_moment(tau2, 4.0) * centered_square_fourth_moment(spec.eps_law) * b2 *
           b2;
}

double v3_limit_var(const ModelSpec& spec, Truncation trunc) {
    require_gaussian(spec);
    const auto b = taps(spec.b, trunc.b);
    const double tau2 = x_variance(spec, trunc.a);
    const double d4 = std::pow(spec.delta, 4);
    double s = 0.0;
    for (std::size_t h = 1; h < b.size(); ++h) {
        const double gb = autocov_of(b, h);
        if (gb == 0.0) continue;
        // E e^{2 x_0 + 2 x_h} = exp(4 tau^2 + 4 gamma_a(h)) for Gaussian x
        s += std::exp(4.0 * tau2 + 4.0 * latent_autocov(spec.a, trunc.a, h)) * gb * gb;
    }
    return 4.0 * d4 * s;
}

double v3_limit_var_printed(const ModelSpec& spec, Truncation trunc) {
    require_gaussian(spec);
    const auto b = taps(spec.b, trunc.b);
    const double e2x = gaussian_exp_moment(x_variance(spec, trunc.a), 2.0);
    const std::size_t m = b.size();
    double first = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (i != j) first += b[i] * b[i] * b[j] * b[j];
    double second = 0.0;
    for (std::size_t k = 1; k < m; ++k)
        for (std::size_t i = 0; i + k < m; ++i)
            for (std::size_t j = 0; j + k < m; ++j)
                if (i != j) second += b[i] * b[i + k] * b[j] * b[j + k];
    return std::pow(spec.delta, 4) * e2x * e2x * (first + second);
}

double v2_limit_var(const ModelSpec& spec, Truncation trunc) {
    require_gaussian(spec);
    if (is_long_memory(spec.a)) {
        throw NotApplicableError(
            "covariances of e^{2x} are not summable under long memory; use sr_limit_var_lm");
    }
    const double tau2 = x_variance(spec, trunc.a);
    const double b2 = coeff_l2(spec.b, trunc.b);
    const auto a = taps(spec.a, trunc.a);
    const bool geometric = std::holds_alternative<Geometric>(spec.a);
    double sum = std::expm1(4.0 * latent_autocov(spec.a, trunc.a, 0));
    for (std::size_t k = 1; k < a.size(); ++k) {
        const double term = 2.0 * std::expm1(4.0 * latent_autocov(spec.a, trunc.a, k));
        sum += term;
        if (geometric && std::abs(term) < 1e-12 * std::abs(sum)) break;
    }
    return std::pow(spec.delta, 4) * b2 * b2 * std::exp(4.0 * tau2) * sum;
}

double xi1_squared(const ModelSpec& spec, Truncation trunc) {
    if (is_long_memory(spec.a)) {
        throw NotApplicableError("xi1^2 is the short-memory limit variance");
    }
    const double sy2 = sigma_y_squared(spec, trunc);
    const double g2 = v1_limit_var(spec, trunc) + v2_limit_var(spec, trunc) + v3_limit_var(spec, trunc);
    return lambda_squared(spec, trunc) / sy2 + spec.r_f * spec.r_f * g2 / (4.0 * sy2 * sy2 * sy2);
}

double xi2_squared_filtered(const ModelSpec& spec, Truncation trunc) {
    const auto& h = require_lm(spec.a);
    const double c1 = h.scale * coeff_l2(spec.b, trunc.b);
    return xi_squared(c1, h.beta);
}

double sr_limit_var_lm(const ModelSpec& spec, Truncation trunc) {
    require_lm(spec.a);
    require_gaussian(spec);
    const double e2x = gaussian_exp_moment(x_variance(spec, trunc.a), 2.0);
    const double sy = std::sqrt(sigma_y_squared(spec, trunc));
    const double f = spec.r_f * spec.delta * spec.delta * e2x / (sy * sy * sy);
    return f * f * xi2_squared_filtered(spec, trunc);
}

double rate_exponent(const ModelSpec& spec) {
    if (const auto* h = std::get_if<HyperbolicLM>(&spec.a)) {
        return 0.5 - h->beta;
    }
    return -0.5;
}

AsymptoticConstants compute_constants(const ModelSpec& spec, Truncation trunc) {
    validate(spec);
    AsymptoticConstants c;
    c.sigma2 = sigma_squared(spec, trunc);
    c.sigma_y2 = sigma_y_squared(spec, trunc);
    c.lambda2 = lambda_squared(spec, trunc);
    c.v1_var = v1_limit_var(spec, trunc);
    c.v3_var = v3_limit_var(spec, trunc);
    c.rate_exponent = rate_exponent(spec);
    if (const auto* h = std::get_if<HyperbolicLM>(&spec.a)) {
        c.xi2 = xi_squared(h->scale, h->beta);
        c.xi2_filtered = xi2_squared_filtered(spec, trunc);
        c.sr_limit_var = sr_limit_var_lm(spec, trunc);
    } else {
        c.v2_var = v2_limit_var(spec, trunc);
        c.g2 = c.v1_var + *c.v2_var + c.v3_var;
        c.xi1_2 = c.lambda2 / c.sigma_y2 +
                  spec.r_f * spec.r_f * *c.g2 / (4.0 * c.sigma_y2 * c.sigma_y2 * c.sigma_y2);
        c.sr_limit_var = *c.xi1_2;
    }
    return c;
}

}  // namespace lmsv
