#include "lmsv/asymptotics.hpp"
#include "lmsv/errors.hpp"
#include "lmsv/estimators.hpp"
#include "lmsv/simulate.hpp"

#include <doctest.h>

#include <cmath>

using namespace lmsv;

namespace {

ModelSpec spec_with(CoefficientSpec a, std::vector<double> b, double r_f = 0.05) {
    ModelSpec s;
    s.a = std::move(a);
    s.b = ExplicitFinite{std::move(b)};
    s.r_f = r_f;
    return s;
}

// Gamma-function form of the Beta integral, via std::lgamma only.
double beta_oracle(double beta) {
    return std::exp(std::lgamma(1.0 - beta) + std::lgamma(2.0 * beta - 1.0) - std::lgamma(beta));
}

// Var(sum_{t<n} x_t) for finite taps straight from the double sum over (s, t).
double brute_partial_sum_var(const std::vector<double>& a, std::size_t n) {
    const std::size_t M = a.size();
    // x_t = sum_i a_i z_{t-i}; coefficient of z_{t-i} in sum_t x_t
    std::vector<double> w(n + M - 1, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t i = 0; i < M; ++i) w[t + M - 1 - i] += a[i];
    }
    double v = 0.0;
    for (double c : w) v += c * c;
    return v;
}

}  // namespace

TEST_CASE("beta integral") {
    CHECK(beta_integral(0.75) == doctest::Approx(5.24412).epsilon(1e-6));
    CHECK(beta_integral(0.6) == doctest::Approx(6.83810).epsilon(1e-5));
    for (double b : {0.55, 0.6, 0.75, 0.9, 0.95}) {
        CHECK(beta_integral(b) == doctest::Approx(beta_oracle(b)).epsilon(1e-12));
        CHECK(beta_integral_quadrature(b) == doctest::Approx(beta_oracle(b)).epsilon(1e-8));
    }
    for (double b : {0.5, 1.0, 0.3, 1.2}) {
        CHECK_THROWS_AS(beta_integral(b), DomainError);
        CHECK_THROWS_AS(xi_squared(1.0, b), DomainError);
    }
}

TEST_CASE("xi squared") {
    CHECK(xi_squared(1.0, 0.75) == doctest::Approx(13.9843).epsilon(1e-5));
    CHECK(xi_squared(2.0, 0.75) == doctest::Approx(55.9373).epsilon(1e-5));
    CHECK(xi_squared(1.0, 0.6) == doctest::Approx(9.49736).epsilon(1e-5));
    for (double b : {0.6, 0.75, 0.9}) {
        const double closed = beta_oracle(b) / ((1.0 - b) * (3.0 - 2.0 * b));
        CHECK(xi_squared_closed_form(1.0, b) == doctest::Approx(closed).epsilon(1e-12));
        CHECK(xi_squared_kernel(1.0, b) == doctest::Approx(closed).epsilon(1e-8));
        CHECK(xi_squared(3.0, b) == doctest::Approx(9.0 * xi_squared(1.0, b)).epsilon(1e-13));
    }
}

TEST_CASE("covariance summation oracle") {
    // n = 1: the whole sum is gamma(0)
    const double one = cov_sum_limit(HyperbolicLM{1.0, 0.75}, std::vector<std::size_t>{1})[0];
    CHECK(one == doctest::Approx(2.612375348685488).epsilon(1e-5));

    // Cesaro sums grow monotonically toward the limit from below
    const std::vector<std::size_t> grid{256, 512, 1024, 2048, 4096};
    const auto vals = cov_sum_limit(HyperbolicLM{1.0, 0.75}, grid);
    for (std::size_t i = 1; i < vals.size(); ++i) CHECK(vals[i] > vals[i - 1]);
    CHECK(vals.back() < xi_squared(1.0, 0.75));

    for (double b : {0.6, 0.75, 0.9}) {
        const double ext = cov_sum_extrapolated(HyperbolicLM{1.0, b}, 1024, 1 << 16);
        CHECK(ext == doctest::Approx(xi_squared_closed_form(1.0, b)).epsilon(0.02));
    }
    CHECK_THROWS_AS(cov_sum_limit(Geometric{0.5, 1.0}, grid), NotApplicableError);
}

TEST_CASE("covariance summation matches a brute-force double sum") {
    // Var(sum_{t<n} x_t) for a long but finite tap vector, plus the leading-order
    // tail n^2 int_M^inf p^{-3/2} dp = 2 n^2 / sqrt(M) of the dropped coefficients.
    const std::size_t n = 16, M = 1 << 16;
    const auto a = build_coeffs(HyperbolicLM{1.0, 0.75}, M);
    const double exact = brute_partial_sum_var(a, n);
    const double tail = 2.0 * n * n / std::sqrt(static_cast<double>(M));
    const double nn = std::pow(static_cast<double>(n), 1.5);
    const double oracle = cov_sum_limit(HyperbolicLM{1.0, 0.75}, std::vector<std::size_t>{n})[0];
    CHECK(oracle > exact / nn);
    CHECK(oracle == doctest::Approx((exact + tail) / nn).epsilon(2e-4));
}

TEST_CASE("cesaro variance of finite taps") {
    const std::vector<double> a{0.5, -0.2, 0.3};
    for (std::size_t n : {1, 2, 5, 40}) {
        CHECK(cesaro_variance(a, n) ==
              doctest::Approx(brute_partial_sum_var(a, n) / static_cast<double>(n)).epsilon(1e-12));
    }
}

TEST_CASE("lambda squared") {
    CHECK(lambda_squared(spec_with(ExplicitFinite{{0.0}}, {1.0, 0.5})) == doctest::Approx(2.25));
    CHECK(lambda_squared(spec_with(ExplicitFinite{{0.0}}, {1.0, -1.0})) == 0.0);
    CHECK(lambda_squared(spec_with(ExplicitFinite{{0.5}}, {1.0})) ==
          doctest::Approx(1.64872).epsilon(1e-5));
}

TEST_CASE("lambda squared against simulated mean variance") {
    const auto spec = spec_with(ExplicitFinite{{0.5}}, {1.0});
    SimConfig sc;
    sc.n = 100000;
    const auto resolved = resolve(spec, sc, sc.n);
    const PathSimulator sim(spec, resolved);
    double s = 0.0, s2 = 0.0;
    const int R = 500;
    for (int rep = 0; rep < R; ++rep) {
        const double w = std::sqrt(1e5) * mean_hat(sim.simulate(derive_seed(17, rep)).y);
        s += w;
        s2 += w * w;
    }
    const double var = (s2 - s * s / R) / (R - 1);
    CHECK(var / lambda_squared(spec) == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("v1, v2, v3 closed forms") {
    CHECK(v1_limit_var(spec_with(ExplicitFinite{{0.5}}, {1.0})) ==
          doctest::Approx(2.0 * std::exp(2.0)).epsilon(1e-12));
    CHECK(v1_limit_var(spec_with(ExplicitFinite{{0.5}}, {1.0})) ==
          doctest::Approx(14.7781).epsilon(1e-5));
    auto rad = spec_with(Geometric{0.5, 1.0}, {1.0, 0.5});
    rad.eps_law = InnovationLaw::Rademacher;
    CHECK(v1_limit_var(rad) == 0.0);
    CHECK(v1_limit_var(spec_with(ExplicitFinite{{0.0}}, {1.0, 1.0})) == doctest::Approx(8.0));

    CHECK(v3_limit_var(spec_with(ExplicitFinite{{0.5}}, {1.0})) == 0.0);
    const double v3 = v3_limit_var(spec_with(ExplicitFinite{{0.0}}, {1.0, 1.0}));
    CHECK(v3 >= 2.0);
    CHECK(v3 == doctest::Approx(4.0));
    CHECK(v3_limit_var(spec_with(Geometric{0.3, 0.4}, {1.0, -0.5, 0.2})) >= 0.0);

    const double e4 = std::exp(4.0);
    CHECK(v2_limit_var(spec_with(ExplicitFinite{{1.0}}, {1.0})) ==
          doctest::Approx(e4 * (e4 - 1.0)).epsilon(1e-12));
    CHECK(v2_limit_var(spec_with(ExplicitFinite{{1.0}}, {1.0})) ==
          doctest::Approx(2926.36).epsilon(1e-6));
    CHECK(v2_limit_var(spec_with(ExplicitFinite{{0.0}}, {1.0, 0.5})) == 0.0);
    CHECK_THROWS_AS(v2_limit_var(spec_with(HyperbolicLM{0.2, 0.75}, {1.0})), NotApplicableError);

    // explicit taps with zero interior autocovariance still sum every lag
    const auto gap = spec_with(ExplicitFinite{{0.3, 0.0, 0.0, 0.4}}, {1.0});
    const double t2 = 0.09 + 0.16;
    const double expected = std::exp(4.0 * t2) * ((std::exp(4.0 * t2) - 1.0) +
                                                  2.0 * (std::exp(4.0 * 0.12) - 1.0));
    CHECK(v2_limit_var(gap) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("v2 against simulation") {
    const auto spec = spec_with(Geometric{0.5, 1.0}, {1.0});
    SimConfig sc;
    sc.n = 1 << 15;
    const auto resolved = resolve(spec, sc, sc.n);
    const PathSimulator sim(spec, resolved);
    double s = 0.0, s2 = 0.0;
    const int R = 500;
    for (int rep = 0; rep < R; ++rep) {
        const double v = v_decomposition(sim.simulate(derive_seed(23, rep)), spec).v2;
        s += v;
        s2 += v * v;
    }
    const double var = (s2 - s * s / R) / (R - 1);
    CHECK(var / v2_limit_var(spec, {resolved.M, resolved.M_b}) == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("composed constants") {
    const auto flat = spec_with(ExplicitFinite{{0.0}}, {1.0}, 0.05);
    CHECK(xi1_squared(flat) == doctest::Approx(1.00125).epsilon(1e-12));
    auto tiny = spec_with(Geometric{0.5, 0.5}, {1.0, 0.5}, 1e-9);
    CHECK(xi1_squared(tiny) == doctest::Approx(lambda_squared(tiny) / sigma_y_squared(tiny)).epsilon(1e-12));

    for (const auto& spec : {spec_with(Geometric{0.5, 0.5}, {1.0, 0.5}, 0.6),
                             spec_with(ExplicitFinite{{0.2, 0.1}}, {1.0, -0.3}, 0.2)}) {
        const auto c = compute_constants(spec);
        REQUIRE(c.g2);
        REQUIRE(c.v2_var);
        REQUIRE(c.xi1_2);
        CHECK(*c.g2 == c.v1_var + *c.v2_var + c.v3_var);
        const double sy2 = c.sigma_y2;
        CHECK(*c.xi1_2 == doctest::Approx(c.lambda2 / sy2 + spec.r_f * spec.r_f * *c.g2 /
                                                                (4.0 * sy2 * sy2 * sy2))
                              .epsilon(1e-14));
        CHECK(c.sr_limit_var == *c.xi1_2);
        CHECK(c.rate_exponent == -0.5);
        CHECK_FALSE(c.xi2);
    }
}

TEST_CASE("filtered long-memory constants") {
    const auto one = spec_with(HyperbolicLM{1.0, 0.75}, {1.0});
    CHECK(xi2_squared_filtered(one) == xi_squared(1.0, 0.75));
    const auto two = spec_with(HyperbolicLM{1.0, 0.75}, {1.0, 0.5});
    CHECK(xi2_squared_filtered(two) == doctest::Approx(21.8505).epsilon(1e-5));
    const auto big = spec_with(HyperbolicLM{2.0, 0.75}, {1.0, 0.5});
    CHECK(xi2_squared_filtered(big) == doctest::Approx(4.0 * xi2_squared_filtered(two)).epsilon(1e-13));

    const Truncation trunc{1 << 16, kUnbounded};
    auto lm = spec_with(HyperbolicLM{0.2, 0.75}, {1.0}, 0.05);
    const double sigma2 = std::exp(2.0 * x_variance(lm, trunc.a));
    CHECK(sr_limit_var_lm(lm, trunc) ==
          doctest::Approx(0.05 * 0.05 * xi_squared(0.2, 0.75) / sigma2).epsilon(1e-12));
    auto doubled = lm;
    doubled.r_f = 0.1;
    CHECK(sr_limit_var_lm(doubled, trunc) ==
          doctest::Approx(4.0 * sr_limit_var_lm(lm, trunc)).epsilon(1e-13));
    lm.r_f = 1e-10;
    CHECK(sr_limit_var_lm(lm, trunc) < 1e-18);

    const auto c = compute_constants(spec_with(HyperbolicLM{0.2, 0.75}, {1.0}, 0.6));
    CHECK(c.rate_exponent == -0.25);
    CHECK_FALSE(c.v2_var);
    CHECK_FALSE(c.xi1_2);
    REQUIRE(c.xi2);
    CHECK(*c.xi2 == doctest::Approx(0.04 * 13.9843).epsilon(1e-5));
    CHECK_THROWS_AS(xi1_squared(spec_with(HyperbolicLM{0.2, 0.75}, {1.0})), NotApplicableError);
    CHECK_THROWS_AS(sr_limit_var_lm(spec_with(Geometric{0.5, 1.0}, {1.0})), NotApplicableError);
}

TEST_CASE("rate exponent") {
    CHECK(rate_exponent(spec_with(Geometric{0.5, 1.0}, {1.0})) == -0.5);
    CHECK(rate_exponent(spec_with(ExplicitFinite{{0.1}}, {1.0})) == -0.5);
    CHECK(rate_exponent(spec_with(HyperbolicLM{1.0, 0.75}, {1.0})) == doctest::Approx(-0.25));
    CHECK(rate_exponent(spec_with(HyperbolicLM{1.0, 0.999999}, {1.0})) ==
          doctest::Approx(-0.5).epsilon(1e-5));
}
