#include "lmsv/asymptotics.hpp"
#include "lmsv/errors.hpp"
#include "lmsv/estimators.hpp"
#include "lmsv/montecarlo.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

using namespace lmsv;

namespace {

McConfig small_config(ModelSpec spec) {
    McConfig c;
    c.spec = std::move(spec);
    c.n_grid = {128, 256, 512};
    c.replications = 40;
    c.master_seed = 99;
    return c;
}

ModelSpec lm_spec(double beta = 0.75, std::vector<double> b = {1.0}) {
    ModelSpec s;
    s.a = HyperbolicLM{0.2, beta};
    s.b = ExplicitFinite{std::move(b)};
    s.r_f = 0.6;
    return s;
}

ModelSpec sm_spec() {
    ModelSpec s;
    s.a = Geometric{0.5, 0.5};
    s.b = ExplicitFinite{{1.0, 0.5}};
    s.r_f = 0.6;
    return s;
}

ModelSpec flat_spec(InnovationLaw eps = InnovationLaw::StandardNormal) {
    ModelSpec s;
    s.a = ExplicitFinite{{0.0}};
    s.b = ExplicitFinite{{1.0}};
    s.eps_law = eps;
    s.r_f = 0.6;
    return s;
}

}  // namespace

TEST_CASE("config validation") {
    auto c = small_config(sm_spec());
    CHECK_NOTHROW(validate(c));
    c.n_grid = {256, 128};
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = small_config(sm_spec());
    c.n_grid.clear();
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = small_config(sm_spec());
    c.replications = 0;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = small_config(sm_spec());
    c.workers = 0;
    CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("replication seeds are distinct") {
    std::set<std::uint64_t> seen;
    for (std::size_t n : {512, 1024, 2048, 4096, 8192, 16384}) {
        for (std::size_t r = 0; r < 2000; ++r) seen.insert(replication_seed(20240601, n, r));
    }
    CHECK(seen.size() == 6 * 2000);
    CHECK(replication_seed(1, 2, 3) == replication_seed(1, 2, 3));
    CHECK(replication_seed(1, 2, 3) != replication_seed(2, 2, 3));
}

TEST_CASE("run_replication") {
    SimConfig sc;
    const auto a = run_replication(sm_spec(), 1000, sc, 5);
    const auto b = run_replication(sm_spec(), 1000, sc, 5);
    CHECK(a == b);
    CHECK(a.n == 1000);
    SimConfig at = sc;
    at.n = 1000;
    const auto r = resolve(sm_spec(), at, 1000);
    CHECK(a.sr_error == doctest::Approx(a.sr_hat - true_sharpe(sm_spec(), {r.M, r.M_b})).epsilon(1e-12));

    // sigma_hat^2 = 1 - mu_hat^2 exactly for +-1 returns, so var_term = -r_f mu_hat^2 / 2
    const auto rad = flat_spec(InnovationLaw::Rademacher);
    for (std::uint64_t seed : {1, 2, 3, 4}) {
        const auto row = run_replication(rad, 777, sc, seed);
        const double mu = row.mean_term;  // sigma_y = 1
        CHECK(row.var_term == doctest::Approx(-0.6 * mu * mu / 2.0).epsilon(1e-9));
    }
}

TEST_CASE("delta-method remainder obeys the second-order bound") {
    const auto spec = sm_spec();
    const double sy2 = sigma_y_squared(spec);
    const double sy = std::sqrt(sy2);
    for (std::size_t n : {256, 4096}) {
        SimConfig sc;
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            const auto row = run_replication(spec, n, sc, seed);
            const double mu = row.mean_term * sy;
            const double d = row.var_term * 2.0 * sy2 * sy / spec.r_f;  // sigma_hat^2 - sigma_y^2
            const double lo = std::min(sy2, sy2 + d);
            // Lagrange remainders of s -> s^{-1/2} to first and second order
            const double bound = std::abs(mu * d) / (2.0 * std::pow(lo, 1.5)) +
                                 spec.r_f * 3.0 * d * d / (8.0 * std::pow(lo, 2.5));
            const double rem = row.sr_error - row.mean_term - row.var_term;
            CHECK(std::abs(rem) <= bound * (1.0 + 1e-9) + 1e-15);
        }
    }
}

TEST_CASE("experiments are identical across worker counts") {
    auto c = small_config(lm_spec());
    c.workers = 1;
    const auto one = run_experiment(c);
    c.workers = 3;
    const auto three = run_experiment(c);
    REQUIRE(one.rows.size() == 3 * 40);
    CHECK(one.rows == three.rows);
    for (std::size_t i = 0; i < one.summaries.size(); ++i) {
        CHECK(one.summaries[i].sd_error == three.summaries[i].sd_error);
    }
}

TEST_CASE("summaries do not depend on row order") {
    const auto report = run_experiment(small_config(sm_spec()));
    auto rows = report.rows;
    std::mt19937_64 g(3);
    std::shuffle(rows.begin(), rows.end(), g);
    const auto again = summarize(rows);
    REQUIRE(again.size() == report.summaries.size());
    for (std::size_t i = 0; i < again.size(); ++i) {
        CHECK(again[i].sd_error == report.summaries[i].sd_error);
        CHECK(again[i].mean_share == report.summaries[i].mean_share);
        CHECK(again[i].sd_var_term == report.summaries[i].sd_var_term);
    }
}

TEST_CASE("rate regression harness") {
    const std::vector<std::size_t> grid{512, 1024, 2048, 4096, 8192, 16384};
    const auto report = pseudo_error_report(grid, 2000, 1);
    const auto rate = estimate_rate(report.summaries, -0.5);
    CHECK(rate.slope == doctest::Approx(-0.5).epsilon(0.06));
    CHECK(rate.ci_low < -0.5);
    CHECK(rate.ci_high > -0.5);
    CHECK(rate.slope_stderr > 0.0);

    // exact power law: slope recovered to rounding, stderr ~ 0
    std::vector<NSummary> exact;
    for (std::size_t n : grid) {
        NSummary s;
        s.n = n;
        s.sd_error = 3.0 * std::pow(static_cast<double>(n), -0.3);
        exact.push_back(s);
    }
    const auto r = estimate_rate(exact, -0.3);
    CHECK(r.slope == doctest::Approx(-0.3).epsilon(1e-12));
    CHECK(r.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-10));
    CHECK(r.slope_stderr < 1e-10);

    CHECK_THROWS_AS(estimate_rate(std::span(exact).first(2), -0.3), ConfigError);
    exact[1].sd_error = 0.0;
    CHECK_THROWS_AS(estimate_rate(exact, -0.3), DegenerateSampleError);

    auto c = small_config(sm_spec());
    c.replications = 50;
    CHECK_THROWS_AS(estimate_rate(c), ConfigError);
}

TEST_CASE("normality harness") {
    std::mt19937_64 g(5);
    std::normal_distribution<double> nd;
    std::vector<double> z(2000);
    for (auto& v : z) v = 3.0 + 2.0 * nd(g);
    const auto rec = normality_check(z);
    CHECK(rec.ks_distance < ks_band_5pct(2000));
    CHECK(std::abs(rec.skewness) < 0.25);
    CHECK(std::abs(rec.excess_kurtosis) < 0.5);

    std::exponential_distribution<double> ed;
    for (auto& v : z) v = ed(g);
    const auto skewed = normality_check(z);
    CHECK(skewed.ks_distance > ks_band_1pct(2000));
    CHECK(skewed.skewness == doctest::Approx(2.0).epsilon(0.2));
    CHECK(skewed.excess_kurtosis > 3.0);

    CHECK(ks_band_1pct(2000) == doctest::Approx(1.63 / std::sqrt(2000.0)));
    CHECK_THROWS_AS(normality_check(std::vector<double>(10, 1.0)), DegenerateSampleError);
}

TEST_CASE("mean share vanishes when r_f dominates") {
    auto spec = sm_spec();
    spec.r_f = 10.0 * std::sqrt(sigma_y_squared(spec));
    auto c = small_config(spec);
    c.replications = 100;
    for (double s : mean_contribution(c)) CHECK(s < 0.05);
}

TEST_CASE("closed-form variance match") {
    McConfig c;
    c.spec = flat_spec();
    c.n_grid = {1 << 15};
    c.replications = 1000;
    c.master_seed = 4;
    const auto vm = variance_match(c);
    CHECK(vm.limit_var == doctest::Approx(1.0 + 0.36 / 2.0));
    CHECK(vm.scale_exponent == 0.5);
    CHECK(vm.ratio[0] == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("short-memory variance match") {
    McConfig c;
    c.spec = sm_spec();
    c.n_grid = {1 << 15};
    c.replications = 1000;
    c.master_seed = 8;
    const auto vm = variance_match(c);
    CHECK(vm.ratio[0] == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("filtered long-memory constant uses squared filter weights") {
    McConfig c;
    c.spec = lm_spec(0.75, {1.0, 0.5});
    c.n_grid = {1 << 13};
    c.replications = 300;
    c.master_seed = 12;
    const auto vm = variance_match(c);
    CHECK(vm.ratio[0] > 0.75);
    CHECK(vm.ratio[0] < 1.25);
    // C1 = C sum b_j would give a limit (1.5 / 1.25)^2 = 1.44 times larger
    CHECK(vm.ratio[0] / 1.44 < 0.75);
}

TEST_CASE("long-memory variance ratio is invariant to doubling r_f") {
    McConfig c;
    c.spec = lm_spec();
    c.n_grid = {1 << 12};
    c.replications = 200;
    c.master_seed = 13;
    const double base = variance_match(c).ratio[0];
    c.spec.r_f *= 2.0;
    const double doubled = variance_match(c).ratio[0];
    CHECK(doubled == doctest::Approx(base).epsilon(0.1));
}

TEST_CASE("rate at beta = 0.6") {
    McConfig c;
    c.spec = lm_spec(0.6);
    c.replications = 500;
    c.master_seed = 60;
    const auto rate = estimate_rate(c);
    CHECK(rate.expected == doctest::Approx(-0.1));
    CHECK(rate.slope == doctest::Approx(-0.1).epsilon(0.6));  // +-0.06
}

TEST_CASE("rows csv") {
    auto c = small_config(sm_spec());
    c.replications = 2;
    const auto report = run_experiment(c, "demo");
    std::ostringstream os;
    write_rows_csv(os, report);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "experiment,n,rep,seed,sr_hat,sr_error,mean_term,var_term");
    std::size_t count = 0;
    while (std::getline(is, line)) {
        CHECK(line.rfind("demo,", 0) == 0);
        ++count;
    }
    CHECK(count == report.rows.size());
}
