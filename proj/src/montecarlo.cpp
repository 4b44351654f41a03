#include "lmsv/montecarlo.hpp"

#include "lmsv/errors.hpp"
#include "lmsv/estimators.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <mutex>
#include <numeric>
#include <thread>
#include <tuple>
#include <unordered_set>

namespace lmsv {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Moments {
    double mean = 0.0;
    double var = 0.0;  // divisor count - 1
};

Moments moments(std::span<const double> values) {
    Moments m;
    if (values.empty()) return m;
    m.mean = accurate_sum(values) / static_cast<double>(values.size());
    if (values.size() < 2) return m;
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        sq[i] = (values[i] - m.mean) * (values[i] - m.mean);
    }
    m.var = accurate_sum(sq) / static_cast<double>(values.size() - 1);
    return m;
}

double resolve_sigma_y2(const McConfig& config, Truncation trunc) {
    if (config.sigma_y2) return *config.sigma_y2;
    return sigma_y_squared(config.spec, trunc);
}

template <class Task>
void parallel_for(std::size_t count, std::size_t workers, Task task) {
    workers = std::max<std::size_t>(1, std::min(workers, count));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    task(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next = count;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

McReport run_grid(const McConfig& config, std::span<const std::size_t> grid, std::size_t reps,
                  const std::string& experiment) {
    validate(config);
    const SimConfig base = resolve_for_grid(config);
    const Truncation trunc{base.M, base.M_b};
    const double sigma_y2 = resolve_sigma_y2(config, trunc);

    std::vector<PathSimulator> sims;
    sims.reserve(grid.size());
    for (std::size_t n : grid) {
        SimConfig sc = base;
        sc.n = n;
        sims.emplace_back(config.spec, sc);
    }

    McReport report;
    report.experiment = experiment;
    report.rows.resize(grid.size() * reps);
    std::unordered_set<std::uint64_t> seen;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        for (std::size_t r = 0; r < reps; ++r) {
            const std::uint64_t seed = replication_seed(config.master_seed, grid[g], r);
            if (!seen.insert(seed).second) {
                throw ConsistencyError("replication seed collision");
            }
            report.rows[g * reps + r].seed = seed;
        }
    }
    parallel_for(report.rows.size(), config.workers, [&](std::size_t i) {
        const std::size_t g = i / reps;
        McRow row = run_replication(sims[g], sigma_y2, report.rows[i].seed);
        row.rep = i % reps;
        report.rows[i] = row;
    });
    report.summaries = summarize(report.rows);
    for (const auto& s : report.summaries) report.flagged += s.flagged;
    return report;
}

}  // namespace

void validate(const McConfig& config) {
    validate(config.spec);
    if (config.n_grid.empty()) {
        throw ConfigError("mc.n_grid", "must not be empty");
    }
    for (std::size_t i = 0; i < config.n_grid.size(); ++i) {
        if (config.n_grid[i] == 0) throw ConfigError("mc.n_grid", "entries must be >= 1");
        if (i > 0 && config.n_grid[i] <= config.n_grid[i - 1]) {
            throw ConfigError("mc.n_grid", "must be strictly increasing");
        }
    }
    if (config.replications == 0) throw ConfigError("mc.replications", "must be >= 1");
    if (config.workers == 0) throw ConfigError("mc.workers", "must be >= 1");
    if (config.normality_replications == 0) {
        throw ConfigError("mc.normality_replications", "must be >= 1");
    }
    if (config.sigma_y2 && !(*config.sigma_y2 > 0.0)) {
        throw ConfigError("mc.sigma_y2", "must be positive");
    }
}

SimConfig resolve_for_grid(const McConfig& config) {
    std::size_t n_max = config.n_grid.empty() ? config.sim.n : config.n_grid.back();
    if (config.normality_n) n_max = std::max(n_max, *config.normality_n);
    SimConfig sc = config.sim;
    sc.n = n_max;
    return resolve(config.spec, sc, n_max);
}

std::uint64_t replication_seed(std::uint64_t master, std::size_t n, std::size_t index) {
    return mix64(mix64(mix64(master) ^ static_cast<std::uint64_t>(n)) ^
                 static_cast<std::uint64_t>(index));
}

McRow run_replication(const PathSimulator& sim, double sigma_y2, std::uint64_t seed) {
    const auto path = sim.simulate(seed);
    const double r_f = sim.spec().r_f;
    const double sy = std::sqrt(sigma_y2);
    McRow row;
    row.n = path.n;
    row.seed = seed;
    try {
        const auto est = sharpe_hat(path.y, r_f);
        row.sr_hat = est.sr_hat;
        row.sr_error = est.sr_hat + r_f / sy;
        row.mean_term = est.mu_hat / sy;
        row.var_term = r_f * (est.sigma2_hat - sigma_y2) / (2.0 * sy * sy * sy);
    } catch (const DegenerateSampleError&) {
        row.flagged = true;
        row.sr_hat = row.sr_error = row.mean_term = row.var_term = kNaN;
    }
    return row;
}

McRow run_replication(const ModelSpec& spec, std::size_t n, const SimConfig& sim,
                      std::uint64_t seed) {
    SimConfig sc = sim;
    sc.n = n;
    PathSimulator simulator(spec, sc);
    const auto& resolved = simulator.config();
    return run_replication(simulator, sigma_y_squared(spec, {resolved.M, resolved.M_b}), seed);
}

McReport run_experiment(const McConfig& config, const std::string& experiment) {
    return run_grid(config, config.n_grid, config.replications, experiment);
}

McReport run_experiment_at(const McConfig& config, std::size_t n, std::size_t replications,
                           const std::string& experiment) {
    const std::size_t grid[] = {n};
    return run_grid(config, grid, replications, experiment);
}

std::vector<NSummary> summarize(std::span<const McRow> rows) {
    std::vector<std::size_t> ns;
    for (const auto& r : rows) ns.push_back(r.n);
    std::sort(ns.begin(), ns.end());
    ns.erase(std::unique(ns.begin(), ns.end()), ns.end());

    std::vector<NSummary> out;
    for (std::size_t n : ns) {
        // Sorting by seed makes the result independent of row order.
        std::vector<const McRow*> sel;
        for (const auto& r : rows) {
            if (r.n == n) sel.push_back(&r);
        }
        std::sort(sel.begin(), sel.end(), [](const McRow* a, const McRow* b) {
            return std::tie(a->seed, a->rep) < std::tie(b->seed, b->rep);
        });
        NSummary s;
        s.n = n;
        s.count = sel.size();
        std::vector<double> err, mean, var;
        for (const McRow* r : sel) {
            if (r->flagged) {
                ++s.flagged;
                continue;
            }
            err.push_back(r->sr_error);
            mean.push_back(r->mean_term);
            var.push_back(r->var_term);
        }
        const auto me = moments(err), mm = moments(mean), mv = moments(var);
        s.sd_error = std::sqrt(me.var);
        s.sd_mean_term = std::sqrt(mm.var);
        s.sd_var_term = std::sqrt(mv.var);
        s.mean_share = me.var > 0.0 ? mm.var / me.var : kNaN;
        out.push_back(s);
    }
    return out;
}

RateRecord estimate_rate(std::span<const NSummary> summaries, double expected) {
    if (summaries.size() < 3) {
        throw ConfigError("mc.n_grid", "rate regression needs at least three grid points");
    }
    std::vector<double> lx, ly;
    for (const auto& s : summaries) {
        if (!(s.sd_error > 0.0)) {
            throw DegenerateSampleError("zero error sd at n = " + std::to_string(s.n));
        }
        lx.push_back(std::log(static_cast<double>(s.n)));
        ly.push_back(std::log(s.sd_error));
    }
    const double k = static_cast<double>(lx.size());
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / k;
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / k;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    RateRecord rec;
    rec.slope = sxy / sxx;
    rec.intercept = my - rec.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double e = ly[i] - rec.intercept - rec.slope * lx[i];
        rss += e * e;
    }
    rec.slope_stderr = std::sqrt(rss / (k - 2.0) / sxx);
    const boost::math::students_t dist(k - 2.0);
    const double tq = boost::math::quantile(dist, 0.975);
    rec.ci_low = rec.slope - tq * rec.slope_stderr;
    rec.ci_high = rec.slope + tq * rec.slope_stderr;
    rec.expected = expected;
    return rec;
}

RateRecord estimate_rate(const McConfig& config) {
    if (config.replications < 100) {
        throw ConfigError("mc.replications", "rate estimation needs at least 100 replications");
    }
    const auto report = run_experiment(config, "mc-rate");
    return estimate_rate(report.summaries, rate_exponent(config.spec));
}

double ks_band_1pct(std::size_t count) {
    return 1.63 / std::sqrt(static_cast<double>(count));
}

double ks_band_5pct(std::size_t count) {
    return 1.36 / std::sqrt(static_cast<double>(count));
}

NormalityRecord normality_check(std::span<const double> errors) {
    if (errors.size() < 3) {
        throw DegenerateSampleError("normality check needs at least three values");
    }
    const auto m = moments(errors);
    if (!(m.var > 0.0)) {
        throw DegenerateSampleError("errors have zero spread");
    }
    const double sd = std::sqrt(m.var);
    std::vector<double> z(errors.size());
    std::transform(errors.begin(), errors.end(), z.begin(),
                   [&](double e) { return (e - m.mean) / sd; });
    std::sort(z.begin(), z.end());
    const double R = static_cast<double>(z.size());
    NormalityRecord rec;
    rec.count = z.size();
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double cdf = 0.5 * std::erfc(-z[i] / std::sqrt(2.0));
        rec.ks_distance = std::max({rec.ks_distance, static_cast<double>(i + 1) / R - cdf,
                                    cdf - static_cast<double>(i) / R});
        const double d = (errors[i] - m.mean);
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= R;
    m3 /= R;
    m4 /= R;
    rec.skewness = m3 / std::pow(m2, 1.5);
    rec.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    return rec;
}

NormalityRecord normality_check(const McConfig& config, std::size_t n) {
    const auto report = run_experiment_at(config, n, config.normality_replications, "mc-normality");
    std::vector<double> errors;
    for (const auto& r : report.rows) {
        if (!r.flagged) errors.push_back(r.sr_error);
    }
    auto rec = normality_check(errors);
    rec.n = n;
    return rec;
}

std::vector<double> mean_contribution(std::span<const NSummary> summaries) {
    std::vector<double> out;
    for (const auto& s : summaries) out.push_back(s.mean_share);
    return out;
}

std::vector<double> mean_contribution(const McConfig& config) {
    return mean_contribution(run_experiment(config, "mc-mean-share").summaries);
}

VarianceMatch variance_match(std::span<const McRow> rows, const ModelSpec& spec,
                             Truncation trunc) {
    VarianceMatch vm;
    vm.scale_exponent = -rate_exponent(spec);
    vm.limit_var = compute_constants(spec, trunc).sr_limit_var;
    for (const auto& s : summarize(rows)) {
        const double scale = std::pow(static_cast<double>(s.n), 2.0 * vm.scale_exponent);
        vm.n.push_back(s.n);
        vm.ratio.push_back(scale * s.sd_error * s.sd_error / vm.limit_var);
    }
    return vm;
}

VarianceMatch variance_match(const McConfig& config) {
    const auto report = run_experiment(config, "mc-variance");
    const auto sc = resolve_for_grid(config);
    return variance_match(report.rows, config.spec, {sc.M, sc.M_b});
}

McReport pseudo_error_report(std::span<const std::size_t> n_grid, std::size_t replications,
                             std::uint64_t seed) {
    McReport report;
    report.experiment = "self-test";
    for (std::size_t n : n_grid) {
        for (std::size_t r = 0; r < replications; ++r) {
            McRow row;
            row.n = n;
            row.rep = r;
            row.seed = replication_seed(seed, n, r);
            RngStream stream(row.seed);
            const double e =
                gen_innovations(InnovationLaw::StandardNormal, 1, stream)[0] /
                std::sqrt(static_cast<double>(n));
            row.sr_error = e;
            row.mean_term = e;
            row.var_term = 0.0;
            row.sr_hat = e;
            report.rows.push_back(row);
        }
    }
    report.summaries = summarize(report.rows);
    return report;
}

void write_rows_csv(std::ostream& os, const McReport& report) {
    os << "experiment,n,rep,seed,sr_hat,sr_error,mean_term,var_term\n";
    const auto old = os.precision(17);
    for (const auto& r : report.rows) {
        os << report.experiment << ',' << r.n << ',' << r.rep << ',' << r.seed << ',' << r.sr_hat
           << ',' << r.sr_error << ',' << r.mean_term << ',' << r.var_term << '\n';
    }
    os.precision(old);
}

}  // namespace lmsv
