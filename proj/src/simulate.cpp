#include "lmsv/simulate.hpp"

#include "lmsv/config_io.hpp"
#include "lmsv/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdio>
#include <mutex>
#include <numeric>

namespace lmsv {

std::string to_string(ConvMethod method) {
    switch (method) {
        case ConvMethod::Direct:
            return "direct";
        case ConvMethod::Fft:
            return "fft";
        case ConvMethod::Auto:
            return "auto";
    }
    return "auto";
}

ConvMethod conv_method_from_string(const std::string& name) {
    if (name == "direct") return ConvMethod::Direct;
    if (name == "fft") return ConvMethod::Fft;
    if (name == "auto") return ConvMethod::Auto;
    throw DomainError("unknown conv_method '" + name + "' (expected direct, fft or auto)");
}

double default_trunc_tol(const CoefficientSpec& spec) {
    return is_long_memory(spec) ? 0.1 : 1e-6;
}

namespace {

std::size_t auto_truncation(const CoefficientSpec& spec, double tol, std::size_t n_max) {
    if (is_long_memory(spec)) {
        return 16 * n_max;
    }
    if (const auto* e = std::get_if<ExplicitFinite>(&spec)) {
        return e->values.size();
    }
    const auto& g = std::get<Geometric>(spec);
    if (g.rho == 0.0 || g.scale == 0.0) {
        return 1;
    }
    // scale^2 rho^{2M} / (1 - rho^2) <= tol * scale^2 / (1 - rho^2)
    const double m = std::log(tol) / (2.0 * std::log(std::abs(g.rho)));
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(m)));
}

void check_tail(const CoefficientSpec& spec, std::size_t M, double tol, const char* field) {
    const double total = coeff_l2(spec, M);
    const double tail = coeff_tail_l2(spec, M);
    if (tail > tol * total && tail > 0.0) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "L2 tail %.3g exceeds tolerance %.3g x %.6g", tail, tol,
                      total);
        throw ConfigError(field, buf);
    }
}

}  // namespace

SimConfig resolve(const ModelSpec& spec, SimConfig config, std::size_t n_max) {
    validate(spec);
    if (config.n == 0) {
        throw ConfigError("sim.n", "must be >= 1");
    }
    n_max = std::max(n_max, config.n);
    const double tol_a = config.trunc_tol.value_or(default_trunc_tol(spec.a));
    const double tol_b = config.trunc_tol.value_or(default_trunc_tol(spec.b));
    if (!(tol_a > 0.0) || !(tol_b > 0.0)) {
        throw ConfigError("sim.trunc_tol", "must be positive");
    }
    if (config.M == 0) config.M = auto_truncation(spec.a, tol_a, n_max);
    if (config.M_b == 0) config.M_b = auto_truncation(spec.b, tol_b, n_max);
    check_tail(spec.a, config.M, tol_a, "sim.M");
    check_tail(spec.b, config.M_b, tol_b, "sim.M_b");
    if (x_variance(spec, config.M) > kMaxLatentVariance) {
        throw ConfigError("model.a", "latent variance tau^2 exceeds 20; exp(x) moments overflow");
    }
    return config;
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix64(mix64(seed) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

void gen_innovations(InnovationLaw law, std::span<double> out, RngStream& stream) {
    auto& eng = stream.engine();
    switch (law) {
        case InnovationLaw::StandardNormal: {
            std::normal_distribution<double> normal(0.0, 1.0);
            for (double& v : out) v = normal(eng);
            break;
        }
        case InnovationLaw::Rademacher:
            for (double& v : out) v = (eng() >> 63) ? 1.0 : -1.0;
            break;
    }
}

std::vector<double> gen_innovations(InnovationLaw law, std::size_t count, RngStream& stream) {
    std::vector<double> out(count);
    gen_innovations(law, std::span(out), stream);
    return out;
}

// ---------------------------------------------------------------------------
// Convolution

namespace {

// FFTW's planner is not re-entrant; execution with new-array functions is.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};
using RealBuf = std::unique_ptr<double[], FftwFree>;
using CplxBuf = std::unique_ptr<fftw_complex[], FftwFree>;

RealBuf alloc_real(std::size_t n) {
    return RealBuf(fftw_alloc_real(n));
}
CplxBuf alloc_complex(std::size_t n) {
    return CplxBuf(fftw_alloc_complex(n));
}

}  // namespace

struct Convolver::FftState {
    std::size_t size = 0;
    CplxBuf kernel;
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;

    ~FftState() {
        std::lock_guard lock(fftw_planner_mutex());
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
    }
};

Convolver::Convolver(std::span<const double> coeffs, std::size_t n_out, ConvMethod method,
                     std::size_t fft_threshold)
    : coeffs_(coeffs.begin(), coeffs.end()), n_out_(n_out) {
    if (coeffs_.empty() || n_out == 0) {
        throw DimensionError("convolver needs at least one tap and one output");
    }
    bool use_fft = method == ConvMethod::Fft;
    if (method == ConvMethod::Auto) {
        use_fft = static_cast<double>(n_out) * static_cast<double>(coeffs_.size()) >
                  static_cast<double>(fft_threshold);
    }
    if (!use_fft) {
        return;
    }
    // Circular convolution of this size only wraps into the first M - 1
    // outputs, which are discarded.
    const std::size_t N = std::bit_ceil(input_length());
    const std::size_t H = N / 2 + 1;
    fft_ = std::make_unique<FftState>();
    fft_->size = N;
    fft_->kernel = alloc_complex(H);
    RealBuf rbuf = alloc_real(N);
    CplxBuf cbuf = alloc_complex(H);
    {
        std::lock_guard lock(fftw_planner_mutex());
        const int n = static_cast<int>(N);
        fft_->forward = fftw_plan_dft_r2c_1d(n, rbuf.get(), cbuf.get(), FFTW_ESTIMATE);
        fft_->backward = fftw_plan_dft_c2r_1d(n, cbuf.get(), rbuf.get(), FFTW_ESTIMATE);
    }
    std::fill_n(rbuf.get(), N, 0.0);
    std::copy(coeffs_.begin(), coeffs_.end(), rbuf.get());
    fftw_execute_dft_r2c(fft_->forward, rbuf.get(), fft_->kernel.get());
}

Convolver::~Convolver() = default;
Convolver::Convolver(Convolver&&) noexcept = default;
Convolver& Convolver::operator=(Convolver&&) noexcept = default;

std::vector<double> Convolver::apply(std::span<const double> innov) const {
    if (innov.size() != input_length()) {
        throw DimensionError("filter input has length " + std::to_string(innov.size()) +
                             ", expected n + M - 1 = " + std::to_string(input_length()));
    }
    const std::size_t M = coeffs_.size();
    std::vector<double> out(n_out_);
    if (!fft_) {
        for (std::size_t t = 0; t < n_out_; ++t) {
            const double* base = innov.data() + t + M - 1;
            double s = 0.0;
            for (std::size_t i = 0; i < M; ++i) {
                s += coeffs_[i] * base[-static_cast<std::ptrdiff_t>(i)];
            }
            out[t] = s;
        }
        return out;
    }
    const std::size_t N = fft_->size;
    const std::size_t H = N / 2 + 1;
    RealBuf rbuf = alloc_real(N);
    CplxBuf cbuf = alloc_complex(H);
    std::copy(innov.begin(), innov.end(), rbuf.get());
    std::fill(rbuf.get() + innov.size(), rbuf.get() + N, 0.0);
    fftw_execute_dft_r2c(fft_->forward, rbuf.get(), cbuf.get());
    for (std::size_t k = 0; k < H; ++k) {
        const double re = cbuf[k][0] * fft_->kernel[k][0] - cbuf[k][1] * fft_->kernel[k][1];
        const double im = cbuf[k][0] * fft_->kernel[k][1] + cbuf[k][1] * fft_->kernel[k][0];
        cbuf[k][0] = re;
        cbuf[k][1] = im;
    }
    fftw_execute_dft_c2r(fft_->backward, cbuf.get(), rbuf.get());
    const double scale = 1.0 / static_cast<double>(N);
    for (std::size_t t = 0; t < n_out_; ++t) {
        out[t] = rbuf[t + M - 1] * scale;
    }
    return out;
}

std::vector<double> linear_filter(std::span<const double> innov, std::span<const double> coeffs,
                                  std::size_t n, ConvMethod method) {
    if (coeffs.empty()) {
        throw DimensionError("filter needs at least one coefficient");
    }
    if (innov.size() != n + coeffs.size() - 1) {
        throw DimensionError("filter input has length " + std::to_string(innov.size()) +
                             ", expected n + M - 1 = " + std::to_string(n + coeffs.size() - 1));
    }
    return Convolver(coeffs, n, method).apply(innov);
}

// ---------------------------------------------------------------------------
// Paths

PathSimulator::PathSimulator(ModelSpec spec, SimConfig resolved_config)
    : spec_(std::move(spec)),
      config_(resolve(spec_, resolved_config, resolved_config.n)),
      a_(build_coeffs(spec_.a, config_.M)),
      b_(build_coeffs(spec_.b, config_.M_b)),
      x_filter_(a_, config_.n + config_.M_b - 1, config_.conv_method, config_.fft_threshold),
      y_filter_(b_, config_.n, config_.conv_method, config_.fft_threshold),
      digest_(spec_digest(spec_, config_)) {}

SamplePath PathSimulator::simulate(std::uint64_t seed) const {
    const std::size_t n = config_.n;
    const std::size_t pre = config_.M_b - 1;
    const std::size_t len = n + pre;

    RngStream z_stream(derive_seed(seed, 1));
    RngStream eps_stream(derive_seed(seed, 2));
    std::vector<double> z(x_filter_.input_length());
    std::vector<double> eps(len);
    gen_innovations(spec_.z_law, std::span(z), z_stream);
    gen_innovations(spec_.eps_law, std::span(eps), eps_stream);

    SamplePath path;
    path.n = n;
    path.presample = pre;
    path.seed = seed;
    path.spec_digest = digest_;
    path.trunc = Truncation{config_.M, config_.M_b};
    path.x = x_filter_.apply(z);
    path.v.resize(len);
    path.r.resize(len);
    for (std::size_t t = 0; t < len; ++t) {
        path.v[t] = spec_.delta * std::exp(path.x[t]);
        path.r[t] = path.v[t] * eps[t];
    }
    path.y = y_filter_.apply(path.r);
    return path;
}

SamplePath simulate_path(const ModelSpec& spec, const SimConfig& config) {
    return PathSimulator(spec, config).simulate(config.seed);
}

std::vector<double> acf(std::span<const double> series, std::size_t max_lag) {
    const std::size_t n = series.size();
    if (max_lag == 0 || max_lag >= n) {
        throw DimensionError("acf needs 1 <= max_lag < length");
    }
    const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
    std::vector<double> c(n);
    std::transform(series.begin(), series.end(), c.begin(), [mean](double v) { return v - mean; });
    const double c0 = std::inner_product(c.begin(), c.end(), c.begin(), 0.0);
    if (!(c0 > 0.0)) {
        throw DegenerateSampleError("autocorrelation of a constant series is undefined");
    }
    std::vector<double> out(max_lag);
    for (std::size_t k = 1; k <= max_lag; ++k) {
        out[k - 1] = std::inner_product(c.begin() + static_cast<std::ptrdiff_t>(k), c.end(),
                                        c.begin(), 0.0) /
                     c0;
    }
    return out;
}

MomentEstimate estimate_moments(const ModelSpec& spec, const SimConfig& config) {
    const auto path = simulate_path(spec, config);
    // Batch means; only indicative under long memory where r^2 is strongly dependent.
    constexpr std::size_t kBatches = 32;
    auto mean_and_se = [](std::span<const double> values) {
        const std::size_t per = std::max<std::size_t>(1, values.size() / kBatches);
        std::vector<double> means;
        for (std::size_t start = 0; start + per <= values.size(); start += per) {
            double s = 0.0;
            for (std::size_t i = start; i < start + per; ++i) s += values[i];
            means.push_back(s / static_cast<double>(per));
        }
        const double m = std::accumulate(means.begin(), means.end(), 0.0) /
                         static_cast<double>(means.size());
        double ss = 0.0;
        for (double b : means) ss += (b - m) * (b - m);
        const double k = static_cast<double>(means.size());
        const double se = means.size() > 1 ? std::sqrt(ss / (k - 1.0) / k) : 0.0;
        return std::pair{m, se};
    };
    std::vector<double> r2(path.n), y2(path.n);
    const auto r = path.r_in();
    for (std::size_t t = 0; t < path.n; ++t) {
        r2[t] = r[t] * r[t];
        y2[t] = path.y[t] * path.y[t];
    }
    MomentEstimate est;
    std::tie(est.sigma2, est.sigma2_se) = mean_and_se(r2);
    std::tie(est.sigma_y2, est.sigma_y2_se) = mean_and_se(y2);
    return est;
}

std::string spec_digest(const ModelSpec& spec, const SimConfig& config) {
    nlohmann::json j;
    j["model"] = to_json(spec);
    j["sim"] = to_json(config);
    const std::string text = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace lmsv
