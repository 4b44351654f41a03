#pragma once

#include "lmsv/model.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace lmsv {

enum class ConvMethod { Direct, Fft, Auto };

std::string to_string(ConvMethod method);
ConvMethod conv_method_from_string(const std::string& name);

struct SimConfig {
    std::size_t n = 1024;
    std::size_t M = 0;    // latent MA truncation; 0 = choose from the tolerance rule
    std::size_t M_b = 0;  // return-filter truncation; 0 = choose from the tolerance rule
    std::uint64_t seed = 1;
    ConvMethod conv_method = ConvMethod::Auto;
    // Relative L2 tail tolerance: coeff_tail_l2(a, M) <= trunc_tol * x_variance.
    // Unset means 1e-6 for summable coefficients and 0.1 for long memory.
    std::optional<double> trunc_tol;
    // Auto switches to FFT once n * M exceeds this many multiply-adds.
    std::size_t fft_threshold = std::size_t{1} << 24;
};

inline constexpr double kMaxLatentVariance = 20.0;

double default_trunc_tol(const CoefficientSpec& spec);

/// Fills M and M_b when zero and checks every SimConfig invariant.
/// Long-memory a defaults to M = 16 * n_max.
SimConfig resolve(const ModelSpec& spec, SimConfig config, std::size_t n_max);

/// Stateful RNG stream; copyable, never shared between concurrent paths.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}
    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

/// splitmix64 finaliser; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

std::vector<double> gen_innovations(InnovationLaw law, std::size_t count, RngStream& stream);
void gen_innovations(InnovationLaw law, std::span<double> out, RngStream& stream);

/// Causal FIR filter of fixed length with a cached FFT of the taps.
/// apply(innov) maps n_out + M - 1 inputs to n_out outputs,
/// out[t] = sum_i coeffs[i] * innov[t + M - 1 - i]. Thread-safe after construction.
class Convolver {
public:
    Convolver(std::span<const double> coeffs, std::size_t n_out, ConvMethod method,
              std::size_t fft_threshold = std::size_t{1} << 24);
    ~Convolver();
    Convolver(Convolver&&) noexcept;
    Convolver& operator=(Convolver&&) noexcept;
    Convolver(const Convolver&) = delete;
    Convolver& operator=(const Convolver&) = delete;

    std::vector<double> apply(std::span<const double> innov) const;

    std::size_t input_length() const { return n_out_ + coeffs_.size() - 1; }
    std::size_t output_length() const { return n_out_; }
    bool uses_fft() const { return fft_ != nullptr; }

private:
    struct FftState;
    std::vector<double> coeffs_;
    std::size_t n_out_;
    std::unique_ptr<FftState> fft_;
};

/// One-shot filter; input length must equal n + coeffs.size() - 1.
std::vector<double> linear_filter(std::span<const double> innov, std::span<const double> coeffs,
                                  std::size_t n, ConvMethod method);

/// One realisation. x, v, r carry presample = M_b - 1 leading pre-sample
/// values so that y_t = sum_j b_j r_{t-j} is defined for every in-sample t.
struct SamplePath {
    std::size_t n = 0;
    std::size_t presample = 0;
    std::vector<double> x;
    std::vector<double> v;
    std::vector<double> r;
    std::vector<double> y;
    std::uint64_t seed = 0;
    std::string spec_digest;
    Truncation trunc;

    std::span<const double> x_in() const { return std::span(x).subspan(presample); }
    std::span<const double> v_in() const { return std::span(v).subspan(presample); }
    std::span<const double> r_in() const { return std::span(r).subspan(presample); }
};

/// Reusable simulator for a fixed (spec, resolved config); caches the
/// coefficient vectors and their FFTs so replications only pay for innovations.
class PathSimulator {
public:
    PathSimulator(ModelSpec spec, SimConfig resolved_config);

    SamplePath simulate(std::uint64_t seed) const;

    const ModelSpec& spec() const { return spec_; }
    const SimConfig& config() const { return config_; }
    std::span<const double> a() const { return a_; }
    std::span<const double> b() const { return b_; }

private:
    ModelSpec spec_;
    SimConfig config_;
    std::vector<double> a_;
    std::vector<double> b_;
    Convolver x_filter_;
    Convolver y_filter_;
    std::string digest_;
};

SamplePath simulate_path(const ModelSpec& spec, const SimConfig& config);

/// Sample autocorrelations at lags 1..max_lag, divisor n.
std::vector<double> acf(std::span<const double> series, std::size_t max_lag);

/// Simulation-based population moments, for z laws without closed forms.
struct MomentEstimate {
    double sigma2 = 0.0;
    double sigma2_se = 0.0;
    double sigma_y2 = 0.0;
    double sigma_y2_se = 0.0;
};

MomentEstimate estimate_moments(const ModelSpec& spec, const SimConfig& config);

/// FNV-1a of the canonical JSON encoding of (spec, config), as hex.
std::string spec_digest(const ModelSpec& spec, const SimConfig& config);

}  // namespace lmsv
