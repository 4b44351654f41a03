#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <variant>
#include <vector>

namespace lmsv {

/// Long-memory coefficients a_i = C (i+1)^{-beta}, 1/2 < beta < 1.
///
/// The (i+1) offset keeps a_0 finite while preserving a_i / (C i^{-beta}) -> 1.
struct HyperbolicLM {
    double scale = 1.0;  // C
    double beta = 0.75;
};

/// a_i = scale * rho^i, |rho| < 1.
struct Geometric {
    double rho = 0.5;
    double scale = 1.0;
};

/// Finitely many taps; zero beyond the end.
struct ExplicitFinite {
    std::vector<double> values;
};

using CoefficientSpec = std::variant<HyperbolicLM, Geometric, ExplicitFinite>;

/// Throws DomainError when the parameters violate the variant's invariants.
void validate(const CoefficientSpec& spec);

bool is_long_memory(const CoefficientSpec& spec);

/// Mean 0, variance 1, zero third moment.
enum class InnovationLaw { StandardNormal, Rademacher };

/// E(e^2 - 1)^2 for the law.
double centered_square_fourth_moment(InnovationLaw law);

std::string to_string(InnovationLaw law);
InnovationLaw innovation_law_from_string(const std::string& name);

struct ModelSpec {
    double delta = 1.0;
    CoefficientSpec a = HyperbolicLM{};
    CoefficientSpec b = ExplicitFinite{{1.0}};
    InnovationLaw z_law = InnovationLaw::StandardNormal;
    InnovationLaw eps_law = InnovationLaw::StandardNormal;
    double r_f = 0.05;
};

/// Checks delta > 0, r_f > 0, a valid, b valid and summable.
void validate(const ModelSpec& spec);

inline constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

/// Truncation lengths for the latent MA (a) and the return filter (b).
/// kUnbounded means the untruncated population quantity.
struct Truncation {
    std::size_t a = kUnbounded;
    std::size_t b = kUnbounded;
};

/// a_0 .. a_{M-1}.
std::vector<double> build_coeffs(const CoefficientSpec& spec, std::size_t M);

/// sum_{i >= M} a_i^2; exact for summable variants, integral upper bound
/// C^2 M^{1-2 beta} / (2 beta - 1) for HyperbolicLM.
double coeff_tail_l2(const CoefficientSpec& spec, std::size_t M);

/// sum_{i < M} a_i^2 (tau^2 when applied to the latent coefficients).
double coeff_l2(const CoefficientSpec& spec, std::size_t M);

/// sum_{i < M} a_i.
double coeff_sum(const CoefficientSpec& spec, std::size_t M);

/// tau^2 = Var(x_t) under truncation M.
double x_variance(const ModelSpec& spec, std::size_t M);

// The moments below need Gaussian z and throw NoClosedFormError otherwise.

/// sigma^2 = E r_t^2 = delta^2 exp(2 tau^2).
double sigma_squared(const ModelSpec& spec, Truncation trunc = {});

/// sigma_y^2 = sigma^2 sum_j b_j^2 (r_t is white noise).
double sigma_y_squared(const ModelSpec& spec, Truncation trunc = {});

/// K'_inf(0) = 2 E e^{2 x}; delta^2 K'_inf(0) = 2 sigma^2.
double k_prime_zero(const ModelSpec& spec, Truncation trunc = {});

/// Smallest K with E e^{eta x} <= e^{K eta^2} for all eta, i.e. tau^2 / 2.
double check_subgaussian(const ModelSpec& spec, Truncation trunc = {});

/// SR = (0 - r_f) / sigma_y.
double true_sharpe(const ModelSpec& spec, Truncation trunc = {});

/// E exp(k x_1) for Gaussian x with variance tau^2.
double gaussian_exp_moment(double tau2, double k);

}  // namespace lmsv
