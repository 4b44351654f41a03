#include "lmsv/model.hpp"

#include "lmsv/errors.hpp"

#include <boost/math/special_functions/zeta.hpp>

#include <cmath>
#include <numeric>

namespace lmsv {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_gaussian_z(const ModelSpec& spec) {
    if (spec.z_law != InnovationLaw::StandardNormal) {
        throw NoClosedFormError(
            "no closed form for non-Gaussian z; estimate the moment by simulation "
            "(see estimate_moments)");
    }
}

// sum_{i >= M} (i+1)^{-s} for s > 1 by Euler-Maclaurin; accurate to O(M^{-s-3}).
double hurwitz_tail(double s, std::size_t M) {
    const double N = static_cast<double>(M) + 1.0;
    return std::pow(N, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(N, -s) +
           s * std::pow(N, -s - 1.0) / 12.0;
}

}  // namespace

void validate(const CoefficientSpec& spec) {
    std::visit(overloaded{
                   [](const HyperbolicLM& h) {
                       if (!(h.beta > 0.5 && h.beta < 1.0)) {
                           throw DomainError("beta must lie in (1/2, 1)");
                       }
                       if (!(h.scale > 0.0)) {
                           throw DomainError("C must be positive");
                       }
                   },
                   [](const Geometric& g) {
                       if (!(std::abs(g.rho) < 1.0)) {
                           throw DomainError("rho must satisfy |rho| < 1");
                       }
                       if (!std::isfinite(g.scale)) {
                           throw DomainError("scale must be finite");
                       }
                   },
                   [](const ExplicitFinite& e) {
                       if (e.values.empty()) {
                           throw DomainError("values must be nonempty");
                       }
                       for (double v : e.values) {
                           if (!std::isfinite(v)) {
                               throw DomainError("values must be finite");
                           }
                       }
                   }},
               spec);
}

bool is_long_memory(const CoefficientSpec& spec) {
    return std::holds_alternative<HyperbolicLM>(spec);
}

double centered_square_fourth_moment(InnovationLaw law) {
    switch (law) {
        case InnovationLaw::StandardNormal:
            return 2.0;
        case InnovationLaw::Rademacher:
            return 0.0;
    }
    return 0.0;
}

std::string to_string(InnovationLaw law) {
    return law == InnovationLaw::StandardNormal ? "standard_normal" : "rademacher";
}

InnovationLaw innovation_law_from_string(const std::string& name) {
    if (name == "standard_normal") {
        return InnovationLaw::StandardNormal;
    }
    if (name == "rademacher") {
        return InnovationLaw::Rademacher;
    }
    throw DomainError("unknown innovation law '" + name +
                      "' (expected standard_normal or rademacher)");
}

void validate(const ModelSpec& spec) {
    if (!(spec.delta > 0.0) || !std::isfinite(spec.delta)) {
        throw DomainError("delta must be positive");
    }
    if (!(spec.r_f > 0.0) || !std::isfinite(spec.r_f)) {
        throw DomainError("r_f must be positive");
    }
    validate(spec.a);
    validate(spec.b);
    if (is_long_memory(spec.b)) {
        throw DomainError("b must be summable (geometric or explicit_finite)");
    }
}

std::vector<double> build_coeffs(const CoefficientSpec& spec, std::size_t M) {
    if (M == 0) {
        throw DomainError("M must be >= 1");
    }
    std::vector<double> out(M, 0.0);
    std::visit(overloaded{
                   [&](const HyperbolicLM& h) {
                       for (std::size_t i = 0; i < M; ++i) {
                           out[i] = h.scale * std::pow(static_cast<double>(i + 1), -h.beta);
                       }
                   },
                   [&](const Geometric& g) {
                       // pow rather than repeated multiplication keeps the prefix property exact
                       for (std::size_t i = 0; i < M; ++i) {
                           out[i] = g.scale * std::pow(g.rho, static_cast<double>(i));
                       }
                   },
                   [&](const ExplicitFinite& e) {
                       std::copy_n(e.values.begin(), std::min(M, e.values.size()), out.begin());
                   }},
               spec);
    return out;
}

double coeff_tail_l2(const CoefficientSpec& spec, std::size_t M) {
    if (M == 0) {
        throw DomainError("M must be >= 1");
    }
    return std::visit(
        overloaded{
            [&](const HyperbolicLM& h) {
                return h.scale * h.scale * std::pow(static_cast<double>(M), 1.0 - 2.0 * h.beta) /
                       (2.0 * h.beta - 1.0);
            },
            [&](const Geometric& g) {
                const double r2 = g.rho * g.rho;
                return g.scale * g.scale * std::pow(r2, static_cast<double>(M)) / (1.0 - r2);
            },
            [&](const ExplicitFinite& e) {
                double s = 0.0;
                for (std::size_t i = M; i < e.values.size(); ++i) {
                    s += e.values[i] * e.values[i];
                }
                return s;
            }},
        spec);
}

double coeff_l2(const CoefficientSpec& spec, std::size_t M) {
    if (M == 0) {
        throw DomainError("M must be >= 1");
    }
    return std::visit(
        overloaded{
            [&](const HyperbolicLM& h) {
                const double c2 = h.scale * h.scale;
                if (M == kUnbounded) {
                    return c2 * boost::math::zeta(2.0 * h.beta);
                }
                if (M > 4096) {
                    return c2 * (boost::math::zeta(2.0 * h.beta) - hurwitz_tail(2.0 * h.beta, M));
                }
                double s = 0.0;
                for (std::size_t i = M; i-- > 0;) {
                    s += std::pow(static_cast<double>(i + 1), -2.0 * h.beta);
                }
                return c2 * s;
            },
            [&](const Geometric& g) {
                const double r2 = g.rho * g.rho;
                const double full = g.scale * g.scale / (1.0 - r2);
                if (M == kUnbounded) {
                    return full;
                }
                return full * (1.0 - std::pow(r2, static_cast<double>(M)));
            },
            [&](const ExplicitFinite& e) {
                double s = 0.0;
                for (std::size_t i = 0; i < std::min(M, e.values.size()); ++i) {
                    s += e.values[i] * e.values[i];
                }
                return s;
            }},
        spec);
}

double coeff_sum(const CoefficientSpec& spec, std::size_t M) {
    return std::visit(
        overloaded{
            [&](const HyperbolicLM&) -> double {
                if (M == kUnbounded) {
                    throw NotApplicableError("long-memory coefficients are not summable");
                }
                const auto c = build_coeffs(spec, M);
                return std::accumulate(c.begin(), c.end(), 0.0);
            },
            [&](const Geometric& g) {
                const double full = g.scale / (1.0 - g.rho);
                if (M == kUnbounded) {
                    return full;
                }
                return full * (1.0 - std::pow(g.rho, static_cast<double>(M)));
            },
            [&](const ExplicitFinite& e) {
                return std::accumulate(e.values.begin(),
                                       e.values.begin() + static_cast<std::ptrdiff_t>(
                                                              std::min(M, e.values.size())),
                                       0.0);
            }},
        spec);
}

double x_variance(const ModelSpec& spec, std::size_t M) {
    return coeff_l2(spec.a, M);
}

double gaussian_exp_moment(double tau2, double k) {
    return std::exp(0.5 * k * k * tau2);
}

double sigma_squared(const ModelSpec& spec, Truncation trunc) {
    require_gaussian_z(spec);
    return spec.delta * spec.delta * gaussian_exp_moment(x_variance(spec, trunc.a), 2.0);
}

double sigma_y_squared(const ModelSpec& spec, Truncation trunc) {
    return sigma_squared(spec, trunc) * coeff_l2(spec.b, trunc.b);
}

double k_prime_zero(const ModelSpec& spec, Truncation trunc) {
    require_gaussian_z(spec);
    return 2.0 * gaussian_exp_moment(x_variance(spec, trunc.a), 2.0);
}

double check_subgaussian(const ModelSpec& spec, Truncation trunc) {
    if (spec.z_law != InnovationLaw::StandardNormal) {
        throw NoClosedFormError("sub-Gaussian condition not verifiable in closed form for non-Gaussian z");
    }
    return 0.5 * x_variance(spec, trunc.a);
}

double true_sharpe(const ModelSpec& spec, Truncation trunc) {
    return -spec.r_f / std::sqrt(sigma_y_squared(spec, trunc));
}

}  // namespace lmsv
