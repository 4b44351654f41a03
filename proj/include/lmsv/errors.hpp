#pragma once

#include <stdexcept>
#include <string>

namespace lmsv {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parameter outside the domain where a formula or model is defined.
struct DomainError : Error {
    using Error::Error;
};

struct DimensionError : Error {
    using Error::Error;
};

// Population moment requested for a law without a closed form (non-Gaussian z).
struct NoClosedFormError : Error {
    using Error::Error;
};

struct NotApplicableError : Error {
    using Error::Error;
};

struct DegenerateSampleError : Error {
    using Error::Error;
};

struct InvalidPathError : Error {
    using Error::Error;
};

// Two independent routes to the same constant disagree.
struct ConsistencyError : Error {
    using Error::Error;
};

// Config validation failure; `field` is the dotted path of the offending key.
struct ConfigError : Error {
    ConfigError(std::string field, const std::string& what)
        : Error(field + ": " + what), field(std::move(field)) {}
    std::string field;
};

}  // namespace lmsv
