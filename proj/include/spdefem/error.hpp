#pragma once

#include <stdexcept>
#include <string>

namespace spdefem {

/// Invalid input or a request outside the model's assumptions
/// (bad dimension, ill-posed covariance, non-contractive nonlinearity).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure did not deliver (iteration cap, CG breakdown,
/// unresolvable quadrature).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace spdefem
