#pragma once

#include <stdexcept>
#include <string>

namespace tumor_sde {

// Bad model parameters, unknown names, malformed requests.
struct ParameterError : std::invalid_argument {
  explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

// A computation left the domain where the method is defined.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Angular machinery asked for on a system with more than one Wiener channel.
struct UnsupportedNoiseError : ParameterError {
  explicit UnsupportedNoiseError(const std::string& what) : ParameterError(what) {}
};

// |q4| fell below the cutoff somewhere on the circle: the direction process
// has a degenerate diffusion and the stationary-density formulas divide by q4^2.
struct DegenerateDiffusionError : NumericError {
  explicit DegenerateDiffusionError(const std::string& what) : NumericError(what) {}
};

}  // namespace tumor_sde
