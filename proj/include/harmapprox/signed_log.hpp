#pragma once

#include <cmath>
#include <limits>

namespace harmapprox {

// Real number held as sign and log-magnitude; zero has sign 0.
struct SignedLog {
  double log_abs = -std::numeric_limits<double>::infinity();
  int sign = 0;

  double value() const { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }
};

}  // namespace harmapprox
