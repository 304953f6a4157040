#include "adjscore/special_functions.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace adjscore {

namespace {

constexpr double kHalfLogTwoPi = 0.91893853320467274178032973640562;

// Arguments at or beyond this point are handled by the asymptotic series;
// smaller arguments are shifted up by the recurrence.
constexpr double kAsymptoticLimit = 10.0;

void check_argument(double a, const char* name) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw std::domain_error(std::string(name) +
                            ": argument must be positive and finite, got " +
                            std::to_string(a));
  }
}

// Stirling series for log Gamma, coefficients B_{2k} / (2k (2k-1)),
// truncated at B_14.
double log_gamma_asymptotic(double x) {
  static const double c[7] = {
      1.0 / 12.0,           -1.0 / 360.0,      1.0 / 1260.0,
      -1.0 / 1680.0,        1.0 / 1188.0,      -691.0 / 360360.0,
      1.0 / 156.0,
  };
  const double z = 1.0 / (x * x);
  double series = c[6];
  for (int k = 5; k >= 0; --k) series = series * z + c[k];
  return (x - 0.5) * std::log(x) - x + kHalfLogTwoPi + series / x;
}

double digamma_asymptotic(double x) {
  // B_{2k} / (2k)
  static const double c[7] = {
      1.0 / 12.0,  -1.0 / 120.0,       1.0 / 252.0, -1.0 / 240.0,
      1.0 / 132.0, -691.0 / 32760.0,   1.0 / 12.0,
  };
  const double z = 1.0 / (x * x);
  double series = c[6];
  for (int k = 5; k >= 0; --k) series = series * z + c[k];
  return std::log(x) - 0.5 / x - series * z;
}

double trigamma_asymptotic(double x) {
  // B_{2k}
  static const double c[7] = {
      1.0 / 6.0,  -1.0 / 30.0,       1.0 / 42.0, -1.0 / 30.0,
      5.0 / 66.0, -691.0 / 2730.0,   7.0 / 6.0,
  };
  const double z = 1.0 / (x * x);
  double series = c[6];
  for (int k = 5; k >= 0; --k) series = series * z + c[k];
  return 1.0 / x + 0.5 * z + series * z / x;
}

double tetragamma_asymptotic(double x) {
  // (2k+1) B_{2k}
  static const double c[7] = {
      1.0 / 2.0,  -1.0 / 6.0,        1.0 / 6.0,  -3.0 / 10.0,
      5.0 / 6.0,  -691.0 / 210.0,    35.0 / 2.0,
  };
  const double z = 1.0 / (x * x);
  double series = c[6];
  for (int k = 5; k >= 0; --k) series = series * z + c[k];
  return -z - z / x - series * z * z;
}

}  // namespace

double log_gamma(double a) {
  check_argument(a, "log_gamma");
  if (a >= kAsymptoticLimit) return log_gamma_asymptotic(a);
  // log Gamma(a) = log Gamma(a + k) - log prod_{j<k} (a + j); the product
  // stays far below overflow because a < 10 and at most 10 factors occur.
  double shift_product = 1.0;
  double x = a;
  while (x < kAsymptoticLimit) {
    shift_product *= x;
    x += 1.0;
  }
  return log_gamma_asymptotic(x) - std::log(shift_product);
}

double polygamma(int order, double a) {
  if (order < 0 || order > 2) {
    throw std::domain_error("polygamma: order must be 0, 1 or 2, got " +
                            std::to_string(order));
  }
  check_argument(a, "polygamma");
  // psi^(l)(a) = psi^(l)(a+1) + (-1)^(l+1) l! a^(-l-1)
  double shift = 0.0;
  double x = a;
  switch (order) {
    case 0:
      while (x < kAsymptoticLimit) {
        shift -= 1.0 / x;
        x += 1.0;
      }
      return digamma_asymptotic(x) + shift;
    case 1:
      while (x < kAsymptoticLimit) {
        shift += 1.0 / (x * x);
        x += 1.0;
      }
      return trigamma_asymptotic(x) + shift;
    default:
      while (x < kAsymptoticLimit) {
        shift -= 2.0 / (x * x * x);
        x += 1.0;
      }
      return tetragamma_asymptotic(x) + shift;
  }
}

double log_beta(double a, double b) {
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

}  // namespace adjscore
