#pragma once

namespace adjscore {

// Natural log of the gamma function for a > 0.
// Relative accuracy ~1e-14 over [1e-6, 1e6]; throws std::domain_error for
// non-positive or non-finite arguments.
double log_gamma(double a);

// Polygamma function psi^(order)(a) for a > 0 and order in {0, 1, 2}
// (digamma, trigamma, tetragamma).  Upward recurrence into the asymptotic
// Bernoulli series region a >= 10.
double polygamma(int order, double a);

// log Beta(a, b) = log_gamma(a) + log_gamma(b) - log_gamma(a + b).
double log_beta(double a, double b);

}  // namespace adjscore
