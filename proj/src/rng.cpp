#include "adjscore/rng.hpp"

#include <cmath>
#include <stdexcept>

#include "adjscore/solver.hpp"

namespace adjscore::rng {

namespace {

constexpr std::uint32_t kMult0 = 0xD2511F53u;
constexpr std::uint32_t kMult1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& ctr, std::uint32_t k0,
                         std::uint32_t k1) {
  const std::uint64_t prod0 = static_cast<std::uint64_t>(kMult0) * ctr[0];
  const std::uint64_t prod1 = static_cast<std::uint64_t>(kMult1) * ctr[2];
  const std::uint32_t hi0 = static_cast<std::uint32_t>(prod0 >> 32);
  const std::uint32_t lo0 = static_cast<std::uint32_t>(prod0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(prod1 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(prod1);
  ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::uint64_t key) {
  std::uint32_t k0 = static_cast<std::uint32_t>(key);
  std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
  for (int round = 0; round < 10; ++round) {
    philox_round(counter, k0, k1);
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return counter;
}

std::uint64_t CounterRng::next_u64() {
  if (has_buffered_) {
    has_buffered_ = false;
    return buffered_;
  }
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(draw_index_),
      static_cast<std::uint32_t>(draw_index_ >> 32),
      static_cast<std::uint32_t>(stream_),
      static_cast<std::uint32_t>(stream_ >> 32)};
  const std::array<std::uint32_t, 4> out = philox4x32(ctr, seed_);
  ++draw_index_;
  buffered_ = (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
  has_buffered_ = true;
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

double CounterRng::next_double() {
  // 53 random bits centered in (0, 1); never returns an endpoint.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::next_normal() {
  return normal_quantile(next_double());
}

double CounterRng::next_gamma(double shape) {
  if (!(shape > 0.0)) {
    throw std::domain_error("next_gamma: shape must be positive");
  }
  // Marsaglia-Tsang squeeze; shapes below 1 are boosted through
  // Gamma(shape + 1) * U^(1/shape).
  if (shape < 1.0) {
    const double u = next_double();
    return next_gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / (3.0 * std::sqrt(d));
  for (;;) {
    const double x = next_normal();
    const double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    const double v = t * t * t;
    const double u = next_double();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
      return d * v;
    }
  }
}

double draw_beta(double mu, double phi, CounterRng& rng) {
  if (!(mu > 0.0) || !(mu < 1.0) || !(phi > 0.0)) {
    throw std::domain_error("draw_beta: invalid (mu, phi)");
  }
  for (;;) {
    const double g1 = rng.next_gamma(phi * mu);
    const double g2 = rng.next_gamma(phi * (1.0 - mu));
    const double value = g1 / (g1 + g2);
    if (value > 0.0 && value < 1.0) return value;
  }
}

int draw_betabinomial(int m, double mu, double phi, CounterRng& rng) {
  if (m < 1 || !(mu > 0.0) || !(mu < 1.0) || !(phi > 0.0) || !(phi < 1.0)) {
    throw std::domain_error("draw_betabinomial: invalid arguments");
  }
  // pi ~ Beta with shapes mu (1-phi)/phi and (1-mu)(1-phi)/phi, i.e. beta
  // precision (1-phi)/phi, then Binomial(m, pi).
  const double pi = draw_beta(mu, (1.0 - phi) / phi, rng);
  int successes = 0;
  for (int trial = 0; trial < m; ++trial) {
    if (rng.next_double() < pi) ++successes;
  }
  return successes;
}

}  // namespace adjscore::rng
