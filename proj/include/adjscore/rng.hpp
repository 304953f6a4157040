#pragma once

#include <array>
#include <cstdint>

namespace adjscore::rng {

// Philox4x32-10 block function: 128-bit counter, 64-bit key.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::uint64_t key);

// Deterministic counter-based stream keyed by (seed, stream).  Streams are
// independent for distinct (seed, stream) pairs, so replication workers can
// draw concurrently without coordination; the draw index advances the
// counter.
class CounterRng {
public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : seed_(seed), stream_(stream) {}

  std::uint64_t next_u64();
  double next_double();  // uniform on the open interval (0, 1)
  double next_normal();
  double next_gamma(double shape);  // unit scale

private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t draw_index_ = 0;
  std::uint64_t buffered_ = 0;
  bool has_buffered_ = false;
};

// Beta variate with mean mu and precision phi (shapes phi*mu, phi*(1-mu))
// via two gamma draws; values rounding to exactly 0 or 1 are resampled.
double draw_beta(double mu, double phi, CounterRng& rng);

// Beta-binomial variate in the (mu, phi) parameterization, phi in (0, 1),
// as a compound beta-then-binomial draw.
int draw_betabinomial(int m, double mu, double phi, CounterRng& rng);

}  // namespace adjscore::rng
