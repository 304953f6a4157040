#pragma once

#include <stdexcept>
#include <string>

namespace adjscore {

// Linear-algebra failure (singular or severely ill-conditioned information
// matrix).  Carries the reciprocal condition estimate that triggered it.
class numerical_error : public std::runtime_error {
public:
  numerical_error(const std::string& what, double rcond_estimate)
      : std::runtime_error(what), rcond_(rcond_estimate) {}
  double rcond() const { return rcond_; }

private:
  double rcond_;
};

// Work bound exceeded (e.g. exhaustive summation over too many outcomes).
class resource_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace adjscore
