#pragma once

#include <optional>
#include <utility>

#include "adjscore/cumulants.hpp"

namespace adjscore {

// Capability record a model module supplies to the solver.  Evaluations must
// be pure with respect to theta; implementations signal invalid parameter
// values by throwing std::domain_error, which the solver treats as a
// rejected step.
class Model {
public:
  virtual ~Model() = default;

  virtual double log_likelihood(const Vector& theta) const = 0;
  virtual Vector score(const Vector& theta) const = 0;
  virtual CumulantSet cumulants(const Vector& theta) const = 0;

  // (p, q) block sizes; p + q equals the parameter dimension.
  virtual std::pair<Index, Index> parameter_dimension() const = 0;

  virtual Vector default_start() const = 0;

  // Dense third-order cumulant arrays for oracle testing; models for which
  // this is impractical simply do not override it.
  virtual std::optional<CumulantTensor> dense_cumulants(
      const Vector& /*theta*/) const {
    return std::nullopt;
  }
};

}  // namespace adjscore
