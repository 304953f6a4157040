#pragma once

#include <optional>
#include <utility>

#include "adjscore/model.hpp"
#include "adjscore/solver.hpp"

namespace adjscore::glm {

enum class Family { binomial, poisson, gamma };
enum class Link { logit, probit, log_link };

struct GlmData {
  Matrix X;        // n x p design
  Vector y;        // successes (binomial) or responses
  Vector weights;  // binomial trials / observation weights m_i
};

// Per-theta derived quantities of the exponential-dispersion-family model:
// means, link and variance derivatives, working weights, hat values and the
// dispersion cumulant terms a''(-m/phi), a'''(-m/phi) where the dispersion
// is estimated.
struct GlmWorkspace {
  const GlmData* data = nullptr;
  Family family;
  Link link;
  bool dispersion_estimated = false;
  double phi = 1.0;
  Vector eta, mu;
  Vector d, dprime;   // dmu/deta, d2mu/deta2
  Vector v, vprime;   // V(mu), V'(mu)
  Vector w;           // m_i d_i^2 / v_i
  Vector hat;         // diagonal of X (X^T W X)^{-1} X^T W
  Vector xi;          // h_i d'_i / (2 d_i w_i)
  Vector app, appp;   // a''_i, a'''_i (gamma family only)
  Matrix xtwx_inverse;
};

GlmWorkspace glm_workspace(const GlmData& data, Family family, Link link,
                           const Vector& theta, bool dispersion_estimated);

// Closed-form adjustments.  The median case returns
// (X^T W (xi + X u), p/(2 phi) + sum m^3 a''' / (6 phi^2 sum m^2 a'')),
// the mean case the same with u = 0 and the (p-2)/(2 phi) dispersion form.
// The dispersion component is absent for fixed-dispersion families.
std::pair<Vector, std::optional<double>> glm_closed_form_adjustments(
    const GlmWorkspace& ws, Method method);

// Fisher information and the P_s / Q_s block matrices assembled from the
// closed-form exponential-family ingredients.
CumulantSet glm_cumulant_set(const GlmWorkspace& ws);

class GlmModel final : public Model {
public:
  GlmModel(GlmData data, Family family, Link link,
           bool estimate_dispersion = false);

  double log_likelihood(const Vector& theta) const override;
  Vector score(const Vector& theta) const override;
  CumulantSet cumulants(const Vector& theta) const override;
  std::pair<Index, Index> parameter_dimension() const override;
  Vector default_start() const override;

  GlmWorkspace workspace(const Vector& theta) const;
  const GlmData& data() const { return data_; }

private:
  GlmData data_;
  Family family_;
  Link link_;
  bool estimate_dispersion_;
};

}  // namespace adjscore::glm
