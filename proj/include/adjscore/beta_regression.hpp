#pragma once

#include "adjscore/model.hpp"

namespace adjscore::betareg {

enum class MeanLink { logit, probit };
enum class PrecisionLink { log_link, identity };

struct BetaRegLinks {
  MeanLink mean = MeanLink::logit;
  PrecisionLink precision = PrecisionLink::log_link;
};

// Responses strictly inside (0, 1) with full-column-rank mean and precision
// designs; validated on construction.
struct BetaRegData {
  Vector y;
  Matrix X;  // n x p mean design
  Matrix Z;  // n x q precision design
};

// Log of the beta density parameterized by mean and precision.
double log_density(double y, double mu, double phi);

class BetaRegModel final : public Model {
public:
  BetaRegModel(BetaRegData data, BetaRegLinks links);

  double log_likelihood(const Vector& theta) const override;
  Vector score(const Vector& theta) const override;
  CumulantSet cumulants(const Vector& theta) const override;
  std::pair<Index, Index> parameter_dimension() const override;
  Vector default_start() const override;

  Matrix fisher_information(const Vector& theta) const;

  const BetaRegData& data() const { return data_; }
  const BetaRegLinks& links() const { return links_; }

  // Per-observation quantities at one theta: means, precisions, link
  // derivatives, centered sufficient statistics and the polygamma diagonals.
  struct Workspace {
    Vector mu, phi;
    Vector d1, d1p;  // dmu/deta, d2mu/deta2
    Vector d2, d2p;  // dphi/dzeta, d2phi/dzeta2
    Vector t_centered, s_centered;
    Vector k2, k3;           // psi'(phi mu) + psi'(phi(1-mu)), psi'' difference
    Vector psi1, psi2;       // psi^(l)(phi (1-mu))
    Vector omega1, omega2;   // psi^(l)(phi)
  };
  Workspace workspace(const Vector& theta) const;

private:
  BetaRegData data_;
  BetaRegLinks links_;
};

}  // namespace adjscore::betareg
