#pragma once

#include <array>
#include <vector>

#include "adjscore/model.hpp"
#include "adjscore/solver.hpp"

namespace adjscore::betabin {

enum class MeanLink { logit };
enum class PrecisionLink { logit, identity };

struct BetaBinLinks {
  MeanLink mean = MeanLink::logit;
  PrecisionLink precision = PrecisionLink::identity;
};

struct BetaBinData {
  Eigen::VectorXi y;  // successes, 0 <= y_i <= m_i
  Eigen::VectorXi m;  // trials, m_i >= 1
  Matrix X;           // n x p mean design
  Matrix Z;           // n x q precision design
};

// Log pmf of the beta-binomial in the (mu, phi) parameterization,
// phi in (0, 1); computed through the finite products
// E_j = (1-phi) mu + j phi, F_j = (1-mu)(1-phi) + j phi, G_j = (1-phi) + j phi.
double log_pmf(int y, int m, double mu, double phi);

// First- and second-order derivatives of the per-observation log likelihood
// with respect to (mu, phi).
struct Derivatives {
  double u_mu, u_phi;
  double u_mu_mu, u_mu_phi, u_phi_phi;
};
Derivatives derivatives(int y, int m, double mu, double phi);

// Expectations L1..L16 of derivative products, each computed by exhaustive
// summation over y = 0..m.  Stored 1-indexed (element 0 unused).  Throws
// resource_error when m exceeds the cap.
std::array<double, 17> l_expectations(int m, double mu, double phi,
                                      int cap = 10000);

class BetaBinModel final : public Model {
public:
  BetaBinModel(BetaBinData data, BetaBinLinks links);

  double log_likelihood(const Vector& theta) const override;
  Vector score(const Vector& theta) const override;
  CumulantSet cumulants(const Vector& theta) const override;
  std::pair<Index, Index> parameter_dimension() const override;
  Vector default_start() const override;

  Matrix fisher_information(const Vector& theta) const;

  const BetaBinData& data() const { return data_; }
  const BetaBinLinks& links() const { return links_; }

  struct Workspace {
    Vector mu, phi;
    Vector d1_mu, d2_mu;    // dmu/deta, d2mu/deta2
    Vector d1_phi, d2_phi;  // dphi/dzeta, d2phi/dzeta2
  };
  Workspace workspace(const Vector& theta) const;

private:
  BetaBinData data_;
  BetaBinLinks links_;
};

// Probable-infinite-estimate diagnostic on a solver trace: flags when some
// mean coefficient and its standard error blow up jointly over the last
// iterations, or when a fitted mean linear predictor saturates (|eta| beyond 20, far outside any
// interior fit yet below the information-singularity wall that caps the drift).
// Requires a trace of at least 3 iterations.
struct DivergenceReport {
  bool flagged = false;
  std::vector<Index> components;
};
DivergenceReport detect_divergence(const std::vector<IterationRecord>& trace,
                                   const Matrix& X);

}  // namespace adjscore::betabin
