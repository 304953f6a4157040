#pragma once

#include <Eigen/Dense>
#include <vector>

namespace adjscore {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Joint parameter theta = (beta^T, gamma^T)^T with block sizes (p, q).
struct ParameterPoint {
  Vector theta;
  Index mean_dim = 0;       // p
  Index precision_dim = 0;  // q
  Index dim() const { return theta.size(); }
};

// Fisher information i(theta) together with the expected log-likelihood
// derivative matrices P_r = E{U U^T U_r} and Q_r = -E{j U_r}.  Models may
// additionally supply the precombined forms P_r + Q_r and P_r/3 + Q_r/2;
// the adjustment computation consumes those directly when present.
struct CumulantSet {
  Matrix info;
  std::vector<Matrix> P;
  std::vector<Matrix> Q;
  std::vector<Matrix> sum_pq;    // P_r + Q_r (optional)
  std::vector<Matrix> mixed_pq;  // P_r/3 + Q_r/2 (optional)

  Index dim() const { return info.rows(); }
  bool has_combined() const { return !sum_pq.empty() && !mixed_pq.empty(); }
};

// Dense third-order cumulant arrays, sliced by the first index:
// nu3[s](t, u) = E(U_s U_t U_u), nu21[s](t, u) = E(U_s U_{tu}).
// Testing-scale representation for the index-notation oracle.
struct CumulantTensor {
  Matrix info;
  std::vector<Matrix> nu3;
  std::vector<Matrix> nu21;

  Index dim() const { return info.rows(); }
};

// Everything the modified score equations need at one parameter value.
struct AdjustmentBundle {
  Vector F1;                 // F_{1s} = tr[i^{-1} (P_s + Q_s)]
  Matrix F2;                 // (s, r) entry = tr[h_r (P_s/3 + Q_s/2)]
  Vector F2tilde;            // [i^{-1}]_r^T F2_{.,r}
  Vector mean_adjustment;    // A* = F1 / 2
  Vector median_adjustment;  // i * M1 = A* - i * F2tilde
  Vector M1;
};

}  // namespace adjscore
