#include "adjscore/adjustments.hpp"

#include <Eigen/Cholesky>

#include "adjscore/errors.hpp"

namespace adjscore {

namespace {

// Cholesky-based inverse with a reciprocal-condition gate.
Matrix guarded_inverse(const Matrix& info, const char* where) {
  Eigen::LLT<Matrix> llt(info);
  if (llt.info() != Eigen::Success) {
    throw numerical_error(std::string(where) +
                              ": information matrix is not positive definite",
                          0.0);
  }
  const double rcond = llt.rcond();
  if (!(rcond > 1e-12)) {
    throw numerical_error(std::string(where) +
                              ": information matrix is numerically singular "
                              "(rcond = " +
                              std::to_string(rcond) + ")",
                          rcond);
  }
  return llt.solve(Matrix::Identity(info.rows(), info.cols()));
}

}  // namespace

AdjustmentBundle compute_adjustments(const CumulantSet& cumulants) {
  const Index d = cumulants.dim();
  const Matrix inv = guarded_inverse(cumulants.info, "compute_adjustments");

  AdjustmentBundle bundle;
  bundle.F1.resize(d);
  bundle.F2.resize(d, d);

  // Work matrices P_s + Q_s and P_s/3 + Q_s/2, either as supplied by the
  // model or assembled here.
  std::vector<Matrix> sums;
  std::vector<Matrix> mixes;
  const std::vector<Matrix>* sum_ptr = &cumulants.sum_pq;
  const std::vector<Matrix>* mix_ptr = &cumulants.mixed_pq;
  if (!cumulants.has_combined()) {
    sums.reserve(d);
    mixes.reserve(d);
    for (Index s = 0; s < d; ++s) {
      sums.push_back(cumulants.P[s] + cumulants.Q[s]);
      mixes.push_back(cumulants.P[s] / 3.0 + cumulants.Q[s] / 2.0);
    }
    sum_ptr = &sums;
    mix_ptr = &mixes;
  }

  // F_{1s} = tr[i^{-1} (P_s + Q_s)]; both factors symmetric.
  for (Index s = 0; s < d; ++s) {
    bundle.F1[s] = inv.cwiseProduct((*sum_ptr)[s]).sum();
  }

  // F_{2s,r} = tr[h_r (P_s/3 + Q_s/2)] with h_r = g_r g_r^T / i^{rr}, which
  // reduces to a quadratic form in g_r = [i^{-1}]_r.
  for (Index r = 0; r < d; ++r) {
    const Vector g = inv.col(r);
    const double irr = inv(r, r);
    for (Index s = 0; s < d; ++s) {
      bundle.F2(s, r) = g.dot((*mix_ptr)[s] * g) / irr;
    }
  }

  bundle.mean_adjustment = 0.5 * bundle.F1;
  bundle.M1.resize(d);
  bundle.F2tilde.resize(d);
  for (Index r = 0; r < d; ++r) {
    const Vector g = inv.col(r);
    bundle.M1[r] = g.dot(bundle.mean_adjustment - bundle.F2.col(r));
    bundle.F2tilde[r] = g.dot(bundle.F2.col(r));
  }
  bundle.median_adjustment = cumulants.info * bundle.M1;
  return bundle;
}

Vector index_notation_oracle(const CumulantTensor& tensor) {
  const Index d = tensor.dim();
  Eigen::LLT<Matrix> llt(tensor.info);
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-12)) {
    throw numerical_error(
        "index_notation_oracle: information matrix is singular", llt.rcond());
  }
  const Matrix inv = tensor.info.inverse();

  Vector m1(d);
  for (Index r = 0; r < d; ++r) {
    const double irr = inv(r, r);

    double kappa1 = 0.0;
    for (Index s = 0; s < d; ++s) {
      for (Index t = 0; t < d; ++t) {
        for (Index u = 0; u < d; ++u) {
          const double nu_r_tu = inv(t, u) - inv(t, r) * inv(r, u) / irr;
          kappa1 += inv(r, s) * nu_r_tu *
                    (tensor.nu21[s](t, u) + tensor.nu3[s](t, u));
        }
      }
    }
    kappa1 *= -0.5 / irr;

    const double kappa2 = 1.0 / irr;

    double kappa3 = 0.0;
    for (Index s = 0; s < d; ++s) {
      for (Index t = 0; t < d; ++t) {
        for (Index u = 0; u < d; ++u) {
          kappa3 += inv(r, s) * inv(r, t) * inv(r, u) * tensor.nu3[s](t, u);
        }
      }
    }
    kappa3 /= irr * irr * irr;

    const double m_r = -kappa1 + kappa3 / (6.0 * kappa2);
    m1[r] = m_r / kappa2;
  }
  return m1;
}

}  // namespace adjscore
