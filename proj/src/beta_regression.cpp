#include "adjscore/beta_regression.hpp"

#include <Eigen/QR>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "adjscore/errors.hpp"
#include "adjscore/solver.hpp"
#include "adjscore/special_functions.hpp"

namespace adjscore::betareg {

namespace {

constexpr double kInvSqrtTwoPi = 0.39894228040143267793994605993438;

void require_full_rank(const Matrix& m, const char* name) {
  Eigen::ColPivHouseholderQR<Matrix> qr(m);
  if (qr.rank() != m.cols()) {
    throw std::invalid_argument(std::string("BetaRegData: design ") + name +
                                " is rank deficient");
  }
}

}  // namespace

double log_density(double y, double mu, double phi) {
  if (!(y > 0.0) || !(y < 1.0)) {
    throw std::domain_error("betareg log_density: y must lie in (0, 1)");
  }
  if (!(mu > 0.0) || !(mu < 1.0)) {
    throw std::domain_error("betareg log_density: mu must lie in (0, 1)");
  }
  if (!(phi > 0.0) || !std::isfinite(phi)) {
    throw std::domain_error("betareg log_density: phi must be positive");
  }
  const double a = mu * phi;
  const double b = (1.0 - mu) * phi;
  return log_gamma(phi) - log_gamma(a) - log_gamma(b) +
         (a - 1.0) * std::log(y) + (b - 1.0) * std::log1p(-y);
}

BetaRegModel::BetaRegModel(BetaRegData data, BetaRegLinks links)
    : data_(std::move(data)), links_(links) {
  const Index n = data_.y.size();
  if (data_.X.rows() != n || data_.Z.rows() != n) {
    throw std::invalid_argument("BetaRegData: design/response size mismatch");
  }
  for (Index i = 0; i < n; ++i) {
    if (!(data_.y[i] > 0.0) || !(data_.y[i] < 1.0)) {
      throw std::domain_error("BetaRegData: response at row " +
                              std::to_string(i) +
                              " is not strictly inside (0, 1)");
    }
  }
  require_full_rank(data_.X, "X");
  require_full_rank(data_.Z, "Z");
}

BetaRegModel::Workspace BetaRegModel::workspace(const Vector& theta) const {
  const Index n = data_.y.size();
  const Index p = data_.X.cols();
  const Index q = data_.Z.cols();
  if (theta.size() != p + q) {
    throw std::invalid_argument("BetaRegModel: theta has wrong length");
  }

  Workspace ws;
  const Vector eta = data_.X * theta.head(p);
  const Vector zeta = data_.Z * theta.tail(q);

  ws.mu.resize(n);
  ws.d1.resize(n);
  ws.d1p.resize(n);
  for (Index i = 0; i < n; ++i) {
    switch (links_.mean) {
      case MeanLink::logit: {
        const double mu = 1.0 / (1.0 + std::exp(-eta[i]));
        ws.mu[i] = mu;
        ws.d1[i] = mu * (1.0 - mu);
        ws.d1p[i] = ws.d1[i] * (1.0 - 2.0 * mu);
        break;
      }
      case MeanLink::probit: {
        ws.mu[i] = 0.5 * std::erfc(-eta[i] / std::numbers::sqrt2);
        ws.d1[i] = kInvSqrtTwoPi * std::exp(-0.5 * eta[i] * eta[i]);
        ws.d1p[i] = -eta[i] * ws.d1[i];
        break;
      }
    }
    if (!(ws.mu[i] > 0.0) || !(ws.mu[i] < 1.0)) {
      throw std::domain_error("BetaRegModel: fitted mean at the boundary");
    }
  }

  ws.phi.resize(n);
  ws.d2.resize(n);
  ws.d2p.resize(n);
  for (Index i = 0; i < n; ++i) {
    switch (links_.precision) {
      case PrecisionLink::log_link: {
        const double phi = std::exp(zeta[i]);
        ws.phi[i] = phi;
        ws.d2[i] = phi;
        ws.d2p[i] = phi;
        break;
      }
      case PrecisionLink::identity:
        ws.phi[i] = zeta[i];
        ws.d2[i] = 1.0;
        ws.d2p[i] = 0.0;
        break;
    }
    if (!(ws.phi[i] > 0.0) || !std::isfinite(ws.phi[i])) {
      throw std::domain_error("BetaRegModel: fitted precision must be > 0");
    }
  }

  ws.t_centered.resize(n);
  ws.s_centered.resize(n);
  ws.k2.resize(n);
  ws.k3.resize(n);
  ws.psi1.resize(n);
  ws.psi2.resize(n);
  ws.omega1.resize(n);
  ws.omega2.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double mu = ws.mu[i];
    const double phi = ws.phi[i];
    const double a = mu * phi;
    const double b = (1.0 - mu) * phi;
    const double digamma_phi = polygamma(0, phi);
    ws.t_centered[i] = std::log(data_.y[i]) - (polygamma(0, a) - digamma_phi);
    ws.s_centered[i] =
        std::log1p(-data_.y[i]) - (polygamma(0, b) - digamma_phi);
    const double tri_a = polygamma(1, a);
    const double tri_b = polygamma(1, b);
    ws.k2[i] = tri_a + tri_b;
    ws.k3[i] = polygamma(2, a) - polygamma(2, b);
    ws.psi1[i] = tri_b;
    ws.psi2[i] = polygamma(2, b);
    ws.omega1[i] = polygamma(1, phi);
    ws.omega2[i] = polygamma(2, phi);
  }
  return ws;
}

double BetaRegModel::log_likelihood(const Vector& theta) const {
  const Workspace ws = workspace(theta);
  double ll = 0.0;
  for (Index i = 0; i < data_.y.size(); ++i) {
    ll += log_density(data_.y[i], ws.mu[i], ws.phi[i]);
  }
  return ll;
}

Vector BetaRegModel::score(const Vector& theta) const {
  const Workspace ws = workspace(theta);
  const Index p = data_.X.cols();
  const Index q = data_.Z.cols();

  const Vector diff = ws.t_centered - ws.s_centered;
  Vector u(p + q);
  u.head(p) =
      data_.X.transpose() * (ws.phi.array() * ws.d1.array() * diff.array())
                                .matrix();
  u.tail(q) =
      data_.Z.transpose() *
      (ws.d2.array() * (ws.mu.array() * diff.array() + ws.s_centered.array()))
          .matrix();
  return u;
}

Matrix BetaRegModel::fisher_information(const Vector& theta) const {
  const Workspace ws = workspace(theta);
  const Index p = data_.X.cols();
  const Index q = data_.Z.cols();

  const auto mu = ws.mu.array();
  const auto phi = ws.phi.array();
  const auto d1 = ws.d1.array();
  const auto d2 = ws.d2.array();
  const auto k2 = ws.k2.array();
  const auto psi1 = ws.psi1.array();
  const auto omega1 = ws.omega1.array();

  const Vector a_bb = (phi.square() * d1.square() * k2).matrix();
  const Vector a_bg = (phi * d1 * d2 * (mu * k2 - psi1)).matrix();
  const Vector a_gg =
      (d2.square() * (mu.square() * k2 + (1.0 - 2.0 * mu) * psi1 - omega1))
          .matrix();

  Matrix info(p + q, p + q);
  info.topLeftCorner(p, p) = data_.X.transpose() * a_bb.asDiagonal() * data_.X;
  info.topRightCorner(p, q) =
      data_.X.transpose() * a_bg.asDiagonal() * data_.Z;
  info.bottomLeftCorner(q, p) = info.topRightCorner(p, q).transpose();
  info.bottomRightCorner(q, q) =
      data_.Z.transpose() * a_gg.asDiagonal() * data_.Z;
  return info;
}

CumulantSet BetaRegModel::cumulants(const Vector& theta) const {
  const Workspace ws = workspace(theta);
  const Index p = data_.X.cols();
  const Index q = data_.Z.cols();
  const Index dim = p + q;

  const auto mu = ws.mu.array();
  const auto phi = ws.phi.array();
  const auto d1 = ws.d1.array();
  const auto d1p = ws.d1p.array();
  const auto d2 = ws.d2.array();
  const auto d2p = ws.d2p.array();
  const auto k2 = ws.k2.array();
  const auto k3 = ws.k3.array();
  const auto psi1 = ws.psi1.array();
  const auto psi2 = ws.psi2.array();
  const auto omega1 = ws.omega1.array();
  const auto omega2 = ws.omega2.array();

  // V blocks (P_s, s <= p) and their primed versions (Q_s).
  const Vector v_bb = (phi.cube() * d1.cube() * k3).matrix();
  const Vector v_bg = (phi.square() * d1.square() * d2 * (mu * k3 + psi2))
                          .matrix();
  const Vector v_gg =
      (phi * d1 * d2.square() * (mu.square() * k3 + 2.0 * mu * psi2 - psi2))
          .matrix();
  const Vector vp_bb = (phi.square() * d1 * d1p * k2).matrix();
  const Vector vp_bg = (phi * d1.square() * d2 * k2).matrix();
  const Vector vp_gg = (phi * d1 * d2p * (mu * k2 - psi1)).matrix();

  // W blocks (P_{p+t}) and primed versions (Q_{p+t}).
  const Vector& w_bb = v_bg;
  const Vector& w_bg = v_gg;
  const Vector w_gg =
      (d2.cube() *
       (mu.cube() * k3 + (3.0 * mu.square() - 3.0 * mu + 1.0) * psi2 - omega2))
          .matrix();
  const Vector wp_bb = (phi * d2 * d1p * (mu * k2 - psi1)).matrix();
  const Vector wp_bg = (d1 * d2.square() * (mu * k2 - psi1)).matrix();
  const Vector wp_gg =
      (d2 * d2p * (mu.square() * k2 + psi1 - 2.0 * mu * psi1 - omega1))
          .matrix();

  const auto assemble = [&](const Vector& diag_col, const Vector& bb,
                            const Vector& bg, const Vector& gg) {
    Matrix out(dim, dim);
    const auto dcol = diag_col.array();
    out.topLeftCorner(p, p) = data_.X.transpose() *
                              (bb.array() * dcol).matrix().asDiagonal() *
                              data_.X;
    out.topRightCorner(p, q) = data_.X.transpose() *
                               (bg.array() * dcol).matrix().asDiagonal() *
                               data_.Z;
    out.bottomLeftCorner(q, p) = out.topRightCorner(p, q).transpose();
    out.bottomRightCorner(q, q) = data_.Z.transpose() *
                                  (gg.array() * dcol).matrix().asDiagonal() *
                                  data_.Z;
    return out;
  };

  CumulantSet c;
  c.info = fisher_information(theta);
  c.P.reserve(dim);
  c.Q.reserve(dim);
  for (Index s = 0; s < p; ++s) {
    const Vector col = data_.X.col(s);
    c.P.push_back(assemble(col, v_bb, v_bg, v_gg));
    c.Q.push_back(assemble(col, vp_bb, vp_bg, vp_gg));
  }
  for (Index t = 0; t < q; ++t) {
    const Vector col = data_.Z.col(t);
    c.P.push_back(assemble(col, w_bb, w_bg, w_gg));
    c.Q.push_back(assemble(col, wp_bb, wp_bg, wp_gg));
  }
  return c;
}

std::pair<Index, Index> BetaRegModel::parameter_dimension() const {
  return {data_.X.cols(), data_.Z.cols()};
}

Vector BetaRegModel::default_start() const {
  const Index n = data_.y.size();
  const Index p = data_.X.cols();
  const Index q = data_.Z.cols();

  // Boundary-shrunk responses mapped through the mean link.
  Vector z(n);
  for (Index i = 0; i < n; ++i) {
    const double ystar = (data_.y[i] * (n - 1) + 0.5) / n;
    z[i] = links_.mean == MeanLink::logit
               ? std::log(ystar / (1.0 - ystar))
               : normal_quantile(ystar);
  }
  const Vector beta = data_.X.colPivHouseholderQr().solve(z);

  // Method-of-moments precision from the shrunk-response residual variance.
  const Vector eta = data_.X * beta;
  double ss = 0.0;
  double mean_var = 0.0;
  for (Index i = 0; i < n; ++i) {
    double mu;
    if (links_.mean == MeanLink::logit) {
      mu = 1.0 / (1.0 + std::exp(-eta[i]));
    } else {
      mu = 0.5 * std::erfc(-eta[i] / std::numbers::sqrt2);
    }
    const double ystar = (data_.y[i] * (n - 1) + 0.5) / n;
    ss += (ystar - mu) * (ystar - mu);
    mean_var += mu * (1.0 - mu);
  }
  const double s2 = std::max(ss / static_cast<double>(n), 1e-10);
  const double phi0 =
      std::max(mean_var / static_cast<double>(n) / s2 - 1.0, 1e-2);

  Vector theta = Vector::Zero(p + q);
  theta.head(p) = beta;
  theta[p] = links_.precision == PrecisionLink::log_link ? std::log(phi0)
                                                         : phi0;
  return theta;
}

}  // namespace adjscore::betareg
