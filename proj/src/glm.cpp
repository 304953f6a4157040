#include "adjscore/glm.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "adjscore/errors.hpp"
#include "adjscore/special_functions.hpp"

namespace adjscore::glm {

namespace {

constexpr double kInvSqrtTwoPi = 0.39894228040143267793994605993438;

double normal_pdf(double x) {
  return kInvSqrtTwoPi * std::exp(-0.5 * x * x);
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

Matrix guarded_spd_inverse(const Matrix& a, const char* where) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-12)) {
    throw numerical_error(std::string(where) + ": X^T W X is singular",
                          llt.rcond());
  }
  return llt.solve(Matrix::Identity(a.rows(), a.cols()));
}

}  // namespace

GlmWorkspace glm_workspace(const GlmData& data, Family family, Link link,
                           const Vector& theta, bool dispersion_estimated) {
  const Index n = data.X.rows();
  const Index p = data.X.cols();
  if (theta.size() != p + (dispersion_estimated ? 1 : 0)) {
    throw std::invalid_argument("glm_workspace: theta has wrong length");
  }

  GlmWorkspace ws;
  ws.data = &data;
  ws.family = family;
  ws.link = link;
  ws.dispersion_estimated = dispersion_estimated;
  ws.phi = dispersion_estimated ? theta[p] : 1.0;
  if (!(ws.phi > 0.0) || !std::isfinite(ws.phi)) {
    throw std::domain_error("glm_workspace: dispersion must be positive");
  }

  ws.eta = data.X * theta.head(p);
  ws.mu.resize(n);
  ws.d.resize(n);
  ws.dprime.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double eta = ws.eta[i];
    switch (link) {
      case Link::logit: {
        const double mu = 1.0 / (1.0 + std::exp(-eta));
        ws.mu[i] = mu;
        ws.d[i] = mu * (1.0 - mu);
        ws.dprime[i] = ws.d[i] * (1.0 - 2.0 * mu);
        break;
      }
      case Link::probit: {
        ws.mu[i] = normal_cdf(eta);
        ws.d[i] = normal_pdf(eta);
        ws.dprime[i] = -eta * ws.d[i];
        break;
      }
      case Link::log_link: {
        const double mu = std::exp(eta);
        ws.mu[i] = mu;
        ws.d[i] = mu;
        ws.dprime[i] = mu;
        break;
      }
    }
    if (!std::isfinite(ws.mu[i])) {
      throw std::domain_error("glm_workspace: non-finite fitted mean");
    }
  }

  ws.v.resize(n);
  ws.vprime.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double mu = ws.mu[i];
    switch (family) {
      case Family::binomial:
        if (!(mu > 0.0) || !(mu < 1.0)) {
          throw std::domain_error(
              "glm_workspace: fitted probability at the boundary");
        }
        ws.v[i] = mu * (1.0 - mu);
        ws.vprime[i] = 1.0 - 2.0 * mu;
        break;
      case Family::poisson:
        if (!(mu > 0.0)) {
          throw std::domain_error("glm_workspace: fitted mean must be > 0");
        }
        ws.v[i] = mu;
        ws.vprime[i] = 1.0;
        break;
      case Family::gamma:
        if (!(mu > 0.0)) {
          throw std::domain_error("glm_workspace: fitted mean must be > 0");
        }
        ws.v[i] = mu * mu;
        ws.vprime[i] = 2.0 * mu;
        break;
    }
  }

  ws.w = (data.weights.array() * ws.d.array().square() / ws.v.array())
             .matrix();

  const Matrix xtwx = data.X.transpose() * ws.w.asDiagonal() * data.X;
  ws.xtwx_inverse = guarded_spd_inverse(xtwx, "glm_workspace");

  ws.hat.resize(n);
  for (Index i = 0; i < n; ++i) {
    const Vector xi_row = data.X.row(i).transpose();
    ws.hat[i] = ws.w[i] * xi_row.dot(ws.xtwx_inverse * xi_row);
  }
  ws.xi = (ws.hat.array() * ws.dprime.array() /
           (2.0 * ws.d.array() * ws.w.array()))
              .matrix();

  if (family == Family::gamma) {
    ws.app.resize(n);
    ws.appp.resize(n);
    for (Index i = 0; i < n; ++i) {
      const double nu = data.weights[i] / ws.phi;
      ws.app[i] = 2.0 * (polygamma(1, nu) - 1.0 / nu);
      ws.appp[i] = -2.0 * (polygamma(2, nu) + 1.0 / (nu * nu));
    }
  }
  return ws;
}

std::pair<Vector, std::optional<double>> glm_closed_form_adjustments(
    const GlmWorkspace& ws, Method method) {
  if (method == Method::ml) {
    throw std::invalid_argument(
        "glm_closed_form_adjustments: method must be mean-br or median-br");
  }
  const Matrix& X = ws.data->X;
  const Index n = X.rows();
  const Index p = X.cols();

  Vector beta_adjustment;
  if (method == Method::mean_br) {
    beta_adjustment = X.transpose() * (ws.w.asDiagonal() * ws.xi);
  } else {
    // u_r contracts the leverage-like htilde_{r,i} with the link/variance
    // curvature factor d v'/(6v) - d'/(2d).
    const Vector curvature =
        (ws.d.array() * ws.vprime.array() / (6.0 * ws.v.array()) -
         ws.dprime.array() / (2.0 * ws.d.array()))
            .matrix();
    Vector u(p);
    for (Index r = 0; r < p; ++r) {
      const Vector g = ws.xtwx_inverse.col(r);
      const double grr = ws.xtwx_inverse(r, r);
      Vector weighted(n);
      for (Index i = 0; i < n; ++i) {
        const double proj = X.row(i).dot(g);
        const double htilde = ws.w[i] * proj * proj / grr;
        weighted[i] = htilde * curvature[i];
      }
      u[r] = g.dot(X.transpose() * weighted);
    }
    beta_adjustment = X.transpose() * (ws.w.asDiagonal() * (ws.xi + X * u));
  }

  std::optional<double> phi_adjustment;
  if (ws.dispersion_estimated) {
    const Vector& m = ws.data->weights;
    const double sum_m2a2 = (m.array().square() * ws.app.array()).sum();
    const double sum_m3a3 = (m.array().cube() * ws.appp.array()).sum();
    const double phi = ws.phi;
    if (method == Method::mean_br) {
      phi_adjustment = (static_cast<double>(p) - 2.0) / (2.0 * phi) +
                       sum_m3a3 / (2.0 * phi * phi * sum_m2a2);
    } else {
      phi_adjustment = static_cast<double>(p) / (2.0 * phi) +
                       sum_m3a3 / (6.0 * phi * phi * sum_m2a2);
    }
  }
  return {beta_adjustment, phi_adjustment};
}

CumulantSet glm_cumulant_set(const GlmWorkspace& ws) {
  const Matrix& X = ws.data->X;
  const Vector& m = ws.data->weights;
  const Index n = X.rows();
  const Index p = X.cols();
  const Index dim = p + (ws.dispersion_estimated ? 1 : 0);
  const double phi = ws.phi;

  CumulantSet c;
  c.info = Matrix::Zero(dim, dim);
  c.info.topLeftCorner(p, p) =
      (X.transpose() * ws.w.asDiagonal() * X) / phi;

  double sum_m2a2 = 0.0;
  double sum_m3a3 = 0.0;
  if (ws.dispersion_estimated) {
    sum_m2a2 = (m.array().square() * ws.app.array()).sum();
    sum_m3a3 = (m.array().cube() * ws.appp.array()).sum();
    c.info(p, p) = sum_m2a2 / (2.0 * phi * phi * phi * phi);
  }

  c.P.assign(dim, Matrix::Zero(dim, dim));
  c.Q.assign(dim, Matrix::Zero(dim, dim));

  const Vector o1_base =
      (ws.d.array() * ws.vprime.array() / (ws.v.array() * phi)).matrix();
  const Vector o3_base =
      (ws.dprime.array() / (ws.d.array() * phi)).matrix();

  for (Index s = 0; s < p; ++s) {
    const Vector xs = X.col(s);
    const Vector o1 = xs.cwiseProduct(o1_base);
    const Vector o3 = xs.cwiseProduct(o3_base);
    const Vector wo1 = ws.w.cwiseProduct(o1);
    c.P[s].topLeftCorner(p, p) = X.transpose() * wo1.asDiagonal() * X;
    c.Q[s].topLeftCorner(p, p) =
        -(X.transpose() * (ws.w.cwiseProduct(o1 - o3)).asDiagonal() * X);
    if (ws.dispersion_estimated) {
      const Vector o2 = xs / (phi * phi);
      const Vector cross = X.transpose() * ws.w.cwiseProduct(o2);
      c.P[s].block(0, p, p, 1) = cross;
      c.P[s].block(p, 0, 1, p) = cross.transpose();
      c.Q[s].block(0, p, p, 1) = -cross;
      c.Q[s].block(p, 0, 1, p) = -cross.transpose();
    }
  }

  if (ws.dispersion_estimated) {
    Matrix& p_phi = c.P[p];
    p_phi.topLeftCorner(p, p) =
        (X.transpose() * ws.w.asDiagonal() * X) / (phi * phi);
    p_phi(p, p) = sum_m3a3 / (2.0 * std::pow(phi, 6));
    c.Q[p](p, p) = -sum_m2a2 / std::pow(phi, 5);
  }
  (void)n;
  return c;
}

GlmModel::GlmModel(GlmData data, Family family, Link link,
                   bool estimate_dispersion)
    : data_(std::move(data)),
      family_(family),
      link_(link),
      estimate_dispersion_(estimate_dispersion) {
  if (data_.weights.size() == 0) {
    data_.weights = Vector::Ones(data_.X.rows());
  }
  if (data_.y.size() != data_.X.rows() ||
      data_.weights.size() != data_.X.rows()) {
    throw std::invalid_argument("GlmModel: response/design size mismatch");
  }
  if ((family == Family::binomial && link == Link::log_link) ||
      (family != Family::binomial && link != Link::log_link)) {
    throw std::invalid_argument("GlmModel: unsupported family/link pair");
  }
  if (estimate_dispersion && family != Family::gamma) {
    throw std::invalid_argument(
        "GlmModel: dispersion is fixed at 1 for this family");
  }
  for (Index i = 0; i < data_.y.size(); ++i) {
    const bool bad =
        (family == Family::binomial &&
         (data_.y[i] < 0.0 || data_.y[i] > data_.weights[i])) ||
        (family == Family::poisson && data_.y[i] < 0.0) ||
        (family == Family::gamma && !(data_.y[i] > 0.0));
    if (bad) {
      throw std::domain_error("GlmModel: response at row " +
                              std::to_string(i) +
                              " is outside the family's support");
    }
  }
}

GlmWorkspace GlmModel::workspace(const Vector& theta) const {
  return glm_workspace(data_, family_, link_, theta, estimate_dispersion_);
}

double GlmModel::log_likelihood(const Vector& theta) const {
  const GlmWorkspace ws = workspace(theta);
  const Index n = data_.X.rows();
  double ll = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double y = data_.y[i];
    const double m = data_.weights[i];
    const double mu = ws.mu[i];
    switch (family_) {
      case Family::binomial:
        ll += log_gamma(m + 1.0) - log_gamma(y + 1.0) -
              log_gamma(m - y + 1.0) + y * std::log(mu) +
              (m - y) * std::log(1.0 - mu);
        break;
      case Family::poisson:
        ll += m * (y * std::log(mu) - mu) - log_gamma(y + 1.0);
        break;
      case Family::gamma: {
        const double nu = m / ws.phi;
        ll += nu * (std::log(y) - y / mu - std::log(mu)) +
              nu * std::log(nu) - log_gamma(nu) - std::log(y);
        break;
      }
    }
  }
  return ll;
}

Vector GlmModel::score(const Vector& theta) const {
  const GlmWorkspace ws = workspace(theta);
  const Index n = data_.X.rows();
  const Index p = data_.X.cols();
  const Index dim = p + (estimate_dispersion_ ? 1 : 0);

  Vector u = Vector::Zero(dim);
  Vector working(n);
  for (Index i = 0; i < n; ++i) {
    const double ybar = family_ == Family::binomial
                            ? data_.y[i] / data_.weights[i]
                            : data_.y[i];
    working[i] = data_.weights[i] * (ybar - ws.mu[i]) * ws.d[i] /
                 (ws.phi * ws.v[i]);
  }
  u.head(p) = data_.X.transpose() * working;

  if (estimate_dispersion_) {
    double u_phi = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double y = data_.y[i];
      const double m = data_.weights[i];
      const double mu = ws.mu[i];
      const double nu = m / ws.phi;
      u_phi += -(m / (ws.phi * ws.phi)) *
               (std::log(y) - y / mu - std::log(mu) + std::log(nu) + 1.0 -
                polygamma(0, nu));
    }
    u[p] = u_phi;
  }
  return u;
}

CumulantSet GlmModel::cumulants(const Vector& theta) const {
  return glm_cumulant_set(workspace(theta));
}

std::pair<Index, Index> GlmModel::parameter_dimension() const {
  return {data_.X.cols(), estimate_dispersion_ ? 1 : 0};
}

Vector GlmModel::default_start() const {
  const Index n = data_.X.rows();
  const Index p = data_.X.cols();
  Vector z(n);
  for (Index i = 0; i < n; ++i) {
    const double y = data_.y[i];
    const double m = data_.weights[i];
    switch (family_) {
      case Family::binomial: {
        const double prop = (y + 0.5) / (m + 1.0);
        z[i] = link_ == Link::logit
                   ? std::log(prop / (1.0 - prop))
                   : normal_quantile(prop);
        break;
      }
      default:
        z[i] = std::log(y + 0.5);
        break;
    }
  }
  const Vector beta = data_.X.colPivHouseholderQr().solve(z);

  if (!estimate_dispersion_) return beta;

  Vector theta(p + 1);
  theta.head(p) = beta;
  // Pearson-style moment start for the dispersion.
  const Vector eta = data_.X * beta;
  double pearson = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double mu = std::exp(eta[i]);
    const double resid = data_.y[i] - mu;
    pearson += data_.weights[i] * resid * resid / (mu * mu);
  }
  theta[p] = std::max(pearson / static_cast<double>(n), 0.1);
  return theta;
}

}  // namespace adjscore::glm
