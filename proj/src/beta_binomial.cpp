#include "adjscore/beta_binomial.hpp"

#include <Eigen/QR>
#include <cmath>
#include <stdexcept>
#include <string>

#include "adjscore/errors.hpp"
#include "adjscore/special_functions.hpp"

namespace adjscore::betabin {

namespace {

void check_domain(int y, int m, double mu, double phi) {
  if (m < 1 || y < 0 || y > m) {
    throw std::domain_error("beta-binomial: require 0 <= y <= m, m >= 1");
  }
  if (!(mu > 0.0) || !(mu < 1.0)) {
    throw std::domain_error("beta-binomial: mu must lie in (0, 1)");
  }
  if (!(phi > 0.0) || !(phi < 1.0)) {
    throw std::domain_error("beta-binomial: phi must lie in (0, 1)");
  }
}

inline double e_term(int j, double mu, double phi) {
  return (1.0 - phi) * mu + j * phi;
}
inline double f_term(int j, double mu, double phi) {
  return (1.0 - mu) * (1.0 - phi) + j * phi;
}
inline double g_term(int j, double phi) { return (1.0 - phi) + j * phi; }

// Prefix sums over the product terms; entry k holds the sum over j < k.
struct PrefixTables {
  std::vector<double> inv_e, j_e, inv_e2, j_e2, j2_e2;
  std::vector<double> inv_f, j_f, inv_f2, j_f2, j2_f2;
  double g_phi = 0.0;   // sum (j-1)/G_j over j < m
  double g_phi2 = 0.0;  // sum (j-1)^2/G_j^2 over j < m
};

PrefixTables build_tables(int m, double mu, double phi) {
  PrefixTables t;
  const auto fill = [m](std::vector<double>& out) {
    out.assign(static_cast<size_t>(m) + 1, 0.0);
  };
  fill(t.inv_e);
  fill(t.j_e);
  fill(t.inv_e2);
  fill(t.j_e2);
  fill(t.j2_e2);
  fill(t.inv_f);
  fill(t.j_f);
  fill(t.inv_f2);
  fill(t.j_f2);
  fill(t.j2_f2);
  for (int j = 0; j < m; ++j) {
    const double e = e_term(j, mu, phi);
    const double f = f_term(j, mu, phi);
    const double g = g_term(j, phi);
    const double jd = j;
    t.inv_e[j + 1] = t.inv_e[j] + 1.0 / e;
    t.j_e[j + 1] = t.j_e[j] + jd / e;
    t.inv_e2[j + 1] = t.inv_e2[j] + 1.0 / (e * e);
    t.j_e2[j + 1] = t.j_e2[j] + jd / (e * e);
    t.j2_e2[j + 1] = t.j2_e2[j] + jd * jd / (e * e);
    t.inv_f[j + 1] = t.inv_f[j] + 1.0 / f;
    t.j_f[j + 1] = t.j_f[j] + jd / f;
    t.inv_f2[j + 1] = t.inv_f2[j] + 1.0 / (f * f);
    t.j_f2[j + 1] = t.j_f2[j] + jd / (f * f);
    t.j2_f2[j + 1] = t.j2_f2[j] + jd * jd / (f * f);
    t.g_phi += (jd - 1.0) / g;
    t.g_phi2 += (jd - 1.0) * (jd - 1.0) / (g * g);
  }
  return t;
}

Derivatives derivatives_from_tables(const PrefixTables& t, int y, int m,
                                    double mu, double phi) {
  const int k = m - y;  // failure-product length
  Derivatives d;
  d.u_mu = (1.0 - phi) * (t.inv_e[y] - t.inv_f[k]);
  d.u_phi = (t.j_e[y] - mu * t.inv_e[y]) +
            (t.j_f[k] + (mu - 1.0) * t.inv_f[k]) - t.g_phi;
  const double omp = 1.0 - phi;
  d.u_mu_mu = -omp * omp * (t.inv_e2[y] + t.inv_f2[k]);
  d.u_mu_phi = -t.j_e2[y] + t.j_f2[k];
  d.u_phi_phi =
      -(t.j2_e2[y] - 2.0 * mu * t.j_e2[y] + mu * mu * t.inv_e2[y]) -
      (t.j2_f2[k] + 2.0 * (mu - 1.0) * t.j_f2[k] +
       (mu - 1.0) * (mu - 1.0) * t.inv_f2[k]) +
      t.g_phi2;
  return d;
}

// pmf table over y = 0..m, built in log space through the ratio recurrence
// p(y+1)/p(y) = (m-y)/(y+1) * E_y / F_{m-y-1}.
std::vector<double> pmf_table(int m, double mu, double phi) {
  std::vector<double> logp(static_cast<size_t>(m) + 1);
  double lp = 0.0;
  for (int j = 0; j < m; ++j) {
    lp += std::log(f_term(j, mu, phi)) - std::log(g_term(j, phi));
  }
  logp[0] = lp;
  for (int y = 0; y < m; ++y) {
    lp += std::log(static_cast<double>(m - y) / (y + 1)) +
          std::log(e_term(y, mu, phi)) - std::log(f_term(m - y - 1, mu, phi));
    logp[y + 1] = lp;
  }
  std::vector<double> pmf(logp.size());
  for (size_t i = 0; i < logp.size(); ++i) pmf[i] = std::exp(logp[i]);
  return pmf;
}

}  // namespace

double log_pmf(int y, int m, double mu, double phi) {
  check_domain(y, m, mu, phi);
  double lp = log_gamma(m + 1.0) - log_gamma(y + 1.0) -
              log_gamma(m - y + 1.0);
  for (int j = 0; j < y; ++j) lp += std::log(e_term(j, mu, phi));
  for (int j = 0; j < m - y; ++j) lp += std::log(f_term(j, mu, phi));
  for (int j = 0; j < m; ++j) lp -= std::log(g_term(j, phi));
  return lp;
}

Derivatives derivatives(int y, int m, double mu, double phi) {
  check_domain(y, m, mu, phi);
  return derivatives_from_tables(build_tables(m, mu, phi), y, m, mu, phi);
}

std::array<double, 17> l_expectations(int m, double mu, double phi, int cap) {
  check_domain(0, m, mu, phi);
  if (m > cap) {
    throw resource_error("l_expectations: m = " + std::to_string(m) +
                         " exceeds the exhaustive-summation cap " +
                         std::to_string(cap));
  }
  const PrefixTables tables = build_tables(m, mu, phi);
  const std::vector<double> pmf = pmf_table(m, mu, phi);

  std::array<double, 17> l{};
  for (int y = 0; y <= m; ++y) {
    const Derivatives d = derivatives_from_tables(tables, y, m, mu, phi);
    const double w = pmf[y];
    l[1] += w * d.u_mu_mu;
    l[2] += w * d.u_mu_phi;
    l[3] += w * d.u_phi_phi;
    l[4] += w * d.u_mu * d.u_mu * d.u_mu;
    l[5] += w * d.u_mu * d.u_mu * d.u_phi;
    l[6] += w * d.u_mu * d.u_phi * d.u_phi;
    l[7] += w * d.u_phi * d.u_phi * d.u_phi;
    l[8] += w * d.u_mu_mu * d.u_mu;
    l[9] += w * d.u_mu * d.u_mu;
    l[10] += w * d.u_mu * d.u_mu_phi;
    l[11] += w * d.u_mu * d.u_phi_phi;
    l[12] += w * d.u_mu * d.u_phi;
    l[13] += w * d.u_phi * d.u_mu_mu;
    l[14] += w * d.u_phi * d.u_mu_phi;
    l[15] += w * d.u_phi * d.u_phi_phi;
    l[16] += w * d.u_phi * d.u_phi;
  }
  return l;
}

BetaBinModel::BetaBinModel(BetaBinData data, BetaBinLinks links)
    : data_(std::move(data)), links_(links) {
  const Index n = data_.y.size();
  if (data_.m.size() != n || data_.X.rows() != n || data_.Z.rows() != n) {
    throw std::invalid_argument("BetaBinData: size mismatch");
  }
  for (Index i = 0; i < n; ++i) {
    if (data_.m[i] < 1 || data_.y[i] < 0 || data_.y[i] > data_.m[i]) {
      throw std::domain_error("BetaBinData: row " + std::to_string(i) +
                              " violates 0 <= y <= m, m >= 1");
    }
  }
  Eigen::ColPivHouseholderQR<Matrix> qr_x(data_.X);
  Eigen::ColPivHouseholderQR<Matrix> qr_z(data_.Z);
  if (qr_x.rank() != data_.X.cols() || qr_z.rank() != data_.Z.cols()) {
    throw std::invalid_argument("BetaBinData: rank-deficient design");
  }
}

BetaBinModel::Workspace BetaBinModel::workspace(const Vector& theta) const {
  const Index n = data_.y.size();
  const Index p = data_.X.cols();
  const Index q = data_.Z.cols();
  if (theta.size() != p + q) {
    throw std::invalid_argument("BetaBinModel: theta has wrong length");
  }

  Workspace ws;
  const Vector eta = data_.X * theta.head(p);
  const Vector zeta = data_.Z * theta.tail(q);
  ws.mu.resize(n);
  ws.d1_mu.resize(n);
  ws.d2_mu.resize(n);
  ws.phi.resize(n);
  ws.d1_phi.resize(n);
  ws.d2_phi.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double mu = 1.0 / (1.0 + std::exp(-eta[i]));
    ws.mu[i] = mu;
    ws.d1_mu[i] = mu * (1.0 - mu);
    ws.d2_mu[i] = ws.d1_mu[i] * (1.0 - 2.0 * mu);
    if (!(mu > 0.0) || !(mu < 1.0)) {
      throw std::domain_error("BetaBinModel: fitted mean at the boundary");
    }
    switch (links_.precision) {
      case PrecisionLink::logit: {
        const double phi = 1.0 / (1.0 + std::exp(-zeta[i]));
        ws.phi[i] = phi;
        ws.d1_phi[i] = phi * (1.0 - phi);
        ws.d2_phi[i] = ws.d1_phi[i] * (1.0 - 2.0 * phi);
        break;
      }
      case PrecisionLink::identity:
        ws.phi[i] = zeta[i];
        ws.d1_phi[i] = 1.0;
        ws.d2_phi[i] = 0.0;
        break;
    }
    if (!(ws.phi[i] > 0.0) || !(ws.phi[i] < 1.0)) {
      throw std::domain_error(
          "BetaBinModel: fitted precision outside (0, 1)");
    }
  }
  return ws;
}

double BetaBinModel::log_likelihood(const Vector& theta) const {
  const Workspace ws = workspace(theta);
  double ll = 0.0;
  for (Index i = 0; i < data_.y.size(); ++i) {
    ll += log_pmf(data_.y[i], data_.m[i], ws.mu[i], ws.phi[i]);
  }
  return ll;
}

Vector BetaBinModel::score(const Vector& theta) const {
  const Workspace ws = workspace(theta);
  const Index n = data_.y.size();
  const Index p = data_.X.cols();
  const Index q = data_.Z.cols();

  Vector u_mu(n);
  Vector u_phi(n);
  for (Index i = 0; i < n; ++i) {
    const Derivatives d =
        derivatives(data_.y[i], data_.m[i], ws.mu[i], ws.phi[i]);
    u_mu[i] = d.u_mu;
    u_phi[i] = d.u_phi;
  }
  Vector u(p + q);
  u.head(p) = data_.X.transpose() * ws.d1_mu.cwiseProduct(u_mu);
  u.tail(q) = data_.Z.transpose() * ws.d1_phi.cwiseProduct(u_phi);
  return u;
}

Matrix BetaBinModel::fisher_information(const Vector& theta) const {
  return cumulants(theta).info;
}

CumulantSet BetaBinModel::cumulants(const Vector& theta) const {
  const Workspace ws = workspace(theta);
  const Index n = data_.y.size();
  const Index p = data_.X.cols();
  const Index q = data_.Z.cols();
  const Index dim = p + q;

  Matrix l(n, 17);
  for (Index i = 0; i < n; ++i) {
    const std::array<double, 17> li =
        l_expectations(data_.m[i], ws.mu[i], ws.phi[i]);
    for (int k = 1; k <= 16; ++k) l(i, k) = li[k];
  }

  const auto d1m = ws.d1_mu.array();
  const auto d2m = ws.d2_mu.array();
  const auto d1f = ws.d1_phi.array();
  const auto d2f = ws.d2_phi.array();

  CumulantSet c;
  c.info.resize(dim, dim);
  {
    const Vector a_bb = (-l.col(1).array() * d1m.square()).matrix();
    const Vector a_bg = (-l.col(2).array() * d1m * d1f).matrix();
    const Vector a_gg = (-l.col(3).array() * d1f.square()).matrix();
    c.info.topLeftCorner(p, p) =
        data_.X.transpose() * a_bb.asDiagonal() * data_.X;
    c.info.topRightCorner(p, q) =
        data_.X.transpose() * a_bg.asDiagonal() * data_.Z;
    c.info.bottomLeftCorner(q, p) = c.info.topRightCorner(p, q).transpose();
    c.info.bottomRightCorner(q, q) =
        data_.Z.transpose() * a_gg.asDiagonal() * data_.Z;
  }

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

  // V blocks (s <= p) and W blocks (s = p + t), raw and precombined.
  const Vector v_bb = (l.col(4).array() * d1m.cube()).matrix();
  const Vector v_bg = (l.col(5).array() * d1m.square() * d1f).matrix();
  const Vector v_gg = (l.col(6).array() * d1m * d1f.square()).matrix();
  const Vector vp_bb =
      (l.col(8).array() * d1m.cube() + l.col(9).array() * d1m * d2m).matrix();
  const Vector vp_bg = (l.col(10).array() * d1m.square() * d1f).matrix();
  const Vector vp_gg = (l.col(11).array() * d1m * d1f.square() +
                        l.col(12).array() * d1m * d2f)
                           .matrix();

  const Vector w_bb = v_bg;
  const Vector w_bg = v_gg;
  const Vector w_gg = (l.col(7).array() * d1f.cube()).matrix();
  const Vector wp_bb = (l.col(13).array() * d1m.square() * d1f +
                        l.col(12).array() * d1f * d2m)
                           .matrix();
  const Vector wp_bg = (l.col(14).array() * d1m * d1f.square()).matrix();
  const Vector wp_gg =
      (l.col(15).array() * d1f.cube() + l.col(16).array() * d1f * d2f)
          .matrix();

  c.P.reserve(dim);
  c.Q.reserve(dim);
  c.sum_pq.reserve(dim);
  c.mixed_pq.reserve(dim);
  for (Index s = 0; s < p; ++s) {
    const Vector col = data_.X.col(s);
    c.P.push_back(assemble(col, v_bb, v_bg, v_gg));
    c.Q.push_back(assemble(col, vp_bb, vp_bg, vp_gg));
    c.sum_pq.push_back(
        assemble(col, v_bb + vp_bb, v_bg + vp_bg, v_gg + vp_gg));
    c.mixed_pq.push_back(assemble(col, v_bb / 3.0 + vp_bb / 2.0,
                                  v_bg / 3.0 + vp_bg / 2.0,
                                  v_gg / 3.0 + vp_gg / 2.0));
  }
  for (Index t = 0; t < q; ++t) {
    const Vector col = data_.Z.col(t);
    c.P.push_back(assemble(col, w_bb, w_bg, w_gg));
    c.Q.push_back(assemble(col, wp_bb, wp_bg, wp_gg));
    c.sum_pq.push_back(
        assemble(col, w_bb + wp_bb, w_bg + wp_bg, w_gg + wp_gg));
    c.mixed_pq.push_back(assemble(col, w_bb / 3.0 + wp_bb / 2.0,
                                  w_bg / 3.0 + wp_bg / 2.0,
                                  w_gg / 3.0 + wp_gg / 2.0));
  }
  return c;
}

std::pair<Index, Index> BetaBinModel::parameter_dimension() const {
  return {data_.X.cols(), data_.Z.cols()};
}

Vector BetaBinModel::default_start() const {
  const Index n = data_.y.size();
  const Index p = data_.X.cols();
  const Index q = data_.Z.cols();

  Vector z(n);
  for (Index i = 0; i < n; ++i) {
    const double prop = (data_.y[i] + 0.5) / (data_.m[i] + 1.0);
    z[i] = std::log(prop / (1.0 - prop));
  }
  const Vector beta = data_.X.colPivHouseholderQr().solve(z);

  // Moment estimate of the overdispersion from the fitted binomial variance.
  const Vector eta = data_.X * beta;
  double excess = 0.0;
  double scale = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double mu = 1.0 / (1.0 + std::exp(-eta[i]));
    const double m = data_.m[i];
    const double base = m * mu * (1.0 - mu);
    const double resid = data_.y[i] - m * mu;
    excess += resid * resid - base;
    scale += base * (m - 1.0);
  }
  double phi_hat = scale > 0.0 ? excess / scale : 0.1;
  phi_hat = std::min(std::max(phi_hat, 0.01), 0.9);

  Vector theta = Vector::Zero(p + q);
  theta.head(p) = beta;
  theta[p] = links_.precision == PrecisionLink::identity
                 ? phi_hat
                 : std::log(phi_hat / (1.0 - phi_hat));
  return theta;
}

DivergenceReport detect_divergence(const std::vector<IterationRecord>& trace,
                                   const Matrix& X) {
  if (trace.size() < 3) {
    throw std::invalid_argument(
        "detect_divergence: trace must hold at least 3 iterations");
  }
  const Index p = X.cols();
  const size_t window = std::min<size_t>(5, trace.size());
  const size_t first = trace.size() - window;
  const size_t last = trace.size() - 1;

  DivergenceReport report;
  for (Index r = 0; r < p; ++r) {
    bool growing = true;
    for (size_t k = first + 1; k <= last; ++k) {
      const double prev = std::abs(trace[k - 1].theta[r]);
      const double cur = std::abs(trace[k].theta[r]);
      if (!(cur > prev) || cur < 1.2 * prev) {
        growing = false;
        break;
      }
    }
    if (!growing) continue;
    const double se_first = trace[first].std_errors[r];
    const double se_last = trace[last].std_errors[r];
    if (se_last >= 1.5 * se_first) {
      report.components.push_back(r);
    }
  }

  // The scoring iteration cannot drift past |eta| ~ ln(1/rcond_limit) ~ 27.6
  // before the information matrix trips the singularity guard, so the
  // saturation threshold sits below that wall; any legitimate fit stays
  // under |eta| ~ 10.
  const Vector eta = X * trace[last].theta.head(p);
  if (eta.lpNorm<Eigen::Infinity>() > 20.0) {
    report.flagged = true;
    if (report.components.empty()) {
      Index worst = 0;
      trace[last].theta.head(p).cwiseAbs().maxCoeff(&worst);
      report.components.push_back(worst);
    }
  }
  report.flagged = report.flagged || !report.components.empty();
  return report;
}

}  // namespace adjscore::betabin
