#include "adjscore/selftest.hpp"

#include <cmath>
#include <functional>
#include <random>

#include "adjscore/adjustments.hpp"
#include "adjscore/beta_binomial.hpp"
#include "adjscore/beta_regression.hpp"
#include "adjscore/glm.hpp"

namespace adjscore {

namespace {

// Random fully-symmetric third-cumulant tensors with a well-conditioned SPD
// information matrix.
CumulantTensor random_tensor(Index d, std::mt19937& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CumulantTensor t;
  Matrix a(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) a(i, j) = normal(gen);
  t.info = a * a.transpose() + static_cast<double>(d) * Matrix::Identity(d, d);

  std::vector<Matrix> raw(static_cast<size_t>(d), Matrix(d, d));
  for (auto& m : raw)
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) m(i, j) = normal(gen);
  t.nu3.assign(static_cast<size_t>(d), Matrix::Zero(d, d));
  for (Index s = 0; s < d; ++s)
    for (Index u = 0; u < d; ++u)
      for (Index v = 0; v < d; ++v) {
        const double sym =
            (raw[s](u, v) + raw[s](v, u) + raw[u](s, v) + raw[u](v, s) +
             raw[v](s, u) + raw[v](u, s)) /
            6.0;
        t.nu3[s](u, v) = sym;
      }

  t.nu21.assign(static_cast<size_t>(d), Matrix(d, d));
  for (Index s = 0; s < d; ++s) {
    Matrix m(d, d);
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) m(i, j) = normal(gen);
    t.nu21[s] = 0.5 * (m + m.transpose());
  }
  return t;
}

CumulantSet pack_tensor(const CumulantTensor& t) {
  CumulantSet c;
  c.info = t.info;
  c.P = t.nu3;
  c.Q = t.nu21;
  return c;
}

double rel_dev(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

bool engine_oracle_group(double& worst) {
  std::mt19937 gen(321);
  worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const Index d = 2 + k % 3;
    const CumulantTensor t = random_tensor(d, gen);
    const Vector oracle = index_notation_oracle(t);
    const AdjustmentBundle bundle = compute_adjustments(pack_tensor(t));
    for (Index r = 0; r < d; ++r) {
      worst = std::max(worst, rel_dev(bundle.M1[r], oracle[r]));
    }
  }
  return worst <= 1e-10;
}

bool remark2_group(double& worst) {
  std::mt19937 gen(654);
  worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const Index d = 2 + k % 3;
    const CumulantTensor t = random_tensor(d, gen);
    const AdjustmentBundle bundle = compute_adjustments(pack_tensor(t));
    const Vector alt =
        bundle.mean_adjustment - t.info * bundle.F2tilde;
    for (Index r = 0; r < d; ++r) {
      worst = std::max(worst, rel_dev(bundle.median_adjustment[r], alt[r]));
    }
  }
  return worst <= 1e-12;
}

bool glm_group(double& worst) {
  std::mt19937 gen(987);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const Index n = 12 + k;
    const Index p = 2 + k % 3;
    glm::GlmData data;
    data.X.resize(n, p);
    data.X.col(0).setOnes();
    for (Index i = 0; i < n; ++i)
      for (Index j = 1; j < p; ++j) data.X(i, j) = normal(gen);
    data.weights = Vector::Constant(n, 5.0);
    data.y = Vector::Zero(n);
    Vector theta(p);
    for (Index j = 0; j < p; ++j) theta[j] = 0.5 * normal(gen);

    const glm::GlmWorkspace ws = glm::glm_workspace(
        data, glm::Family::binomial, glm::Link::logit, theta, false);
    const AdjustmentBundle bundle =
        compute_adjustments(glm::glm_cumulant_set(ws));
    const auto [median_beta, median_phi] =
        glm::glm_closed_form_adjustments(ws, Method::median_br);
    const auto [mean_beta, mean_phi] =
        glm::glm_closed_form_adjustments(ws, Method::mean_br);
    for (Index j = 0; j < p; ++j) {
      worst = std::max(worst, rel_dev(bundle.median_adjustment[j],
                                      median_beta[j]));
      worst = std::max(worst, rel_dev(bundle.mean_adjustment[j],
                                      mean_beta[j]));
    }
    (void)unif;
  }
  return worst <= 1e-10;
}

bool normalization_group(double& worst) {
  worst = 0.0;
  // Beta-binomial pmf sums to one.
  for (int m : {1, 3, 7, 20, 50}) {
    for (double mu : {0.1, 0.5, 0.9}) {
      for (double phi : {0.05, 0.3, 0.8}) {
        double total = 0.0;
        for (int y = 0; y <= m; ++y) {
          total += std::exp(betabin::log_pmf(y, m, mu, phi));
        }
        worst = std::max(worst, std::abs(total - 1.0));
      }
    }
  }
  return worst <= 1e-12;
}

bool bartlett_group(double& worst) {
  worst = 0.0;
  for (int m : {2, 5, 9, 14}) {
    for (double mu : {0.2, 0.5, 0.66}) {
      for (double phi : {0.1, 0.33, 0.7}) {
        const auto l = betabin::l_expectations(m, mu, phi);
        worst = std::max(worst, rel_dev(l[1], -l[9]));
        worst = std::max(worst, rel_dev(l[2], -l[12]));
        worst = std::max(worst, rel_dev(l[3], -l[16]));
      }
    }
  }
  return worst <= 1e-10;
}

}  // namespace

int run_selftest(std::ostream& out) {
  struct Group {
    const char* name;
    std::function<bool(double&)> run;
  };
  const Group groups[] = {
      {"engine-oracle-equivalence", engine_oracle_group},
      {"mean-median-identity", remark2_group},
      {"glm-closed-form-match", glm_group},
      {"pmf-normalization", normalization_group},
      {"bartlett-identities", bartlett_group},
  };
  int failures = 0;
  for (const Group& group : groups) {
    double worst = 0.0;
    const bool ok = group.run(worst);
    out << (ok ? "PASS" : "FAIL") << "  " << group.name
        << "  (worst deviation " << worst << ")\n";
    if (!ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace adjscore
