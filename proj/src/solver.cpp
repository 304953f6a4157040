#include "adjscore/solver.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "adjscore/adjustments.hpp"
#include "adjscore/errors.hpp"

namespace adjscore {

const char* method_name(Method method) {
  switch (method) {
    case Method::ml: return "ml";
    case Method::mean_br: return "mean-br";
    default: return "median-br";
  }
}

std::optional<Method> method_from_name(const std::string& name) {
  if (name == "ml") return Method::ml;
  if (name == "mean-br") return Method::mean_br;
  if (name == "median-br") return Method::median_br;
  return std::nullopt;
}

namespace {

constexpr double kInvSqrtTwoPi = 0.39894228040143267793994605993438;

// Full evaluation of the adjusted-score iteration state at one theta.
struct SolverState {
  Vector theta;
  Vector adjusted_score;  // U + B
  Vector step;            // i^{-1} (U + B)
  double scaled_norm = 0.0;
  Matrix vcov;
  Vector std_errors;
};

SolverState evaluate_state(const Model& model, Method method,
                           const Vector& theta) {
  SolverState state;
  state.theta = theta;

  const CumulantSet cumulants = model.cumulants(theta);
  Eigen::LLT<Matrix> llt(cumulants.info);
  if (llt.info() != Eigen::Success) {
    throw numerical_error("solve: information matrix not positive definite",
                          0.0);
  }
  const double rcond = llt.rcond();
  if (!(rcond > 1e-12)) {
    throw numerical_error("solve: information matrix numerically singular",
                          rcond);
  }

  state.adjusted_score = model.score(theta);
  if (method != Method::ml) {
    const AdjustmentBundle bundle = compute_adjustments(cumulants);
    state.adjusted_score += method == Method::mean_br
                                ? bundle.mean_adjustment
                                : bundle.median_adjustment;
  }
  state.step = llt.solve(state.adjusted_score);
  state.scaled_norm = state.step.lpNorm<Eigen::Infinity>();
  state.vcov =
      llt.solve(Matrix::Identity(cumulants.dim(), cumulants.dim()));
  state.std_errors = state.vcov.diagonal().cwiseSqrt();
  return state;
}

void record(FitResult& result, const SolverState& state, bool record_trace) {
  if (!record_trace) return;
  result.trace.push_back(
      {state.theta, state.adjusted_score.lpNorm<Eigen::Infinity>(),
       state.scaled_norm, state.std_errors});
}

}  // namespace

FitResult solve(const Model& model, const SolverOptions& options) {
  if (!(options.tolerance > 0.0)) {
    throw std::invalid_argument("solve: tolerance must be positive");
  }
  if (options.max_iterations < 1) {
    throw std::invalid_argument("solve: max_iterations must be at least 1");
  }

  FitResult result;
  result.method = options.method;
  const auto [p, q] = model.parameter_dimension();
  result.estimate.mean_dim = p;
  result.estimate.precision_dim = q;

  // The starting point must be evaluable; errors here propagate.
  SolverState state = evaluate_state(
      model, options.method,
      options.start ? *options.start : model.default_start());
  record(result, state, options.record_trace);

  if (state.scaled_norm < options.tolerance) {
    result.converged = true;
  } else {
    for (int iteration = 1; iteration <= options.max_iterations; ++iteration) {
      // Remark-3 update.  A step scale that decreases the scaled adjusted
      // score norm is taken when one exists; otherwise the bare full step is
      // kept as long as it stays evaluable and does not blow the norm up,
      // because the quasi-Fisher iteration converges non-monotonically from
      // distant starts and a strict-descent rule would stall it.
      bool accepted = false;
      double scale = 1.0;
      std::optional<SolverState> full_step;
      for (int halving = 0; halving <= options.max_step_halvings; ++halving) {
        const Vector candidate = state.theta + scale * state.step;
        try {
          SolverState next = evaluate_state(model, options.method, candidate);
          if (next.scaled_norm < state.scaled_norm) {
            state = std::move(next);
            accepted = true;
            break;
          }
          if (halving == 0) full_step = std::move(next);
        } catch (const std::domain_error&) {
          // candidate outside the parameter domain; shorten the step
        } catch (const numerical_error&) {
          // information matrix unusable at the candidate; shorten the step
        }
        scale *= 0.5;
      }
      if (!accepted && full_step &&
          full_step->scaled_norm <= 4.0 * state.scaled_norm) {
        state = std::move(*full_step);
        accepted = true;
      }
      if (!accepted) break;  // stalled: no usable step

      result.iterations = iteration;
      record(result, state, options.record_trace);
      if (state.scaled_norm < options.tolerance) {
        result.converged = true;
        break;
      }
    }
  }

  result.estimate.theta = state.theta;
  result.vcov = state.vcov;
  result.std_errors = state.std_errors;
  result.final_adjusted_score_norm = state.scaled_norm;
  return result;
}

double normal_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw std::domain_error("normal_quantile: p must lie in (0, 1)");
  }
  if (p == 0.5) return 0.0;

  // Work on the lower tail q <= 1/2 and restore the sign at the end.
  const bool upper = p > 0.5;
  const double q = upper ? 1.0 - p : p;

  // Abramowitz-Stegun 26.2.23 initial guess (|error| < 4.5e-4), then Newton
  // iterations through the complementary error function.
  const double t = std::sqrt(-2.0 * std::log(q));
  double z = t - (2.515517 + t * (0.802853 + t * 0.010328)) /
                     (1.0 + t * (1.432788 + t * (0.189269 + t * 0.001308)));
  for (int k = 0; k < 3; ++k) {
    const double cdf_tail = 0.5 * std::erfc(z / std::numbers::sqrt2);
    const double density = kInvSqrtTwoPi * std::exp(-0.5 * z * z);
    z += (cdf_tail - q) / density;
  }
  return upper ? z : -z;
}

std::pair<double, double> wald_interval(const FitResult& fit, Index component,
                                        double level) {
  if (!fit.converged) {
    throw std::invalid_argument("wald_interval: fit did not converge");
  }
  if (component < 0 || component >= fit.estimate.dim()) {
    throw std::invalid_argument("wald_interval: component index out of range");
  }
  if (!(level > 0.0) || !(level < 1.0)) {
    throw std::invalid_argument("wald_interval: level must lie in (0, 1)");
  }
  const double z = normal_quantile(0.5 * (1.0 + level));
  const double center = fit.estimate.theta[component];
  const double half_width = z * fit.std_errors[component];
  return {center - half_width, center + half_width};
}

}  // namespace adjscore
