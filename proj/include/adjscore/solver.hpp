#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "adjscore/model.hpp"

namespace adjscore {

enum class Method { ml, mean_br, median_br };

const char* method_name(Method method);
std::optional<Method> method_from_name(const std::string& name);

struct SolverOptions {
  Method method = Method::ml;
  int max_iterations = 200;
  double tolerance = 1e-8;  // on the max-norm of i^{-1} (U + B)
  int max_step_halvings = 20;
  std::optional<Vector> start;
  bool record_trace = true;
};

struct IterationRecord {
  Vector theta;
  double adjusted_score_norm;  // max-norm of U + B
  double scaled_score_norm;    // max-norm of i^{-1} (U + B)
  Vector std_errors;
};

struct FitResult {
  Method method = Method::ml;
  ParameterPoint estimate;
  Matrix vcov;        // i(theta_hat)^{-1}
  Vector std_errors;  // sqrt of the vcov diagonal
  int iterations = 0;
  bool converged = false;
  bool divergence_flag = false;  // set by model diagnostics, not the solver
  double final_adjusted_score_norm = 0.0;  // scaled norm at the final iterate
  std::vector<IterationRecord> trace;
};

// Quasi-Fisher scoring on the adjusted score U + B with
// B in {0, A*, Atilde} according to the method.  Steps that fail to decrease
// the scaled adjusted score norm are halved up to max_step_halvings; a fully
// stalled or exhausted iteration returns converged = false rather than
// throwing.  A singular information matrix at the starting point throws
// numerical_error.
FitResult solve(const Model& model, const SolverOptions& options);

// estimate +/- z_{(1+level)/2} * std_error for one component.
std::pair<double, double> wald_interval(const FitResult& fit, Index component,
                                        double level);

// Standard normal quantile, absolute accuracy well below 1e-9.
double normal_quantile(double p);

}  // namespace adjscore
