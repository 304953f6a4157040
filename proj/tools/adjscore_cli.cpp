#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <sstream>

#include "adjscore/beta_binomial.hpp"
#include "adjscore/beta_regression.hpp"
#include "adjscore/csv.hpp"
#include "adjscore/glm.hpp"
#include "adjscore/selftest.hpp"
#include "adjscore/simulation.hpp"
#include "adjscore/solver.hpp"

namespace {

using namespace adjscore;

std::vector<std::string> split_columns(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream stream(value);
  std::string item;
  while (std::getline(stream, item, ',')) {
    const auto begin = item.find_first_not_of(" \t");
    if (begin == std::string::npos) continue;
    const auto end = item.find_last_not_of(" \t");
    out.push_back(item.substr(begin, end - begin + 1));
  }
  return out;
}

struct FitRequest {
  std::string model;
  std::string method = "ml";
  std::string data_path;
  std::string mean_cols;
  std::string prec_cols;
  bool no_mean_intercept = false;
  bool no_prec_intercept = false;
  std::string link_mean;
  std::string link_prec;
  std::string response_col;  // --successes
  std::string trials_col;
  std::string out_path;
  double level = 0.95;
  int max_iter = 200;
  double tol = 1e-8;
};

Vector to_vector(const std::vector<double>& values) {
  return Eigen::Map<const Vector>(values.data(),
                                  static_cast<Index>(values.size()));
}

int cmd_fit(const FitRequest& request) {
  try {
    const auto method = method_from_name(request.method);
    if (!method) {
      throw std::runtime_error("unknown method '" + request.method +
                               "' (expected ml, mean-br or median-br)");
    }
    if (request.response_col.empty()) {
      throw std::runtime_error(
          "--successes must name the response column");
    }
    const io::CsvTable table = io::read_csv(request.data_path);
    const std::vector<std::string> mean_cols =
        split_columns(request.mean_cols);
    const std::vector<std::string> prec_cols =
        split_columns(request.prec_cols);
    const Matrix x =
        io::build_design(table, mean_cols, !request.no_mean_intercept);
    const Vector y = to_vector(table.column(request.response_col));
    const Index n = table.rows();

    std::unique_ptr<Model> model;
    std::string link_mean = request.link_mean;
    std::string link_prec = request.link_prec;
    Matrix z;
    Eigen::VectorXi trials;

    if (request.model == "betareg") {
      if (link_mean.empty()) link_mean = "logit";
      if (link_prec.empty()) link_prec = "log";
      betareg::BetaRegLinks links;
      if (link_mean == "logit") {
        links.mean = betareg::MeanLink::logit;
      } else if (link_mean == "probit") {
        links.mean = betareg::MeanLink::probit;
      } else {
        throw std::runtime_error("betareg mean link must be logit or probit");
      }
      if (link_prec == "log") {
        links.precision = betareg::PrecisionLink::log_link;
      } else if (link_prec == "identity") {
        links.precision = betareg::PrecisionLink::identity;
      } else {
        throw std::runtime_error(
            "betareg precision link must be log or identity");
      }
      for (Index i = 0; i < n; ++i) {
        if (!(y[i] > 0.0) || !(y[i] < 1.0)) {
          throw std::runtime_error(
              "row " + std::to_string(i + 2) +
              ": betareg responses must lie strictly inside (0, 1)");
        }
      }
      z = io::build_design(table, prec_cols, !request.no_prec_intercept);
      model = std::make_unique<betareg::BetaRegModel>(
          betareg::BetaRegData{y, x, z}, links);
    } else if (request.model == "betabinom") {
      if (request.trials_col.empty()) {
        throw std::runtime_error("--trials must name the trials column");
      }
      if (link_mean.empty()) link_mean = "logit";
      if (link_prec.empty()) link_prec = "identity";
      if (link_mean != "logit") {
        throw std::runtime_error("betabinom mean link must be logit");
      }
      betabin::BetaBinLinks links;
      if (link_prec == "identity") {
        links.precision = betabin::PrecisionLink::identity;
      } else if (link_prec == "logit") {
        links.precision = betabin::PrecisionLink::logit;
      } else {
        throw std::runtime_error(
            "betabinom precision link must be identity or logit");
      }
      const std::vector<double>& m_raw = table.column(request.trials_col);
      trials.resize(n);
      Eigen::VectorXi successes(n);
      for (Index i = 0; i < n; ++i) {
        const double m = m_raw[static_cast<size_t>(i)];
        const double yy = y[i];
        if (m < 1.0 || m != std::floor(m)) {
          throw std::runtime_error("row " + std::to_string(i + 2) +
                                   ": trials must be a positive integer");
        }
        if (yy < 0.0 || yy > m || yy != std::floor(yy)) {
          throw std::runtime_error(
              "row " + std::to_string(i + 2) +
              ": successes must be an integer in [0, trials]");
        }
        trials[i] = static_cast<int>(m);
        successes[i] = static_cast<int>(yy);
      }
      z = io::build_design(table, prec_cols, !request.no_prec_intercept);
      model = std::make_unique<betabin::BetaBinModel>(
          betabin::BetaBinData{successes, trials, x, z}, links);
    } else if (request.model == "glm-binomial" ||
               request.model == "glm-poisson" ||
               request.model == "glm-gamma") {
      glm::GlmData data;
      data.X = x;
      data.y = y;
      glm::Family family = glm::Family::binomial;
      glm::Link link = glm::Link::logit;
      bool estimate_dispersion = false;
      if (request.model == "glm-binomial") {
        if (request.trials_col.empty()) {
          throw std::runtime_error("--trials must name the trials column");
        }
        data.weights = to_vector(table.column(request.trials_col));
        if (link_mean.empty()) link_mean = "logit";
        link = link_mean == "probit" ? glm::Link::probit : glm::Link::logit;
      } else {
        family = request.model == "glm-poisson" ? glm::Family::poisson
                                                : glm::Family::gamma;
        estimate_dispersion = family == glm::Family::gamma;
        link = glm::Link::log_link;
      }
      model = std::make_unique<glm::GlmModel>(std::move(data), family, link,
                                              estimate_dispersion);
    } else {
      throw std::runtime_error(
          "unknown model '" + request.model +
          "' (expected betareg, betabinom, glm-binomial, glm-poisson or "
          "glm-gamma)");
    }

    SolverOptions options;
    options.method = *method;
    options.max_iterations = request.max_iter;
    options.tolerance = request.tol;
    const FitResult fit = solve(*model, options);

    betabin::DivergenceReport divergence;
    if (request.model == "betabinom" && fit.trace.size() >= 3) {
      divergence = betabin::detect_divergence(fit.trace, x);
    }

    const Index dim = fit.estimate.dim();
    std::vector<std::string> names;
    for (Index j = 0; j < fit.estimate.mean_dim; ++j) {
      names.push_back("beta" + std::to_string(j));
    }
    for (Index j = 0; j < dim - fit.estimate.mean_dim; ++j) {
      names.push_back("gamma" + std::to_string(j));
    }

    nlohmann::json out;
    out["model"] = request.model;
    out["method"] = request.method;
    out["data"] = {{"path", request.data_path}, {"n", n}};
    if (!link_mean.empty()) out["links"]["mean"] = link_mean;
    if (!link_prec.empty()) out["links"]["precision"] = link_prec;
    out["component_names"] = names;
    out["estimates"] = std::vector<double>(
        fit.estimate.theta.data(), fit.estimate.theta.data() + dim);
    out["std_errors"] = std::vector<double>(fit.std_errors.data(),
                                            fit.std_errors.data() + dim);
    std::vector<std::vector<double>> vcov(static_cast<size_t>(dim));
    for (Index i = 0; i < dim; ++i) {
      vcov[static_cast<size_t>(i)] =
          std::vector<double>(fit.vcov.row(i).begin(), fit.vcov.row(i).end());
    }
    out["vcov"] = vcov;
    out["log_likelihood"] = model->log_likelihood(fit.estimate.theta);
    out["converged"] = fit.converged;
    out["iterations"] = fit.iterations;
    out["final_scaled_score_norm"] = fit.final_adjusted_score_norm;
    out["divergence"] = {{"flagged", divergence.flagged},
                         {"components", divergence.components}};
    if (fit.converged) {
      std::vector<double> lower(static_cast<size_t>(dim));
      std::vector<double> upper(static_cast<size_t>(dim));
      for (Index j = 0; j < dim; ++j) {
        const auto [lo, hi] = wald_interval(fit, j, request.level);
        lower[static_cast<size_t>(j)] = lo;
        upper[static_cast<size_t>(j)] = hi;
      }
      out["wald"] = {{"level", request.level},
                     {"lower", lower},
                     {"upper", upper}};
    }

    if (!request.out_path.empty()) {
      std::ofstream file(request.out_path);
      if (!file) {
        throw std::runtime_error("cannot open output file '" +
                                 request.out_path + "'");
      }
      file << out.dump(2) << "\n";
    }

    std::cout << "model " << request.model << ", method " << request.method
              << ", n = " << n << "\n";
    std::cout << (fit.converged ? "converged" : "DID NOT CONVERGE") << " in "
              << fit.iterations << " iterations (|i^-1 U~| = "
              << fit.final_adjusted_score_norm << ")\n";
    if (divergence.flagged) {
      std::cout << "warning: probable infinite estimates detected\n";
    }
    std::cout << std::left << std::setw(10) << "component" << std::right
              << std::setw(14) << "estimate" << std::setw(14) << "std.err"
              << "\n";
    for (Index j = 0; j < dim; ++j) {
      std::cout << std::left << std::setw(10) << names[static_cast<size_t>(j)]
                << std::right << std::setw(14) << std::setprecision(6)
                << std::fixed << fit.estimate.theta[j] << std::setw(14)
                << fit.std_errors[j] << "\n";
      std::cout.unsetf(std::ios_base::floatfield);
    }
    return fit.converged ? 0 : 2;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  }
}

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 const std::string& dump_path, std::uint64_t* seed_override,
                 int* replications_override) {
  try {
    sim::SimulationConfig config = sim::parse_config_file(config_path);
    if (seed_override) config.seed = *seed_override;
    if (replications_override) config.replications = *replications_override;
    const sim::SimulationReport report = sim::run_study(config);
    const std::string json = sim::report_to_json(report);
    if (out_path.empty()) {
      std::cout << json;
    } else {
      std::ofstream file(out_path);
      if (!file) {
        throw std::runtime_error("cannot open output file '" + out_path +
                                 "'");
      }
      file << json;
    }
    if (!dump_path.empty()) {
      sim::write_dump_csv(report, dump_path);
    }
    return 0;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Maximum likelihood, mean bias-reduced and median bias-reduced fitting "
      "of beta, beta-binomial and exponential-family regression models via "
      "adjusted score equations"};
  app.require_subcommand(1);

  FitRequest fit_request;
  CLI::App* fit = app.add_subcommand("fit", "fit a model to a CSV dataset");
  fit->add_option("--model", fit_request.model,
                  "betareg | betabinom | glm-binomial | glm-poisson | "
                  "glm-gamma")
      ->required();
  fit->add_option("--method", fit_request.method,
                  "ml | mean-br | median-br");
  fit->add_option("--data", fit_request.data_path, "CSV file")->required();
  fit->add_option("--mean-cols", fit_request.mean_cols,
                  "comma-separated mean-model columns");
  fit->add_option("--prec-cols", fit_request.prec_cols,
                  "comma-separated precision-model columns");
  fit->add_flag("--no-mean-intercept", fit_request.no_mean_intercept,
                "drop the mean-model intercept");
  fit->add_flag("--no-prec-intercept", fit_request.no_prec_intercept,
                "drop the precision-model intercept");
  fit->add_option("--link-mean", fit_request.link_mean, "mean link");
  fit->add_option("--link-prec", fit_request.link_prec, "precision link");
  fit->add_option("--successes", fit_request.response_col,
                  "response column (successes for count models)");
  fit->add_option("--trials", fit_request.trials_col,
                  "trials column (betabinom, glm-binomial)");
  fit->add_option("--out", fit_request.out_path, "JSON output path");
  fit->add_option("--level", fit_request.level, "Wald interval level");
  fit->add_option("--max-iter", fit_request.max_iter, "iteration cap");
  fit->add_option("--tol", fit_request.tol,
                  "tolerance on the scaled adjusted score");

  std::string config_path;
  std::string sim_out;
  std::string dump_path;
  std::uint64_t seed_override = 0;
  int replications_override = 0;
  CLI::App* simulate =
      app.add_subcommand("simulate", "run a Monte Carlo study");
  simulate->add_option("--config", config_path, "study config file")
      ->required();
  simulate->add_option("--out", sim_out, "report JSON path (default stdout)");
  simulate->add_option("--dump", dump_path, "per-replication CSV dump path");
  CLI::Option* seed_opt =
      simulate->add_option("--seed", seed_override, "override the seed");
  CLI::Option* rep_opt = simulate->add_option(
      "--replications", replications_override, "override replications");

  CLI::App* selftest =
      app.add_subcommand("selftest", "run the embedded oracle suite");

  CLI11_PARSE(app, argc, argv);

  if (fit->parsed()) return cmd_fit(fit_request);
  if (simulate->parsed()) {
    return cmd_simulate(config_path, sim_out, dump_path,
                        seed_opt->count() ? &seed_override : nullptr,
                        rep_opt->count() ? &replications_override : nullptr);
  }
  if (selftest->parsed()) return adjscore::run_selftest(std::cout);
  return 1;
}
