#include "adjscore/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <memory>
#include <sstream>
#include <thread>

#include "adjscore/beta_binomial.hpp"
#include "adjscore/beta_regression.hpp"
#include "adjscore/csv.hpp"
#include "adjscore/errors.hpp"
#include "adjscore/rng.hpp"

namespace adjscore::sim {

namespace {

// Substream reserved for covariate generation; replication streams use the
// replication index.
constexpr std::uint64_t kDesignStream = ~std::uint64_t{0};

struct StudyDesign {
  Matrix X;
  Matrix Z;
  Eigen::VectorXi trials;  // beta-binomial only
};

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::stringstream stream(value);
  std::string item;
  while (std::getline(stream, item, ',')) {
    const std::string t = trim(item);
    if (!t.empty()) items.push_back(t);
  }
  return items;
}

Vector parse_vector(const std::string& value, const std::string& key) {
  const std::vector<std::string> items = split_list(value);
  Vector out(static_cast<Index>(items.size()));
  for (size_t i = 0; i < items.size(); ++i) {
    try {
      out[static_cast<Index>(i)] = std::stod(items[i]);
    } catch (const std::exception&) {
      throw std::runtime_error("config: cannot parse number '" + items[i] +
                               "' in key '" + key + "'");
    }
  }
  return out;
}

bool parse_bool(const std::string& value, const std::string& key) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw std::runtime_error("config: key '" + key +
                           "' expects true/false, got '" + value + "'");
}

StudyDesign build_design(const SimulationConfig& config) {
  StudyDesign design;
  if (config.generated_design) {
    if (config.model != "betareg") {
      throw std::runtime_error(
          "config: the generated design is only available for betareg");
    }
    if (config.n < 4) {
      throw std::runtime_error("config: design.n must be at least 4");
    }
    rng::CounterRng generator(config.seed, kDesignStream);
    design.X.resize(config.n, 3);
    for (Index i = 0; i < config.n; ++i) {
      design.X(i, 0) = 1.0;
      design.X(i, 1) = generator.next_normal();
      design.X(i, 2) = std::log(1.0 + generator.next_double());
    }
    design.Z = design.X;
    return design;
  }

  const io::CsvTable table = io::read_csv(config.data_path);
  design.X = io::build_design(table, config.mean_cols, config.mean_intercept);
  design.Z = io::build_design(table, config.prec_cols, config.prec_intercept);
  if (config.model == "betabinom") {
    if (config.trials_col.empty()) {
      throw std::runtime_error("config: betabinom requires a trials column");
    }
    const std::vector<double>& trials = table.column(config.trials_col);
    design.trials.resize(table.rows());
    for (Index i = 0; i < table.rows(); ++i) {
      const double t = trials[static_cast<size_t>(i)];
      if (t < 1.0 || t != std::floor(t)) {
        throw std::runtime_error("config: trials column row " +
                                 std::to_string(i + 2) +
                                 " is not a positive integer");
      }
      design.trials[i] = static_cast<int>(t);
    }
  }
  return design;
}

double apply_inverse_mean_link(const std::string& link, double eta) {
  if (link == "logit") return 1.0 / (1.0 + std::exp(-eta));
  if (link == "probit") return 0.5 * std::erfc(-eta / 1.4142135623730951);
  throw std::runtime_error("config: unknown mean link '" + link + "'");
}

std::unique_ptr<Model> make_model(const SimulationConfig& config,
                                  const StudyDesign& design,
                                  const Vector& y_real,
                                  const Eigen::VectorXi& y_int) {
  if (config.model == "betareg") {
    betareg::BetaRegLinks links;
    links.mean = config.mean_link == "probit" ? betareg::MeanLink::probit
                                              : betareg::MeanLink::logit;
    links.precision = config.prec_link == "identity"
                          ? betareg::PrecisionLink::identity
                          : betareg::PrecisionLink::log_link;
    return std::make_unique<betareg::BetaRegModel>(
        betareg::BetaRegData{y_real, design.X, design.Z}, links);
  }
  betabin::BetaBinLinks links;
  links.precision = config.prec_link == "logit"
                        ? betabin::PrecisionLink::logit
                        : betabin::PrecisionLink::identity;
  return std::make_unique<betabin::BetaBinModel>(
      betabin::BetaBinData{y_int, design.trials, design.X, design.Z}, links);
}

}  // namespace

SimulationConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file '" + path + "'");
  }
  SimulationConfig config;
  config.generated_design = false;
  std::string design_kind;
  std::string section;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::runtime_error("config line " + std::to_string(line_no) +
                                 ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (section == "study") {
      if (key == "model") {
        config.model = value;
      } else if (key == "methods") {
        config.methods.clear();
        for (const std::string& name : split_list(value)) {
          const auto method = method_from_name(name);
          if (!method) {
            throw std::runtime_error("config: unknown method '" + name + "'");
          }
          config.methods.push_back(*method);
        }
      } else if (key == "replications") {
        config.replications = std::stoi(value);
      } else if (key == "seed") {
        config.seed = std::stoull(value);
      } else if (key == "level") {
        config.level = std::stod(value);
      } else if (key == "threads") {
        config.threads = std::stoi(value);
      } else if (key == "tolerance") {
        config.solver.tolerance = std::stod(value);
      } else if (key == "max-iterations") {
        config.solver.max_iterations = std::stoi(value);
      } else {
        throw std::runtime_error("config: unknown key '" + key +
                                 "' in [study]");
      }
    } else if (section == "design") {
      if (key == "kind") {
        design_kind = value;
      } else if (key == "n") {
        config.n = std::stoi(value);
      } else if (key == "data") {
        std::filesystem::path data(value);
        if (data.is_relative()) {
          data = std::filesystem::path(path).parent_path() / data;
        }
        config.data_path = data.string();
      } else if (key == "mean-cols") {
        config.mean_cols = split_list(value);
      } else if (key == "prec-cols") {
        config.prec_cols = split_list(value);
      } else if (key == "mean-intercept") {
        config.mean_intercept = parse_bool(value, key);
      } else if (key == "prec-intercept") {
        config.prec_intercept = parse_bool(value, key);
      } else if (key == "trials") {
        config.trials_col = value;
      } else {
        throw std::runtime_error("config: unknown key '" + key +
                                 "' in [design]");
      }
    } else if (section == "links") {
      if (key == "mean") {
        config.mean_link = value;
      } else if (key == "precision") {
        config.prec_link = value;
      } else {
        throw std::runtime_error("config: unknown key '" + key +
                                 "' in [links]");
      }
    } else if (section == "truth") {
      if (key == "beta") {
        config.beta_truth = parse_vector(value, key);
      } else if (key == "gamma") {
        config.gamma_truth = parse_vector(value, key);
      } else {
        throw std::runtime_error("config: unknown key '" + key +
                                 "' in [truth]");
      }
    } else if (section == "report") {
      if (key == "exp-transforms") {
        config.exp_transform_components = split_list(value);
      } else {
        throw std::runtime_error("config: unknown key '" + key +
                                 "' in [report]");
      }
    } else {
      throw std::runtime_error("config: unknown section [" + section + "]");
    }
  }
  if (design_kind == "generated") {
    config.generated_design = true;
  } else if (design_kind != "file") {
    throw std::runtime_error(
        "config: design.kind must be 'generated' or 'file'");
  }
  if (config.model != "betareg" && config.model != "betabinom") {
    throw std::runtime_error("config: model must be betareg or betabinom");
  }
  if (config.prec_link.empty()) {
    config.prec_link = config.model == "betareg" ? "log" : "identity";
  }
  return config;
}

SimulationReport run_study(const SimulationConfig& config) {
  if (config.replications < 1) {
    throw std::runtime_error("run_study: replications must be >= 1");
  }
  if (config.methods.empty()) {
    throw std::runtime_error("run_study: no methods requested");
  }
  const StudyDesign design = build_design(config);
  const Index p = design.X.cols();
  const Index q = design.Z.cols();
  const Index n = design.X.rows();
  const Index dim = p + q;
  if (config.beta_truth.size() != p || config.gamma_truth.size() != q) {
    throw std::runtime_error(
        "run_study: truth vectors do not match the design dimensions");
  }

  SimulationReport report;
  report.config = config;
  report.design_rows = n;
  report.truth.resize(dim);
  report.truth << config.beta_truth, config.gamma_truth;
  for (Index j = 0; j < p; ++j) {
    report.component_names.push_back("beta" + std::to_string(j));
  }
  for (Index j = 0; j < q; ++j) {
    report.component_names.push_back("gamma" + std::to_string(j));
  }
  for (const std::string& name : config.exp_transform_components) {
    if (std::find(report.component_names.begin(),
                  report.component_names.end(),
                  name) == report.component_names.end()) {
      throw std::runtime_error("run_study: unknown transform component '" +
                               name + "'");
    }
  }

  // True per-observation parameter values, validated once.
  Vector mu_true(n);
  Vector phi_true(n);
  {
    const Vector eta = design.X * config.beta_truth;
    const Vector zeta = design.Z * config.gamma_truth;
    for (Index i = 0; i < n; ++i) {
      mu_true[i] = apply_inverse_mean_link(config.mean_link, eta[i]);
      phi_true[i] = config.prec_link == "log"
                        ? std::exp(zeta[i])
                        : (config.prec_link == "logit"
                               ? 1.0 / (1.0 + std::exp(-zeta[i]))
                               : zeta[i]);
      if (!(mu_true[i] > 0.0) || !(mu_true[i] < 1.0) || !(phi_true[i] > 0.0)) {
        throw std::runtime_error("run_study: invalid true parameter values");
      }
      if (config.model == "betabinom" && !(phi_true[i] < 1.0)) {
        throw std::runtime_error("run_study: betabinom needs phi in (0, 1)");
      }
    }
  }

  const size_t methods_count = config.methods.size();
  report.records.assign(
      static_cast<size_t>(config.replications) * methods_count, {});

  const auto run_replication = [&](int rep) {
    rng::CounterRng stream(config.seed, static_cast<std::uint64_t>(rep));
    Vector y_real;
    Eigen::VectorXi y_int;
    if (config.model == "betareg") {
      y_real.resize(n);
      for (Index i = 0; i < n; ++i) {
        y_real[i] = rng::draw_beta(mu_true[i], phi_true[i], stream);
      }
    } else {
      y_int.resize(n);
      for (Index i = 0; i < n; ++i) {
        y_int[i] = rng::draw_betabinomial(design.trials[i], mu_true[i],
                                          phi_true[i], stream);
      }
    }
    for (size_t k = 0; k < methods_count; ++k) {
      ReplicationRecord record;
      record.replication = rep;
      record.method = config.methods[k];
      record.estimate = Vector::Constant(
          dim, std::numeric_limits<double>::quiet_NaN());
      record.std_errors = record.estimate;
      try {
        const std::unique_ptr<Model> model =
            make_model(config, design, y_real, y_int);
        SolverOptions options = config.solver;
        options.method = config.methods[k];
        options.record_trace = true;
        const FitResult fit = solve(*model, options);
        record.converged = fit.converged;
        record.estimate = fit.estimate.theta;
        record.std_errors = fit.std_errors;
        if (config.model == "betabinom" && fit.trace.size() >= 3) {
          record.diverged =
              betabin::detect_divergence(fit.trace, design.X).flagged;
        }
      } catch (const std::exception&) {
        // recorded as a failed replication; the study continues
      }
      report.records[static_cast<size_t>(rep) * methods_count + k] =
          std::move(record);
    }
  };

  int threads = config.threads > 0
                    ? config.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, config.replications));
  if (threads == 1) {
    for (int rep = 0; rep < config.replications; ++rep) run_replication(rep);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int worker = 0; worker < threads; ++worker) {
      pool.emplace_back([&, worker] {
        for (int rep = worker; rep < config.replications; rep += threads) {
          run_replication(rep);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }

  report.methods = compute_metrics(config, report.component_names,
                                   report.truth, report.records);
  return report;
}

std::vector<MethodMetrics> compute_metrics(
    const SimulationConfig& config,
    const std::vector<std::string>& component_names, const Vector& truth,
    const std::vector<ReplicationRecord>& records) {
  const Index dim = truth.size();
  const double z = normal_quantile(0.5 * (1.0 + config.level));

  std::vector<MethodMetrics> out;
  for (const Method method : config.methods) {
    MethodMetrics metrics;
    metrics.method = method;

    std::vector<const ReplicationRecord*> used;
    for (const ReplicationRecord& record : records) {
      if (record.method != method) continue;
      if (record.diverged) {
        ++metrics.diverged;
      } else if (!record.converged) {
        ++metrics.nonconverged;
      } else {
        used.push_back(&record);
      }
    }
    metrics.used = static_cast<int>(used.size());

    for (Index j = 0; j < dim; ++j) {
      ComponentMetrics cm;
      cm.name = component_names[static_cast<size_t>(j)];
      long below = 0, above = 0, ties = 0, covered = 0;
      double sum_err = 0.0, sum_sq = 0.0, sum_exp = 0.0;
      for (const ReplicationRecord* record : used) {
        const double est = record->estimate[j];
        const double err = est - truth[j];
        if (est < truth[j]) {
          ++below;
        } else if (est > truth[j]) {
          ++above;
        } else {
          ++ties;
        }
        sum_err += err;
        sum_sq += err * err;
        sum_exp += std::exp(est);
        const double half = z * record->std_errors[j];
        if (est - half <= truth[j] && truth[j] <= est + half) ++covered;
      }
      if (!used.empty()) {
        const double denom = static_cast<double>(used.size());
        cm.pu = 100.0 * static_cast<double>(below) / denom;
        cm.over = 100.0 * static_cast<double>(above) / denom;
        cm.ties = 100.0 * static_cast<double>(ties) / denom;
        cm.bias = sum_err / denom;
        cm.rmse = std::sqrt(sum_sq / denom);
        cm.wald = 100.0 * static_cast<double>(covered) / denom;
        if (std::find(config.exp_transform_components.begin(),
                      config.exp_transform_components.end(),
                      cm.name) != config.exp_transform_components.end()) {
          cm.transformed_bias = sum_exp / denom - std::exp(truth[j]);
        }
      }
      metrics.components.push_back(std::move(cm));
    }
    out.push_back(std::move(metrics));
  }
  return out;
}

std::string report_to_json(const SimulationReport& report) {
  nlohmann::json j;
  j["model"] = report.config.model;
  j["replications"] = report.config.replications;
  j["seed"] = report.config.seed;
  j["level"] = report.config.level;
  j["n"] = report.design_rows;
  j["component_names"] = report.component_names;
  j["truth"] = std::vector<double>(report.truth.data(),
                                   report.truth.data() + report.truth.size());
  nlohmann::json methods;
  for (const MethodMetrics& metrics : report.methods) {
    nlohmann::json m;
    m["used"] = metrics.used;
    m["nonconverged"] = metrics.nonconverged;
    m["diverged"] = metrics.diverged;
    nlohmann::json comps;
    for (const ComponentMetrics& cm : metrics.components) {
      nlohmann::json c;
      c["pu"] = cm.pu;
      c["over"] = cm.over;
      c["ties"] = cm.ties;
      c["bias"] = cm.bias;
      c["rmse"] = cm.rmse;
      c["wald"] = cm.wald;
      if (cm.transformed_bias) c["exp_bias"] = *cm.transformed_bias;
      comps[cm.name] = std::move(c);
    }
    m["components"] = std::move(comps);
    methods[method_name(metrics.method)] = std::move(m);
  }
  j["methods"] = std::move(methods);
  return j.dump(2) + "\n";
}

void write_dump_csv(const SimulationReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open dump file '" + path + "'");
  }
  out << "replication,method,component,estimate,std_error,converged,"
         "diverged\n";
  char buffer[64];
  for (const ReplicationRecord& record : report.records) {
    for (Index j = 0; j < record.estimate.size(); ++j) {
      out << record.replication << ',' << method_name(record.method) << ','
          << report.component_names[static_cast<size_t>(j)] << ',';
      std::snprintf(buffer, sizeof(buffer), "%.17g", record.estimate[j]);
      out << buffer << ',';
      std::snprintf(buffer, sizeof(buffer), "%.17g", record.std_errors[j]);
      out << buffer << ',' << (record.converged ? 1 : 0) << ','
          << (record.diverged ? 1 : 0) << '\n';
    }
  }
}

}  // namespace adjscore::sim
