#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "adjscore/rng.hpp"
#include "adjscore/simulation.hpp"

using namespace adjscore;
using namespace adjscore::sim;

namespace {

SimulationConfig small_betareg_config() {
  SimulationConfig config;
  config.model = "betareg";
  config.methods = {Method::ml, Method::median_br};
  config.replications = 40;
  config.seed = 777;
  config.level = 0.95;
  config.generated_design = true;
  config.n = 25;
  config.beta_truth = Vector(3);
  config.beta_truth << 1.5, 0.5, 2.0;
  config.gamma_truth = Vector(3);
  config.gamma_truth << 1.7, 0.7, 3.0;
  config.prec_link = "log";
  return config;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("philox stream determinism and separation") {
  rng::CounterRng a(42, 7);
  rng::CounterRng b(42, 7);
  rng::CounterRng c(42, 8);
  bool any_diff = false;
  for (int k = 0; k < 10; ++k) {
    const std::uint64_t va = a.next_u64();
    CHECK(va == b.next_u64());
    any_diff = any_diff || va != c.next_u64();
  }
  CHECK(any_diff);
}

TEST_CASE("beta sampler moments") {
  rng::CounterRng stream(2024, 0);
  const double mu = 0.7, phi = 5.0;
  const int draws = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int k = 0; k < draws; ++k) {
    const double value = rng::draw_beta(mu, phi, stream);
    CHECK(value > 0.0);
    CHECK(value < 1.0);
    sum += value;
    sum_sq += value * value;
  }
  const double mean = sum / draws;
  const double var = sum_sq / draws - mean * mean;
  CHECK(std::abs(mean - mu) <= 0.005);
  const double target_var = mu * (1.0 - mu) / (1.0 + phi);
  CHECK(std::abs(var - target_var) <= 0.1 * target_var);

  // determinism under the seed
  rng::CounterRng s1(5, 3), s2(5, 3);
  for (int k = 0; k < 10; ++k) {
    CHECK(rng::draw_beta(0.4, 2.0, s1) == rng::draw_beta(0.4, 2.0, s2));
  }
}

TEST_CASE("beta-binomial sampler moments") {
  rng::CounterRng stream(11, 0);
  SUBCASE("single trial is Bernoulli regardless of phi") {
    const int draws = 60000;
    int ones = 0;
    for (int k = 0; k < draws; ++k) {
      ones += rng::draw_betabinomial(1, 0.35, 0.6, stream);
    }
    CHECK(std::abs(ones / double(draws) - 0.35) <= 0.01);
  }
  SUBCASE("variance matches m mu (1-mu) (1 + phi (m-1))") {
    const int m = 10;
    const double mu = 0.5, phi = 0.2;
    const int draws = 100000;
    double sum = 0.0, sum_sq = 0.0;
    for (int k = 0; k < draws; ++k) {
      const int value = rng::draw_betabinomial(m, mu, phi, stream);
      sum += value;
      sum_sq += double(value) * value;
    }
    const double mean = sum / draws;
    const double var = sum_sq / draws - mean * mean;
    const double target = m * mu * (1.0 - mu) * (1.0 + phi * (m - 1));
    CHECK(std::abs(mean - m * mu) <= 0.05);
    CHECK(std::abs(var - target) <= 0.05 * target);
  }
}

TEST_CASE("single-replication study degenerates as expected") {
  SimulationConfig config = small_betareg_config();
  config.replications = 1;
  const SimulationReport report = run_study(config);
  for (const MethodMetrics& mm : report.methods) {
    REQUIRE(mm.used == 1);
    for (const ComponentMetrics& cm : mm.components) {
      CHECK((cm.pu == 0.0 || cm.pu == 100.0 || cm.ties == 100.0));
      CHECK(cm.rmse == doctest::Approx(std::abs(cm.bias)).epsilon(1e-12));
    }
  }
}

TEST_CASE("percentages decompose exactly") {
  SimulationConfig config = small_betareg_config();
  const SimulationReport report = run_study(config);
  for (const MethodMetrics& mm : report.methods) {
    for (const ComponentMetrics& cm : mm.components) {
      CHECK(cm.pu + cm.over + cm.ties == doctest::Approx(100.0).epsilon(1e-12));
      CHECK(cm.wald >= 0.0);
      CHECK(cm.wald <= 100.0);
    }
  }
}

TEST_CASE("report bytes are independent of the worker count") {
  SimulationConfig config = small_betareg_config();
  config.threads = 1;
  const std::string one = report_to_json(run_study(config));
  config.threads = 4;
  const std::string four = report_to_json(run_study(config));
  CHECK(one == four);

  // and fully deterministic across repeated runs
  const std::string again = report_to_json(run_study(config));
  CHECK(one == again);
}

TEST_CASE("metrics recomputed from the dump reproduce the report") {
  SimulationConfig config = small_betareg_config();
  config.replications = 25;
  const SimulationReport report = run_study(config);
  const auto dump_path = temp_file("adjscore_dump_test.csv");
  write_dump_csv(report, dump_path.string());

  // parse the dump back into replication records
  std::ifstream in(dump_path);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);  // header
  const Index dim = report.truth.size();
  std::vector<ReplicationRecord> parsed(
      static_cast<size_t>(config.replications) * config.methods.size());
  for (auto& record : parsed) {
    record.estimate.resize(dim);
    record.std_errors.resize(dim);
  }
  while (std::getline(in, line)) {
    std::stringstream row(line);
    std::string field;
    std::getline(row, field, ',');
    const int rep = std::stoi(field);
    std::getline(row, field, ',');
    const Method method = *method_from_name(field);
    size_t method_index = 0;
    while (config.methods[method_index] != method) ++method_index;
    std::getline(row, field, ',');
    Index comp = 0;
    while (report.component_names[static_cast<size_t>(comp)] != field) ++comp;
    ReplicationRecord& record =
        parsed[static_cast<size_t>(rep) * config.methods.size() +
               method_index];
    record.replication = rep;
    record.method = method;
    std::getline(row, field, ',');
    record.estimate[comp] = std::strtod(field.c_str(), nullptr);
    std::getline(row, field, ',');
    record.std_errors[comp] = std::strtod(field.c_str(), nullptr);
    std::getline(row, field, ',');
    record.converged = field == "1";
    std::getline(row, field, ',');
    record.diverged = field == "1";
  }
  std::filesystem::remove(dump_path);

  const auto recomputed = compute_metrics(config, report.component_names,
                                          report.truth, parsed);
  REQUIRE(recomputed.size() == report.methods.size());
  for (size_t k = 0; k < recomputed.size(); ++k) {
    CHECK(recomputed[k].used == report.methods[k].used);
    CHECK(recomputed[k].nonconverged == report.methods[k].nonconverged);
    CHECK(recomputed[k].diverged == report.methods[k].diverged);
    for (Index j = 0; j < dim; ++j) {
      const auto& a = recomputed[k].components[static_cast<size_t>(j)];
      const auto& b = report.methods[k].components[static_cast<size_t>(j)];
      CHECK(a.pu == b.pu);
      CHECK(a.bias == b.bias);
      CHECK(a.rmse == b.rmse);
      CHECK(a.wald == b.wald);
    }
  }
}

TEST_CASE("transformed-parameter bias cells") {
  SimulationConfig config = small_betareg_config();
  config.replications = 20;
  config.exp_transform_components = {"gamma1", "gamma2"};
  const SimulationReport report = run_study(config);
  for (const MethodMetrics& mm : report.methods) {
    CHECK(mm.components[4].transformed_bias.has_value());
    CHECK(mm.components[5].transformed_bias.has_value());
    CHECK_FALSE(mm.components[0].transformed_bias.has_value());
  }
  SimulationConfig bad = config;
  bad.exp_transform_components = {"nonexistent"};
  CHECK_THROWS(run_study(bad));
}

TEST_CASE("config parsing") {
  const auto path = temp_file("adjscore_config_test.cfg");
  {
    std::ofstream out(path);
    out << "[study]\n"
           "model = betareg\n"
           "methods = ml, median-br\n"
           "replications = 120\n"
           "seed = 99\n"
           "level = 0.9\n"
           "# comment line\n"
           "[design]\n"
           "kind = generated\n"
           "n = 30\n"
           "[links]\n"
           "mean = logit\n"
           "precision = log\n"
           "[truth]\n"
           "beta = 1.5, 0.5, 2\n"
           "gamma = 1.7, 0.7, 3\n"
           "[report]\n"
           "exp-transforms = gamma1\n";
  }
  const SimulationConfig config = parse_config_file(path.string());
  CHECK(config.model == "betareg");
  CHECK(config.methods.size() == 2);
  CHECK(config.replications == 120);
  CHECK(config.seed == 99);
  CHECK(config.level == 0.9);
  CHECK(config.generated_design);
  CHECK(config.n == 30);
  CHECK(config.beta_truth.size() == 3);
  CHECK(config.beta_truth[2] == 2.0);
  CHECK(config.exp_transform_components ==
        std::vector<std::string>{"gamma1"});
  std::filesystem::remove(path);

  CHECK_THROWS(parse_config_file("/nonexistent/path.cfg"));
  const auto bad_path = temp_file("adjscore_bad_config.cfg");
  {
    std::ofstream out(bad_path);
    out << "[study]\nmodel = betareg\nbogus-key = 1\n";
  }
  CHECK_THROWS_WITH_AS(parse_config_file(bad_path.string()),
                       doctest::Contains("bogus-key"), std::runtime_error);
  std::filesystem::remove(bad_path);
}

TEST_CASE("failed replications are reported, never fatal") {
  // An absurd truth keeps some replications from converging; the study must
  // still complete and account for every replication.
  SimulationConfig config = small_betareg_config();
  config.replications = 12;
  config.solver.max_iterations = 2;  // starves the solver on purpose
  const SimulationReport report = run_study(config);
  for (const MethodMetrics& mm : report.methods) {
    CHECK(mm.used + mm.nonconverged + mm.diverged == config.replications);
  }
}
