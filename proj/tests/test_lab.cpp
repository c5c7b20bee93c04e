#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ergolab/lab.hpp"

using namespace ergolab;

namespace {

const Metric* find_metric(const ExperimentReport& rep, const std::string& suffix) {
  for (const auto& m : rep.metrics)
    if (m.name.size() >= suffix.size() && m.name.compare(m.name.size() - suffix.size(), suffix.size(), suffix) == 0)
      return &m;
  return nullptr;
}

ExperimentConfig config(const std::string& text) { return ExperimentConfig::from_json(nlohmann::json::parse(text)); }

ErrorKind kind_of(const std::function<void()>& body) {
  try {
    body();
  } catch (const LabError& e) {
    return e.kind();
  }
  return ErrorKind::Internal;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = config(R"({"experiment":"equidistribution","seed":7,"params":{"N":10}})");
  CHECK(c.experiment == "equidistribution");
  CHECK(c.seed == 7);
  CHECK(c.output.empty());
  CHECK(ExperimentConfig::from_json(c.to_json()).to_json() == c.to_json());
  CHECK(kind_of([] { config("[1,2]"); }) == ErrorKind::InvalidInput);
  CHECK(kind_of([] { config(R"({"experiment":"x","params":3})"); }) == ErrorKind::InvalidInput);
  CHECK(kind_of([] { run_experiment(config(R"({"experiment":"nope"})")); }) == ErrorKind::InvalidInput);
  CHECK(kind_of([] { run_experiment(config(R"({"experiment":"equidistribution","params":{"N":"ten"}})")); }) ==
        ErrorKind::InvalidInput);
}

TEST_CASE("status rules and csv") {
  ExperimentReport rep;
  Metric ok{"a", 0.5, 1.0, 0.5, false, true, "1/2"};
  rep.assert_metric(ok);
  CHECK(rep.status == Status::Pass);
  Metric soft{"b", 2.0, 1.0, -1.0, false, false, ""};
  rep.check_metric(soft);
  CHECK(rep.status == Status::Inconclusive);
  Metric hard{"c", 2.0, 1.0, -1.0, false, false, ""};
  rep.assert_metric(hard);
  CHECK(rep.status == Status::Refuted);
  rep.check_metric(soft);
  CHECK(rep.status == Status::Refuted);
  rep.info("d", 3.0);
  const auto csv = rep.csv();
  CHECK(csv.rfind("name,value,bound,margin,asserted,pass,exact\n", 0) == 0);
  CHECK(csv.find("a,0.5,1,0.5,1,1,1/2\n") != std::string::npos);
  CHECK(csv.find("d,3,,,0,1,\n") != std::string::npos);
  CHECK(std::string(to_string(Status::Inconclusive)) == "INCONCLUSIVE");
}

TEST_CASE("experiment registry") {
  const auto list = list_experiments();
  std::vector<std::string> ids;
  for (const auto& e : list) ids.push_back(e.id);
  CHECK(ids == std::vector<std::string>{"main_inequality", "sqrt_recurrence", "theorem_stage", "equidistribution"});
}

TEST_CASE("main inequality on a small exact model") {
  const auto rep = run_experiment(config(R"({"experiment":"main_inequality","params":{"q":31,"k":4,"r":5,"functions":6}})"));
  CHECK(rep.status == Status::Pass);
  const auto* f0 = find_metric(rep, "f0.gap");
  REQUIRE(f0);
  CHECK(f0->asserted);
  CHECK(f0->value == 0.0);  // constant function: both sides are c^3
  for (const auto& m : rep.metrics)
    if (m.asserted) CHECK(m.pass);
  CHECK(kind_of([] { run_experiment(config(R"({"experiment":"main_inequality","params":{"q":30}})")); }) ==
        ErrorKind::InvalidInput);
  CHECK(kind_of([] { run_experiment(config(R"({"experiment":"main_inequality","params":{"k":5,"r":5}})")); }) ==
        ErrorKind::InvalidInput);
}

TEST_CASE("sqrt recurrence") {
  const auto all = run_experiment(config(
      R"({"experiment":"sqrt_recurrence","params":{"model":{"kind":"rotation","q":101,"step":[3]},"set":{"kind":"all"},"N":300}})"));
  CHECK(all.status == Status::Pass);
  REQUIRE(find_metric(all, "max_positive"));
  CHECK(find_metric(all, "max_positive")->value == 1.0);
  REQUIRE(find_metric(all, "min"));
  CHECK(find_metric(all, "min")->value == 1.0);

  const auto weyl = run_experiment(config(
      R"({"experiment":"sqrt_recurrence","params":{"model":{"kind":"weyl","q":13,"a":2},"set":{"kind":"random","density":0.4},"N":500}})"));
  CHECK(weyl.status == Status::Pass);
  REQUIRE(find_metric(weyl, "max_positive"));
  CHECK(find_metric(weyl, "max_positive")->value > 0);

  CHECK(kind_of([] {
          run_experiment(config(
              R"({"experiment":"sqrt_recurrence","params":{"set":{"kind":"random","density":0.2},"delta":0.3}})"));
        }) == ErrorKind::InvalidInput);

  const auto empty = run_experiment(config(
      R"({"experiment":"sqrt_recurrence","params":{"ball":{"beta":"1/3","k":0,"eps":"1/100","center":["1/2"]},"N":50}})"));
  CHECK(empty.status == Status::Inconclusive);
}

TEST_CASE("theorem stages") {
  const auto zero = run_experiment(config(R"({"experiment":"theorem_stage","params":{"stages":0}})"));
  CHECK(zero.status == Status::Pass);
  CHECK(zero.metrics.empty());
  CHECK(kind_of([] { run_experiment(config(R"({"experiment":"theorem_stage","params":{"eta":"1/2"}})")); }) ==
        ErrorKind::InvalidInput);
  CHECK(kind_of([] { run_experiment(config(R"({"experiment":"theorem_stage","params":{"stages":4}})")); }) ==
        ErrorKind::InvalidInput);

  const auto dir = std::filesystem::temp_directory_path() / "ergolab_stage_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  nlohmann::json cfg = {{"experiment", "theorem_stage"},
                        {"output", dir.string()},
                        {"params", {{"stages", 2}, {"N", 20000}, {"mc_samples", 2000}}}};
  const auto rep = run_experiment(ExperimentConfig::from_json(cfg));
  CHECK(rep.status == Status::Pass);
  REQUIRE(find_metric(rep, "stage1.verified"));
  CHECK(find_metric(rep, "stage1.verified")->pass);
  REQUIRE(find_metric(rep, "stage2.square_identity"));
  CHECK(std::filesystem::exists(dir / "stage1.cert"));
  CHECK(std::filesystem::exists(dir / "stage2.cert"));
  CHECK(std::filesystem::exists(dir / "report.json"));
  const auto csv = slurp(dir / "metrics.csv");
  CHECK(csv.rfind("name,value", 0) == 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("equidistribution") {
  const auto gen = run_experiment(
      config(R"({"experiment":"equidistribution","params":{"alpha":"0/1","beta":"sqrt2","N":200000,"characters":[[0],[1]]}})"));
  CHECK(gen.status == Status::Pass);

  const auto per = run_experiment(
      config(R"({"experiment":"equidistribution","params":{"alpha":"0/1","beta":"1/3","N":3000,"characters":[[1]]}})"));
  CHECK(per.status == Status::Pass);
  const auto* avg = find_metric(per, "period_average");
  REQUIRE(avg);
  // |(1/3) sum_{n<3} e(n^2/3)| = |1 + 2 e(1/3)| / 3 = 1/sqrt(3)
  CHECK(avg->value == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-9));
}

TEST_CASE("runs are reproducible") {
  const auto dir = std::filesystem::temp_directory_path() / "ergolab_repro_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  nlohmann::json cfg = {{"experiment", "main_inequality"},
                        {"seed", 3},
                        {"output", dir.string()},
                        {"params", {{"q", 31}, {"k", 4}, {"r", 5}, {"functions", 4}}}};
  run_experiment(ExperimentConfig::from_json(cfg));
  const auto first = slurp(dir / "metrics.csv");
  run_experiment(ExperimentConfig::from_json(cfg));
  CHECK(slurp(dir / "metrics.csv") == first);
  CHECK_FALSE(std::filesystem::exists(dir / "metrics.csv.tmp"));
  std::filesystem::remove_all(dir);
}
