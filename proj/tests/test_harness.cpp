#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "landscape/harness.hpp"

#include "helpers.hpp"

using landscape::ExperimentConfig;
using landscape::ExperimentReport;
using landscape::Json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::filesystem::path fresh_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("landscape_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

ExperimentConfig small_conjecture() {
  ExperimentConfig cfg;
  cfg.experiment = "conjecture";
  cfg.k_list = {3};
  cfg.m_list = {2};
  cfg.samples = 20;
  cfg.master_seed = 7;
  return cfg;
}

}  // namespace

TEST_CASE("number formatting round-trips doubles through shortest decimal",
          "[harness][report]") {
  landscape::GaussianStream stream(91);
  for (int t = 0; t < 200; ++t) {
    const double x = stream.gaussian() * std::pow(10.0, stream.gaussian());
    const std::string s = landscape::format_double(x);
    REQUIRE(std::strtod(s.c_str(), nullptr) == x);
  }
  REQUIRE(landscape::format_double(0.25) == "0.25");
  REQUIRE(landscape::format_int(-3) == "-3");
}

TEST_CASE("histograms clamp out-of-range values into the edge bins",
          "[harness][report]") {
  landscape::Histogram hist(50, 0.0, 10.0);
  hist.add(-1.0);
  hist.add(0.0);
  hist.add(9.99);
  hist.add(25.0);
  REQUIRE(hist.counts[0] == 2);
  REQUIRE(hist.counts[49] == 2);
  REQUIRE(std::abs(hist.bin_left(5) - 1.0) <= 1e-15);
  REQUIRE(std::abs(hist.bin_right(5) - 1.2) <= 1e-15);

  const landscape::CsvTable csv = hist.to_csv();
  const std::string text = csv.to_string();
  REQUIRE(text.substr(0, text.find('\n')) == "bin_left,bin_right,count");
  REQUIRE_THROWS_AS(landscape::CsvTable({"a", "b"}).add({"1"}),
                    landscape::InvalidParams);
}

TEST_CASE("config hashes are stable for equal content and differ otherwise",
          "[harness][report]") {
  Json a, b, c;
  a["k"] = 5;
  a["eta"] = 0.25;
  b["eta"] = 0.25;
  b["k"] = 5;
  c["k"] = 6;
  c["eta"] = 0.25;
  REQUIRE(landscape::config_hash(a) == landscape::config_hash(b));
  REQUIRE(landscape::config_hash(a) != landscape::config_hash(c));
  REQUIRE(landscape::config_hash(a).size() == 16);
}

TEST_CASE("matrices round-trip through their JSON encoding",
          "[harness][report]") {
  landscape::GaussianStream stream(92);
  landscape::Mat m(3, 2);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) m(i, j) = stream.gaussian();
  const Json j = landscape::matrix_to_json(m);
  const landscape::Mat back = landscape::matrix_from_json(j);
  REQUIRE(testutil::max_abs_diff(m, back) == 0.0);
}

TEST_CASE("config resolution validates fields and applies full-protocol "
          "scaling",
          "[harness]") {
  ExperimentConfig cfg = small_conjecture();
  REQUIRE_NOTHROW(landscape::detail::resolve_config(cfg));

  ExperimentConfig bad = cfg;
  bad.k = 0;
  REQUIRE_THROWS_AS(landscape::detail::resolve_config(bad),
                    landscape::ConfigError);
  bad = cfg;
  bad.variance = 0.0;
  REQUIRE_THROWS_AS(landscape::detail::resolve_config(bad),
                    landscape::ConfigError);
  bad = cfg;
  bad.d = 2;
  bad.k = 3;
  REQUIRE_THROWS_AS(landscape::detail::ambient_dim(
                        landscape::detail::resolve_config(bad), 3),
                    landscape::ConfigError);

  ExperimentConfig scaled = cfg;
  scaled.full_scale = true;
  const ExperimentConfig resolved = landscape::detail::resolve_config(scaled);
  REQUIRE(resolved.runs >= 500);
  REQUIRE(resolved.samples >= 1000);

  ExperimentConfig unknown = cfg;
  unknown.experiment = "nonsense";
  REQUIRE_THROWS_AS(landscape::run_experiment(unknown),
                    landscape::ConfigError);
}

TEST_CASE("log-log slope fitting recovers exact power laws", "[harness]") {
  std::vector<double> x, y;
  for (const double e : {1e-1, 1e-2, 1e-3}) {
    x.push_back(std::log(e));
    y.push_back(std::log(7.0 * e * e * e));
  }
  REQUIRE(std::abs(landscape::detail::fit_slope(x, y) - 3.0) <= 1e-12);
  REQUIRE_THROWS_AS(landscape::detail::fit_slope({1.0}, {2.0}),
                    landscape::InvalidParams);
}

TEST_CASE("conjecture sweep reruns are byte-identical on disk", "[harness]") {
  const ExperimentConfig cfg = small_conjecture();
  const ExperimentReport a = landscape::conjecture_sweep(cfg);
  const ExperimentReport b = landscape::conjecture_sweep(cfg);
  REQUIRE(a.document.dump(2) == b.document.dump(2));

  const auto dir_a = fresh_dir("conj_a");
  const auto dir_b = fresh_dir("conj_b");
  landscape::write_report(a, dir_a);
  landscape::write_report(b, dir_b);
  REQUIRE(slurp(dir_a / "report.json") == slurp(dir_b / "report.json"));
  REQUIRE(slurp(dir_a / "conjecture.csv") == slurp(dir_b / "conjecture.csv"));
  REQUIRE_FALSE(slurp(dir_a / "report.json").empty());
  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);
}

TEST_CASE("conjecture sweep asserts the sign and monotonicity structure it "
          "reports",
          "[harness]") {
  const ExperimentReport report = landscape::conjecture_sweep(small_conjecture());
  const Json& doc = report.document;
  REQUIRE(doc.contains("cells"));
  REQUIRE(doc["cells"].size() == 1);
  const Json& cell = doc["cells"][0];
  REQUIRE(cell["k"] == 3);
  REQUIRE(cell["m"] == 2);
  REQUIRE(cell["gaussian"].contains("min_lhs"));
  REQUIRE(cell["adversarial"].contains("min_lhs"));
  REQUIRE(doc["assertions"].contains("gaussian_margin_positive"));
  REQUIRE(doc["assertions"].contains("adversarial_lhs_positive"));
  REQUIRE(doc["provenance"].contains("config_hash"));
  REQUIRE(doc["provenance"]["tool_version"] == landscape::kToolVersion);
}

TEST_CASE("probe sweep records the closed-form mismatch honestly",
          "[harness]") {
  ExperimentConfig cfg;
  cfg.experiment = "witness_sweep";
  cfg.master_seed = 3;
  const ExperimentReport report = landscape::witness_sweep(cfg);
  const Json& assertions = report.document["assertions"];
  REQUIRE(assertions["all_quadratic_forms_negative"] == true);
  REQUIRE(assertions["opsc_slope_in_band"] == true);
  REQUIRE(assertions["formula_match_1e8"] == false);
  REQUIRE(assertions["pl_f_slope_in_band"] == false);
  REQUIRE(assertions["pl_grad_sq_slope_in_band"] == false);
  REQUIRE_FALSE(report.ok);
  REQUIRE(report.document["nonconvexity_max_rel_err"].get<double>() > 1e-3);

  const ExperimentReport again = landscape::witness_sweep(cfg);
  REQUIRE(report.document.dump() == again.document.dump());
}

TEST_CASE("small minima hunt produces a classified catalog and holds its "
          "assertions",
          "[harness]") {
  ExperimentConfig cfg;
  cfg.experiment = "minima_hunt";
  cfg.k = 3;
  cfg.runs = 6;
  cfg.runs_large = 2;
  cfg.master_seed = 5;
  // The default 5/k step exceeds the stability threshold 2/L at k = 3
  // (top curvature 1.22), so descent would cycle without converging.
  cfg.eta = 0.5;
  const ExperimentReport report = landscape::minima_hunt(cfg);
  const Json& doc = report.document;
  REQUIRE(doc["aggregates"]["runs_converged"].get<long long>() >= 1);
  REQUIRE(doc["representatives"].is_array());
  REQUIRE_FALSE(doc["representatives"].empty());
  for (const auto& rep : doc["representatives"]) {
    REQUIRE(rep.contains("f"));
    REQUIRE(rep.contains("norm_sum"));
    REQUIRE(rep.contains("min_eig"));
    REQUIRE(rep.contains("matrix"));
  }
  REQUIRE(doc["assertions"]["all_minima_psd"] == true);
  REQUIRE(doc["assertions"]["norm_sum_bound"] == true);

  const ExperimentReport again = landscape::minima_hunt(cfg);
  REQUIRE(doc.dump() == again.document.dump());
}

TEST_CASE("perturbed-descent study reports its recipe and success counts "
          "deterministically",
          "[harness]") {
  ExperimentConfig cfg;
  cfg.experiment = "pgd_convergence";
  cfg.k = 2;
  cfg.m = 2;
  cfg.d = 6;
  cfg.runs = 2;
  cfg.pgd_iters = 200;
  cfg.master_seed = 9;
  const ExperimentReport report = landscape::pgd_convergence(cfg);
  const Json& doc = report.document;
  REQUIRE(doc["recipe"].contains("lambda_hat"));
  REQUIRE(doc["recipe"].contains("eta_recipe"));
  REQUIRE(doc["recipe"]["alpha_noise"].get<double>() ==
          cfg.delta / (4.0 * 4.0));
  REQUIRE(doc["runs"].size() == 4);  // pgd arm + control arm per run
  REQUIRE(doc["aggregates"].contains("success_rate"));
  REQUIRE(doc["aggregates"].contains("control_success_rate"));

  const ExperimentReport again = landscape::pgd_convergence(cfg);
  REQUIRE(doc.dump() == again.document.dump());
}

TEST_CASE("experiment dispatch routes by name", "[harness]") {
  ExperimentConfig cfg = small_conjecture();
  const ExperimentReport direct = landscape::conjecture_sweep(cfg);
  const ExperimentReport routed = landscape::run_experiment(cfg);
  REQUIRE(direct.document.dump() == routed.document.dump());
}
