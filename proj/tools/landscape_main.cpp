// Command-line front end for the landscape library: experiment pipelines,
// one-shot probes, split certification, and Hessian spectra.
//
// Exit codes: 0 = all assertions passed, 2 = assertions violated (reports
// are still written), 1 = configuration or runtime error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "landscape/harness.hpp"
#include "landscape/probes.hpp"
#include "landscape/splitting.hpp"

namespace {

using namespace landscape;

void print_assertions(const Json& assertions) {
  for (const auto& [name, value] : assertions.items())
    std::cout << (value.get<bool>() ? "[ok]   " : "[FAIL] ") << name << "\n";
}

int finish(const ExperimentReport& report, const std::string& out_dir) {
  write_report(report, out_dir);
  if (report.document.contains("assertions"))
    print_assertions(report.document["assertions"]);
  std::cout << "report written to " << out_dir << "/report.json\n";
  return report.ok ? 0 : 2;
}

/// Applies a subcommand's `--config` file to its own options.  CLI11 only
/// processes config files during top-level parsing, so a config option that
/// lives on a subcommand is consumed but never applied; this closes that gap.
/// Explicit command-line values win over the file, unknown keys are an error,
/// and keys may sit flat or under a section named after the subcommand.
void apply_config_file(CLI::App& cmd) {
  const CLI::Option* copt = cmd.get_config_ptr();
  if (copt == nullptr || copt->count() == 0) return;
  const auto path = copt->as<std::string>();
  for (const auto& item : cmd.get_config_formatter()->from_file(path)) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    const bool scoped =
        item.parents.empty() ||
        (item.parents.size() == 1 && item.parents.front() == cmd.get_name());
    if (!scoped)
      throw CLI::ConfigError("unknown section [" + item.parents.front() +
                             "] in " + path);
    CLI::Option* op = cmd.get_option_no_throw("--" + item.name);
    if (op == nullptr && item.name.size() == 1)
      op = cmd.get_option_no_throw("-" + item.name);
    if (op == nullptr)
      throw CLI::ConfigError("unknown key '" + item.name + "' in " + path);
    if (!op->get_configurable())
      throw CLI::ConfigError("key '" + item.name +
                             "' is not allowed in a config file");
    if (op->count() > 0) continue;  // command line overrides the file
    if (op->get_expected_min() == 0) {
      const auto raw = cmd.get_config_formatter()->to_flag(item);
      op->add_result(op->get_flag_value(item.name, raw));
    } else {
      for (const auto& input : item.inputs) op->add_result(input);
    }
    op->run_callback();
  }
}

/// Registers the options shared by the experiment subcommands, bound to cfg.
void add_experiment_options(CLI::App* cmd, ExperimentConfig& cfg) {
  cmd->set_config("--config")->configurable(false);
  cmd->allow_config_extras(false);
  cmd->add_option("--k", cfg.k, "teacher count");
  cmd->add_option("--n", cfg.n, "student count (0: defaults to k)");
  cmd->add_option("--m", cfg.m, "over-parameterization factor");
  cmd->add_option("--d", cfg.d, "ambient dimension (0: defaults to k)");
  cmd->add_option("--runs", cfg.runs, "number of runs");
  cmd->add_option("--runs-large", cfg.runs_large,
                  "extra large-norm-init runs (minima hunt)");
  cmd->add_option("--samples", cfg.samples, "perturbation samples per cell");
  cmd->add_option("--max-iters", cfg.max_iters, "gradient descent cap");
  cmd->add_option("--pgd-iters", cfg.pgd_iters, "perturbed GD iterations");
  cmd->add_option("--log-stride", cfg.log_stride, "trajectory log stride");
  cmd->add_option("--variance", cfg.variance,
                  "per-coordinate perturbation variance");
  cmd->add_option("--eta", cfg.eta, "step size (0: per-experiment default)");
  cmd->add_option("--epsilon", cfg.epsilon, "neighborhood radius");
  cmd->add_option("--delta", cfg.delta, "convergence target (squared)");
  cmd->add_option("--dedup-tol", cfg.dedup_tol,
                  "minima deduplication threshold");
  cmd->add_option("--k-list", cfg.k_list, "teacher-count grid (conjecture)");
  cmd->add_option("--m-list", cfg.m_list, "split-factor grid (conjecture)");
  cmd->add_option("--seed", cfg.master_seed, "master seed");
  cmd->add_option("--out", cfg.out_dir, "output directory");
  cmd->add_flag("--full-scale", cfg.full_scale,
                "full-protocol sizes (500 runs, 1000 samples)");
}

Json probe_record_json(const ProbeRecord& rec) {
  Json j;
  j["probe"] = rec.probe;
  j["params"] = rec.params;
  j["value"] = rec.value;
  j["formula_value"] = rec.formula_value;
  j["margin"] = rec.margin;
  j["seed"] = rec.seed;
  return j;
}

int run_probe(int k, int d, double alpha1, double alpha2, double eps,
              std::uint64_t seed, const std::string& out_dir) {
  const int dim = d > 0 ? d : std::max(k, 2);
  const TeacherConfig v = TeacherConfig::standard_basis(k, dim);
  Json records = Json::array();
  Json assertions;

  const NonconvexityWitness nc = nonconvexity_witness(v, alpha1, alpha2, eps);
  ProbeRecord nc_rec;
  nc_rec.probe = "nonconvexity";
  nc_rec.params = {{"alpha1", alpha1}, {"alpha2", alpha2}, {"eps", eps}};
  nc_rec.value = nc.value;
  nc_rec.formula_value = nc.formula_value;
  nc_rec.margin = -nc.value;
  nc_rec.seed = seed;
  records.push_back(probe_record_json(nc_rec));
  assertions["negative_curvature_found"] = nc.value < 0.0;
  std::cout << "nonconvexity: value " << format_double(nc.value)
            << ", stated formula " << format_double(nc.formula_value) << "\n";

  if (k >= 2) {
    const OpscWitness ow = opsc_witness(v, alpha1, alpha2, eps);
    ProbeRecord o_rec;
    o_rec.probe = "opsc";
    o_rec.params = nc_rec.params;
    o_rec.value = ow.normalized_form;
    o_rec.formula_value = 0.0;
    o_rec.margin = ow.normalized_form;
    o_rec.seed = seed;
    records.push_back(probe_record_json(o_rec));
    const PlWitness pw = pl_witness(v, alpha1, alpha2, eps);
    ProbeRecord p_rec;
    p_rec.probe = "pl";
    p_rec.params = nc_rec.params;
    p_rec.value = pw.grad_norm_sq / pw.f_value;
    p_rec.formula_value = 0.0;
    p_rec.margin = p_rec.value;
    p_rec.seed = seed;
    records.push_back(probe_record_json(p_rec));
    std::cout << "opsc: normalized form " << format_double(ow.normalized_form)
              << "\npl: grad^2/F " << format_double(p_rec.value) << "\n";
  }

  ExperimentReport report;
  Json params;
  params["k"] = k;
  params["d"] = dim;
  params["alpha1"] = alpha1;
  params["alpha2"] = alpha2;
  params["eps"] = eps;
  Json body;
  body["experiment"] = "probe";
  body["seed"] = seed;
  body["params"] = params;
  Json prov = body;
  prov["tool_version"] = kToolVersion;
  prov["full_scale"] = false;
  prov["config_hash"] = config_hash(body);
  report.document["provenance"] = std::move(prov);
  report.document["probes"] = std::move(records);
  report.document["assertions"] = assertions;
  report.ok = assertions["negative_curvature_found"].get<bool>();
  report.document["ok"] = report.ok;
  return finish(report, out_dir);
}

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return Json::parse(in);
}

/// Pulls representative `rep` (or the first non-global one if rep < 0) and
/// the teacher geometry out of a minima-hunt report.
std::pair<StudentParams, TeacherConfig> load_representative(
    const Json& doc, int rep) {
  const Json& params = doc.at("provenance").at("params");
  const int k = params.at("k").get<int>();
  const int d = params.at("d").get<int>();
  const TeacherConfig v = TeacherConfig::standard_basis(k, d);
  const Json& reps = doc.at("representatives");
  if (reps.empty()) throw InvalidParams("report contains no representatives");
  int index = rep;
  if (index < 0) {
    for (std::size_t r = 0; r < reps.size(); ++r)
      if (!reps[r].at("is_global").get<bool>()) {
        index = static_cast<int>(r);
        break;
      }
    if (index < 0)
      throw InvalidParams(
          "no non-global representative in the report; pass --rep explicitly");
  }
  if (index >= static_cast<int>(reps.size()))
    throw IndexOutOfRange("representative index out of range");
  const StudentParams w = StudentParams::from_matrix(
      matrix_from_json(reps[static_cast<std::size_t>(index)].at("matrix")));
  return {w, v};
}

int run_split_certify(const std::string& input, int rep, int neuron,
                      double alpha, const std::string& out_dir) {
  const Json doc = load_json(input);
  const auto [w, v] = load_representative(doc, rep);
  int target = neuron;
  if (target < 0) {
    const std::optional<int> candidate = select_split_candidate(w, v);
    if (!candidate)
      throw InvalidParams(
          "no neuron has negative mean curvature; pass --neuron explicitly");
    target = *candidate;
  }
  const std::optional<SaddleCertificate> cert =
      certify_saddle(w, v, target, alpha);

  ExperimentReport report;
  Json assertions;
  assertions["certificate_found"] = cert.has_value();
  if (cert) {
    const double rel =
        std::abs(cert->quadratic_value - cert->predicted_value) /
        std::abs(cert->predicted_value);
    assertions["quadratic_form_negative"] = cert->quadratic_value < 0.0;
    assertions["prediction_match_1e8"] = rel <= 1e-8;
    Json jc;
    jc["neuron_index"] = cert->spec.neuron_index;
    jc["alpha"] = cert->spec.alpha;
    jc["lambda"] = cert->lambda;
    jc["quadratic_value"] = cert->quadratic_value;
    jc["predicted_value"] = cert->predicted_value;
    jc["prediction_rel_err"] = rel;
    jc["grad_norm_at_split"] = cert->grad_norm_at_split;
    jc["split_matrix"] = matrix_to_json(cert->split_point.vectors);
    report.document["certificate"] = std::move(jc);
    std::cout << "split neuron " << target << ": direction value "
              << format_double(cert->quadratic_value) << " (predicted "
              << format_double(cert->predicted_value) << ")\n";
  } else {
    std::cout << "no certifiable negative eigenvalue for neuron " << target
              << "\n";
  }
  Json params;
  params["input"] = input;
  params["rep"] = rep;
  params["neuron"] = target;
  params["alpha"] = alpha;
  Json body;
  body["experiment"] = "split_certify";
  body["seed"] = 0;
  body["params"] = params;
  Json prov = body;
  prov["tool_version"] = kToolVersion;
  prov["full_scale"] = false;
  prov["config_hash"] = config_hash(body);
  report.document["provenance"] = std::move(prov);
  report.document["assertions"] = assertions;
  report.ok = detail::all_true(assertions);
  report.document["ok"] = report.ok;
  return finish(report, out_dir);
}

int run_spectrum(int k, int d, int m, const std::string& input, int rep,
                 const std::string& out_dir) {
  StudentParams w = StudentParams::from_matrix(Mat::Identity(1, 1));
  TeacherConfig v = TeacherConfig::standard_basis(1, 1);
  if (!input.empty()) {
    auto loaded = load_representative(load_json(input), rep < 0 ? 0 : rep);
    w = loaded.first;
    v = loaded.second;
  } else {
    const int dim = d > 0 ? d : k;
    v = TeacherConfig::standard_basis(k, dim);
    w = balanced_split(v, m);
  }
  const SpectralReport spectrum = eig_symmetric(hessian(w, v).entries);
  CsvTable table({"index", "eigenvalue"});
  for (std::size_t i = 0; i < spectrum.eigenvalues.size(); ++i)
    table.add({format_int(static_cast<long long>(i)),
               format_double(spectrum.eigenvalues[i])});

  ExperimentReport report;
  Json params;
  params["k"] = v.k;
  params["d"] = v.d;
  params["n"] = w.n;
  params["m"] = m;
  params["input"] = input;
  Json body;
  body["experiment"] = "spectrum";
  body["seed"] = 0;
  body["params"] = params;
  Json prov = body;
  prov["tool_version"] = kToolVersion;
  prov["full_scale"] = false;
  prov["config_hash"] = config_hash(body);
  report.document["provenance"] = std::move(prov);
  report.document["eigenvalues"] = spectrum.eigenvalues;
  report.document["min_eig"] = spectrum.eigenvalues.front();
  report.document["max_eig"] = spectrum.eigenvalues.back();
  report.document["psd"] = spectrum.psd;
  report.document["assertions"] = Json::object();
  report.ok = true;
  report.document["ok"] = true;
  report.csv_files.emplace_back("spectrum.csv", std::move(table));
  std::cout << "min eigenvalue " << format_double(spectrum.eigenvalues.front())
            << ", max " << format_double(spectrum.eigenvalues.back()) << "\n";
  return finish(report, out_dir);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Exact landscape toolkit for the Gaussian teacher-student ReLU "
      "network: closed-form loss/gradient/Hessian, landscape probes, and "
      "experiment pipelines."};
  app.require_subcommand(1);

  ExperimentConfig cfg;
  CLI::App* hunt = app.add_subcommand(
      "minima-hunt", "gradient-descent fleet + minima catalog (needs n = k)");
  add_experiment_options(hunt, cfg);
  CLI::App* conjecture = app.add_subcommand(
      "conjecture", "curvature lower-bound sweep at balanced split minima");
  add_experiment_options(conjecture, cfg);
  CLI::App* pgd = app.add_subcommand(
      "pgd", "perturbed gradient descent convergence study");
  add_experiment_options(pgd, cfg);
  CLI::App* witness = app.add_subcommand(
      "witness", "nonconvexity / one-point-convexity / PL witness sweeps");
  add_experiment_options(witness, cfg);

  int probe_k = 2, probe_d = 0;
  double alpha1 = 0.5, alpha2 = 0.5, eps = 1e-2, alpha = 0.5;
  std::uint64_t probe_seed = 1;
  std::string probe_out = "out";
  CLI::App* probe = app.add_subcommand(
      "probe", "one-shot landscape probes at a tilted two-sibling point");
  probe->set_config("--config")->configurable(false);
  probe->allow_config_extras(false);
  probe->add_option("--k", probe_k, "teacher count");
  probe->add_option("--d", probe_d, "ambient dimension (0: max(k, 2))");
  probe->add_option("--alpha1", alpha1, "first sibling weight");
  probe->add_option("--alpha2", alpha2, "second sibling weight");
  probe->add_option("--eps", eps, "tilt size");
  probe->add_option("--seed", probe_seed, "seed recorded in the records");
  probe->add_option("--out", probe_out, "output directory");

  std::string cert_input, cert_out = "out";
  int cert_rep = -1, cert_neuron = -1;
  CLI::App* certify = app.add_subcommand(
      "split-certify",
      "certify a negative-curvature split of a found minimum");
  certify->set_config("--config")->configurable(false);
  certify->allow_config_extras(false);
  certify->add_option(
      "--input", cert_input,
      "minima-hunt report.json to read representatives from (required)");
  certify->add_option("--rep", cert_rep,
                      "representative index (-1: first non-global)");
  certify->add_option("--neuron", cert_neuron,
                      "neuron to split (-1: most negative mean curvature)");
  certify->add_option("--alpha", alpha, "split ratio in (0, 1)");
  certify->add_option("--out", cert_out, "output directory");

  int spec_k = 6, spec_d = 0, spec_m = 1, spec_rep = -1;
  std::string spec_input, spec_out = "out";
  CLI::App* spectrum = app.add_subcommand(
      "spectrum", "Hessian spectrum at a matched or split minimum");
  spectrum->set_config("--config")->configurable(false);
  spectrum->allow_config_extras(false);
  spectrum->add_option("--k", spec_k, "teacher count");
  spectrum->add_option("--d", spec_d, "ambient dimension (0: k)");
  spectrum->add_option("--m", spec_m, "balanced split factor (1: exact match)");
  spectrum->add_option("--input", spec_input,
                       "minima-hunt report.json (overrides --k/--m)");
  spectrum->add_option("--rep", spec_rep, "representative index");
  spectrum->add_option("--out", spec_out, "output directory");

  try {
    app.parse(argc, argv);
    for (CLI::App* sub : app.get_subcommands()) apply_config_file(*sub);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (hunt->parsed()) {
      cfg.experiment = "minima_hunt";
      return finish(minima_hunt(cfg), cfg.out_dir);
    }
    if (conjecture->parsed()) {
      cfg.experiment = "conjecture";
      return finish(conjecture_sweep(cfg), cfg.out_dir);
    }
    if (pgd->parsed()) {
      cfg.experiment = "pgd_convergence";
      return finish(pgd_convergence(cfg), cfg.out_dir);
    }
    if (witness->parsed()) {
      cfg.experiment = "witness_sweep";
      return finish(witness_sweep(cfg), cfg.out_dir);
    }
    if (probe->parsed())
      return run_probe(probe_k, probe_d, alpha1, alpha2, eps, probe_seed,
                       probe_out);
    if (certify->parsed()) {
      if (cert_input.empty()) {
        std::cerr << "error: --input is required\n";
        return 1;
      }
      return run_split_certify(cert_input, cert_rep, cert_neuron, alpha,
                               cert_out);
    }
    if (spectrum->parsed())
      return run_spectrum(spec_k, spec_d, spec_m, spec_input, spec_rep,
                          spec_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
