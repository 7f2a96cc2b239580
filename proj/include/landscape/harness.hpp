#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "landscape/errors.hpp"
#include "landscape/minima.hpp"
#include "landscape/model.hpp"
#include "landscape/optimize.hpp"
#include "landscape/probes.hpp"
#include "landscape/report.hpp"
#include "landscape/rng.hpp"
#include "landscape/spectral.hpp"
#include "landscape/splitting.hpp"

namespace landscape {

/// Shared settings for the experiment pipelines. Fields set to 0 (or a
/// negative value) fall back to per-experiment defaults at resolve time.
struct ExperimentConfig {
  std::string experiment;  ///< minima_hunt | conjecture | pgd_convergence |
                           ///< witness_sweep
  int k = 6;
  int n = 0;               ///< 0 -> k
  int m = 2;
  int d = 0;               ///< 0 -> k
  long long runs = 50;
  long long runs_large = 10;  ///< extra large-norm-init arm of minima_hunt
  long long samples = 200;
  long long max_iters = 100000;
  long long pgd_iters = 2000;
  long long log_stride = 100;
  double variance = 1e-5;
  double eta = 0.0;        ///< 0 -> 5/k for gradient descent, 0.25 for PGD
  double epsilon = 0.1;
  double delta = 0.01;
  double dedup_tol = 5e-9;
  std::vector<int> k_list;  ///< conjecture grid; empty -> {k}
  std::vector<int> m_list;  ///< conjecture grid; empty -> {2, 5, 10}
  std::uint64_t master_seed = 1;
  std::string out_dir = "out";
  bool full_scale = false;
};

namespace detail {

/// Applies the --full-scale overrides (full-protocol sizes) and validates
/// the fields every experiment relies on.
inline ExperimentConfig resolve_config(const ExperimentConfig& cfg0) {
  ExperimentConfig cfg = cfg0;
  if (cfg.full_scale) {
    cfg.runs = std::max(cfg.runs, 500LL);
    cfg.samples = std::max(cfg.samples, 1000LL);
    cfg.runs_large = std::max(cfg.runs_large, 100LL);
  }
  if (cfg.k < 1) throw ConfigError("config: k must be >= 1");
  if (cfg.m < 1) throw ConfigError("config: m must be >= 1");
  if (cfg.runs < 1) throw ConfigError("config: runs must be >= 1");
  if (cfg.runs_large < 0) throw ConfigError("config: runs_large must be >= 0");
  if (cfg.samples < 1) throw ConfigError("config: samples must be >= 1");
  if (cfg.max_iters < 1) throw ConfigError("config: max_iters must be >= 1");
  if (cfg.pgd_iters < 1) throw ConfigError("config: pgd_iters must be >= 1");
  if (cfg.log_stride < 1) throw ConfigError("config: log_stride must be >= 1");
  if (!(cfg.variance > 0.0)) throw ConfigError("config: variance must be > 0");
  if (!(cfg.epsilon > 0.0)) throw ConfigError("config: epsilon must be > 0");
  if (!(cfg.delta > 0.0)) throw ConfigError("config: delta must be > 0");
  if (!(cfg.dedup_tol > 0.0)) throw ConfigError("config: dedup_tol must be > 0");
  if (cfg.eta < 0.0) throw ConfigError("config: eta must be >= 0");
  return cfg;
}

inline int ambient_dim(const ExperimentConfig& cfg, int k) {
  const int d = cfg.d > 0 ? cfg.d : k;
  if (d < k)
    throw ConfigError("config: d = " + std::to_string(d) +
                      " is smaller than k = " + std::to_string(k));
  return d;
}

/// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x,
                        const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw InvalidParams("fit_slope: need >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

inline Json provenance(const ExperimentConfig& cfg, const Json& params) {
  Json body;
  body["experiment"] = cfg.experiment;
  body["seed"] = cfg.master_seed;
  body["params"] = params;
  Json prov = body;
  prov["tool_version"] = kToolVersion;
  prov["full_scale"] = cfg.full_scale;
  prov["config_hash"] = config_hash(body);
  return prov;
}

inline bool all_true(const Json& assertions) {
  for (const auto& [key, value] : assertions.items()) {
    (void)key;
    if (!value.get<bool>()) return false;
  }
  return true;
}

/// A point at Frobenius distance exactly eps from `center`, in a seeded
/// uniformly random direction.
inline StudentParams init_near(const StudentParams& center, double eps,
                               std::uint64_t seed) {
  GaussianStream stream(seed);
  Vec direction = stream.gaussian_vector(center.n * center.d);
  direction *= eps / direction.norm();
  return StudentParams::from_matrix(
      center.vectors + unflatten_rows(direction, center.n, center.d));
}

}  // namespace detail

/// Fleet of gradient-descent runs from Xavier inits (plus a large-norm-init
/// arm), deduplicated into a catalog of distinct minima; reports each
/// representative's loss, Hessian spectrum, norm sum and per-neuron
/// diagonal-excess eigenvalues, the norm-sum histogram, and the fraction of
/// representatives whose diagonal-excess blocks all have negative
/// eigenvalues. Requires n = k.
inline ExperimentReport minima_hunt(const ExperimentConfig& cfg0) {
  ExperimentConfig cfg = detail::resolve_config(cfg0);
  const int k = cfg.k;
  const int n = cfg.n > 0 ? cfg.n : k;
  if (n != k)
    throw InvalidParams("minima_hunt: requires n = k, got n = " +
                        std::to_string(n) + ", k = " + std::to_string(k));
  const int d = detail::ambient_dim(cfg, k);
  const double eta = cfg.eta > 0.0 ? cfg.eta : 5.0 / k;
  const TeacherConfig v = TeacherConfig::standard_basis(k, d);

  MinimaCatalog catalog;
  catalog.dedup_tolerance = cfg.dedup_tol;
  CsvTable runs_csv({"run", "arm", "seed", "reason", "iterations", "final_f",
                     "final_grad_norm", "norm_sum", "representative"});
  Histogram hist(50, 0.0, static_cast<double>(k));
  Json run_records = Json::array();
  long long converged = 0;
  long long max_converged_iters = 0;

  auto do_run = [&](long long index, const std::string& arm,
                    std::uint64_t seed, const StudentParams& w0) {
    const GDConfig gd{eta, cfg.max_iters, 1e-12, seed};
    const RunRecord rec = gradient_descent(w0, v, gd, std::nullopt,
                                           cfg.log_stride);
    const double ns = norm_sum(rec.final_params);
    int rep = -1;
    if (rec.termination_reason == "converged") {
      rep = catalog.add(rec.final_params);
      hist.add(ns);
      ++converged;
      max_converged_iters = std::max(max_converged_iters, rec.iterations);
    }
    Json jr;
    jr["run"] = index;
    jr["arm"] = arm;
    jr["seed"] = seed;
    jr["reason"] = rec.termination_reason;
    jr["iterations"] = rec.iterations;
    jr["final_f"] = rec.final_f;
    jr["final_grad_norm"] = rec.final_grad_norm;
    jr["norm_sum"] = ns;
    jr["representative"] = rep;
    run_records.push_back(std::move(jr));
    runs_csv.add({format_int(index), arm, format_int(seed),
                  rec.termination_reason, format_int(rec.iterations),
                  format_double(rec.final_f),
                  format_double(rec.final_grad_norm), format_double(ns),
                  format_int(rep)});
  };

  for (long long r = 0; r < cfg.runs; ++r) {
    const std::uint64_t seed = mix_seed(cfg.master_seed, 10000 + r);
    do_run(r, "xavier", seed, xavier_init(n, k, d, seed));
  }
  for (long long r = 0; r < cfg.runs_large; ++r) {
    const std::uint64_t seed = mix_seed(cfg.master_seed, 30000 + r);
    StudentParams w0 = xavier_init(n, k, d, seed);
    // large-norm arm: uniform rescale so the row-norm sum is 2k^2
    const double target_sum = 2.0 * k * k;
    w0 = StudentParams::from_matrix(w0.vectors *
                                    (target_sum / norm_sum(w0)));
    do_run(cfg.runs + r, "large_norm", seed, w0);
  }

  Json reps = Json::array();
  CsvTable minima_csv({"representative", "multiplicity", "F", "norm_sum",
                       "min_eig", "is_global", "all_blocks_negative"});
  bool all_psd = true;
  bool norm_bound = true;
  bool nonglobal_blocks = true;
  long long n_global = 0;
  long long all_blocks_negative_count = 0;
  for (std::size_t r = 0; r < catalog.representatives.size(); ++r) {
    const StudentParams& w = catalog.representatives[r];
    const double f = objective(w, v);
    const SpectralReport spectrum = eig_symmetric(hessian(w, v).entries);
    const double min_eig = spectrum.eigenvalues.front();
    const double ns = norm_sum(w);
    const bool is_global = f <= 1e-10;
    std::vector<double> block_eigs(static_cast<std::size_t>(w.n));
    bool all_blocks_negative = true;
    for (int i = 0; i < w.n; ++i) {
      block_eigs[static_cast<std::size_t>(i)] =
          min_eigenvalue(h_prime_block(w, v, i));
      all_blocks_negative &= block_eigs[static_cast<std::size_t>(i)] < -1e-8;
    }
    if (is_global)
      ++n_global;
    else if (!all_blocks_negative)
      nonglobal_blocks = false;
    if (all_blocks_negative) ++all_blocks_negative_count;
    all_psd &= min_eig > 0.0;
    norm_bound &= ns <= k + 1e-6;

    Json jr;
    jr["index"] = r;
    jr["multiplicity"] = catalog.multiplicities[r];
    jr["f"] = f;
    jr["norm_sum"] = ns;
    jr["min_eig"] = min_eig;
    jr["eigenvalues"] = spectrum.eigenvalues;
    jr["block_min_eigs"] = block_eigs;
    jr["is_global"] = is_global;
    jr["all_blocks_negative"] = all_blocks_negative;
    jr["matrix"] = matrix_to_json(w.vectors);
    reps.push_back(std::move(jr));
    minima_csv.add({format_int(static_cast<long long>(r)),
                    format_int(catalog.multiplicities[r]), format_double(f),
                    format_double(ns), format_double(min_eig),
                    is_global ? "1" : "0", all_blocks_negative ? "1" : "0"});
  }

  const auto n_reps = static_cast<long long>(catalog.representatives.size());
  Json aggregates;
  aggregates["runs_total"] = cfg.runs + cfg.runs_large;
  aggregates["runs_converged"] = converged;
  aggregates["max_converged_iterations"] = max_converged_iters;
  aggregates["n_representatives"] = n_reps;
  aggregates["n_global"] = n_global;
  aggregates["n_nonglobal"] = n_reps - n_global;
  aggregates["fraction_all_blocks_negative"] =
      n_reps == 0 ? 0.0
                  : static_cast<double>(all_blocks_negative_count) /
                        static_cast<double>(n_reps);
  aggregates["hist_norm_sum"] = hist.to_json();

  Json assertions;
  assertions["all_minima_psd"] = all_psd;
  assertions["norm_sum_bound"] = norm_bound;
  assertions["nonglobal_all_blocks_negative"] = nonglobal_blocks;

  Json params;
  params["k"] = k;
  params["n"] = n;
  params["d"] = d;
  params["eta"] = eta;
  params["runs"] = cfg.runs;
  params["runs_large"] = cfg.runs_large;
  params["max_iters"] = cfg.max_iters;
  params["dedup_tol"] = cfg.dedup_tol;

  ExperimentReport report;
  report.document["provenance"] = detail::provenance(cfg, params);
  report.document["runs"] = std::move(run_records);
  report.document["representatives"] = std::move(reps);
  report.document["aggregates"] = std::move(aggregates);
  report.document["assertions"] = assertions;
  report.ok = detail::all_true(assertions);
  report.document["ok"] = report.ok;
  report.csv_files.emplace_back("runs.csv", std::move(runs_csv));
  report.csv_files.emplace_back("minima.csv", std::move(minima_csv));
  report.csv_files.emplace_back("hist_norm_sum.csv", hist.to_csv());
  return report;
}

/// Curvature lower-bound sweep at balanced m-split minima over a (k, m)
/// grid: random neighborhood perturbations (plus group-zero-sum adversarial
/// ones when m >= 2), each evaluated through curvature_breakdown.
inline ExperimentReport conjecture_sweep(const ExperimentConfig& cfg0) {
  ExperimentConfig cfg = detail::resolve_config(cfg0);
  std::vector<int> k_list = cfg.k_list.empty() ? std::vector<int>{cfg.k}
                                               : cfg.k_list;
  std::vector<int> m_list = cfg.m_list.empty() ? std::vector<int>{2, 5, 10}
                                               : cfg.m_list;
  for (int k : k_list)
    if (k < 1) throw ConfigError("config: k_list entries must be >= 1");
  for (int m : m_list)
    if (m < 1) throw ConfigError("config: m_list entries must be >= 1");

  CsvTable table({"k", "m", "mode", "sample", "seed", "lhs", "rhs", "margin",
                  "normalized_lhs"});
  Json cells = Json::array();
  bool gaussian_margin_positive = true;
  bool adversarial_lhs_positive = true;
  bool monotone_in_m = true;
  long long cell_index = 0;

  for (int k : k_list) {
    const int d = detail::ambient_dim(cfg, k);
    const TeacherConfig v = TeacherConfig::standard_basis(k, d);
    std::vector<int> sorted_m = m_list;
    std::sort(sorted_m.begin(), sorted_m.end());
    double previous_min_lhs = -std::numeric_limits<double>::infinity();
    for (int m : sorted_m) {
      const StudentParams base = balanced_split(v, m);
      auto run_mode = [&](NeighborhoodMode mode, long long seed_offset,
                          const char* label) {
        Json summary;
        double min_lhs = std::numeric_limits<double>::infinity();
        double min_margin = std::numeric_limits<double>::infinity();
        double min_normalized = std::numeric_limits<double>::infinity();
        long long negative_margins = 0;
        for (long long s = 0; s < cfg.samples; ++s) {
          const std::uint64_t seed =
              mix_seed(cfg.master_seed, cell_index * 1000000 + seed_offset + s);
          const OrthogonalPerturbation pert = sample_orthogonal_neighborhood(
              base, cfg.epsilon, mode, seed, m, cfg.variance, false);
          const CurvatureBreakdown cb = curvature_breakdown(v, m, pert);
          min_lhs = std::min(min_lhs, cb.lhs);
          min_margin = std::min(min_margin, cb.margin);
          min_normalized = std::min(min_normalized, cb.normalized_lhs());
          if (cb.margin <= 0.0) ++negative_margins;
          table.add({format_int(k), format_int(m), label, format_int(s),
                     format_int(seed), format_double(cb.lhs),
                     format_double(cb.rhs), format_double(cb.margin),
                     format_double(cb.normalized_lhs())});
        }
        summary["min_lhs"] = min_lhs;
        summary["min_margin"] = min_margin;
        summary["min_normalized_lhs"] = min_normalized;
        summary["negative_margins"] = negative_margins;
        return summary;
      };

      Json cell;
      cell["k"] = k;
      cell["m"] = m;
      cell["d"] = d;
      const Json gaussian = run_mode(NeighborhoodMode::gaussian, 0, "gaussian");
      cell["gaussian"] = gaussian;
      gaussian_margin_positive &= gaussian["min_margin"].get<double>() > 0.0;
      if (gaussian["min_lhs"].get<double>() <= previous_min_lhs)
        monotone_in_m = false;
      previous_min_lhs = gaussian["min_lhs"].get<double>();
      if (m >= 2) {
        const Json adversarial =
            run_mode(NeighborhoodMode::adversarial, 500000, "adversarial");
        cell["adversarial"] = adversarial;
        adversarial_lhs_positive &=
            adversarial["min_lhs"].get<double>() > 0.0;
      } else {
        cell["adversarial"] = nullptr;
      }
      cells.push_back(std::move(cell));
      ++cell_index;
    }
  }

  Json assertions;
  assertions["gaussian_margin_positive"] = gaussian_margin_positive;
  assertions["adversarial_lhs_positive"] = adversarial_lhs_positive;
  assertions["gaussian_min_lhs_increases_with_m"] = monotone_in_m;

  Json params;
  params["k_list"] = k_list;
  params["m_list"] = m_list;
  params["d"] = cfg.d;
  params["samples"] = cfg.samples;
  params["variance"] = cfg.variance;
  params["epsilon"] = cfg.epsilon;

  ExperimentReport report;
  report.document["provenance"] = detail::provenance(cfg, params);
  report.document["cells"] = std::move(cells);
  report.document["assertions"] = assertions;
  report.ok = detail::all_true(assertions);
  report.document["ok"] = report.ok;
  report.csv_files.emplace_back("conjecture.csv", std::move(table));
  return report;
}

/// Perturbed-gradient-descent convergence study near the balanced m-split
/// minimum: estimates the local curvature constant and smoothness constant
/// from neighborhood samples, reports the literal step-size/iteration
/// recipe they induce, then runs a practically sized PGD fleet (and a
/// noiseless control arm) and reports the rate of runs ending within
/// sqrt(delta) of the target.
inline ExperimentReport pgd_convergence(const ExperimentConfig& cfg0) {
  ExperimentConfig cfg = detail::resolve_config(cfg0);
  const int k = cfg.k;
  const int m = cfg.m;
  const int d = detail::ambient_dim(cfg, k);
  const int n = k * m;
  const TeacherConfig v = TeacherConfig::standard_basis(k, d);
  const StudentParams target = balanced_split(v, m);

  double lambda_hat = std::numeric_limits<double>::infinity();
  double l_hat = 0.0;
  for (long long s = 0; s < 100; ++s) {
    const OrthogonalPerturbation pert = sample_orthogonal_neighborhood(
        target, cfg.epsilon, NeighborhoodMode::gaussian,
        mix_seed(cfg.master_seed, s), m, cfg.variance, false);
    const CurvatureBreakdown cb = curvature_breakdown(v, m, pert);
    lambda_hat = std::min(lambda_hat, cb.normalized_lhs());
    l_hat = std::max(l_hat, spectral_norm(hessian(pert.apply(), v).entries));
  }
  const bool recipe_feasible = lambda_hat > 0.0;
  const double delta = cfg.delta;
  const double eta_recipe =
      recipe_feasible ? lambda_hat * delta * delta / (64.0 * l_hat * l_hat)
                      : std::numeric_limits<double>::quiet_NaN();
  const double shrink = eta_recipe * lambda_hat * delta * delta / 64.0;
  const double t_recipe =
      recipe_feasible && shrink > 0.0 && shrink < 1.0
          ? std::log(delta) / std::log(1.0 - shrink)
          : std::numeric_limits<double>::quiet_NaN();
  const double alpha_noise = delta / (4.0 * n);
  const double eta_used = cfg.eta > 0.0 ? cfg.eta : 0.25;
  const long long iters_used = cfg.pgd_iters;

  CsvTable runs_csv({"run", "arm", "init_seed", "noise_seed", "reason",
                     "final_f", "final_dist_sq", "success"});
  CsvTable traj_csv({"run", "arm", "iter", "f", "grad_norm", "dist"});
  Json run_records = Json::array();
  long long successes = 0;
  long long control_successes = 0;

  for (long long r = 0; r < cfg.runs; ++r) {
    const std::uint64_t init_seed = mix_seed(cfg.master_seed, 10000 + r);
    const std::uint64_t noise_seed = mix_seed(cfg.master_seed, 20000 + r);
    const StudentParams w0 = detail::init_near(target, cfg.epsilon, init_seed);
    auto run_arm = [&](double noise_level, const char* arm) {
      const PGDConfig pgd{eta_used, noise_level, iters_used, noise_seed};
      const RunRecord rec =
          perturbed_gradient_descent(w0, v, pgd, target, cfg.log_stride);
      const double dist_sq =
          (rec.final_params.vectors - target.vectors).squaredNorm();
      const bool success = dist_sq <= delta;
      for (const TrajectoryPoint& p : rec.trajectory)
        traj_csv.add({format_int(r), arm, format_int(p.iter),
                      format_double(p.f), format_double(p.grad_norm),
                      format_double(p.dist_to_target)});
      runs_csv.add({format_int(r), arm, format_int(init_seed),
                    format_int(noise_seed), rec.termination_reason,
                    format_double(rec.final_f), format_double(dist_sq),
                    success ? "1" : "0"});
      Json jr;
      jr["run"] = r;
      jr["arm"] = arm;
      jr["init_seed"] = init_seed;
      jr["noise_seed"] = noise_seed;
      jr["reason"] = rec.termination_reason;
      jr["final_f"] = rec.final_f;
      jr["final_dist_sq"] = dist_sq;
      jr["success"] = success;
      run_records.push_back(std::move(jr));
      return success;
    };
    if (run_arm(alpha_noise, "pgd")) ++successes;
    if (run_arm(0.0, "control")) ++control_successes;
  }

  const double rate =
      static_cast<double>(successes) / static_cast<double>(cfg.runs);
  const double control_rate =
      static_cast<double>(control_successes) / static_cast<double>(cfg.runs);

  Json recipe;
  recipe["lambda_hat"] = lambda_hat;
  recipe["l_hat"] = l_hat;
  recipe["feasible"] = recipe_feasible;
  recipe["eta_recipe"] = eta_recipe;
  recipe["t_recipe"] = t_recipe;
  recipe["alpha_noise"] = alpha_noise;
  recipe["eta_used"] = eta_used;
  recipe["iters_used"] = iters_used;

  Json aggregates;
  aggregates["success_rate"] = rate;
  aggregates["control_success_rate"] = control_rate;
  aggregates["recipe_infeasible"] = !recipe_feasible;

  Json assertions;
  assertions["success_rate_95"] = rate >= 0.95;

  Json params;
  params["k"] = k;
  params["m"] = m;
  params["d"] = d;
  params["n"] = n;
  params["runs"] = cfg.runs;
  params["epsilon"] = cfg.epsilon;
  params["delta"] = delta;
  params["eta_used"] = eta_used;
  params["pgd_iters"] = iters_used;
  params["variance"] = cfg.variance;

  ExperimentReport report;
  report.document["provenance"] = detail::provenance(cfg, params);
  report.document["recipe"] = std::move(recipe);
  report.document["runs"] = std::move(run_records);
  report.document["aggregates"] = std::move(aggregates);
  report.document["assertions"] = assertions;
  report.ok = detail::all_true(assertions);
  report.document["ok"] = report.ok;
  report.csv_files.emplace_back("pgd_runs.csv", std::move(runs_csv));
  report.csv_files.emplace_back("trajectories.csv", std::move(traj_csv));
  return report;
}

/// Sweeps the three analytic probes over (alpha1, alpha2) pairs and a
/// log-spaced epsilon grid; reports per-point values, the comparison of the
/// negative-curvature quadratic form against its stated closed form, and
/// log-log slope fits of the one-point-convexity form, the loss, and the
/// squared gradient norm.
inline ExperimentReport witness_sweep(const ExperimentConfig& cfg0) {
  ExperimentConfig cfg = detail::resolve_config(cfg0);
  const int k = cfg.k;
  if (k < 2)
    throw InvalidParams("witness_sweep: requires k >= 2 for the tilted pairs");
  const int d = detail::ambient_dim(cfg, k);
  const TeacherConfig v = TeacherConfig::standard_basis(k, d);

  const std::vector<std::pair<double, double>> alpha_grid = {
      {0.25, 0.25}, {0.25, 0.5}, {0.25, 1.0},
      {0.5, 0.5},   {0.5, 1.0},  {1.0, 1.0}};
  const std::vector<std::pair<double, double>> balanced_pairs = {
      {0.25, 0.75}, {0.5, 0.5}};
  std::vector<double> eps_grid;
  for (int i = 0; i <= 4; ++i) eps_grid.push_back(std::pow(10.0, -1.0 - 0.5 * i));

  CsvTable nc_csv({"alpha1", "alpha2", "eps", "value", "formula_value",
                   "rel_err"});
  bool all_negative = true;
  double max_rel_err = 0.0;
  Json nc_rows = Json::array();
  for (const auto& [a1, a2] : alpha_grid)
    for (double eps : eps_grid) {
      const NonconvexityWitness w = nonconvexity_witness(v, a1, a2, eps);
      const double rel_err =
          std::abs(w.value - w.formula_value) / std::abs(w.formula_value);
      all_negative &= w.value < 0.0;
      max_rel_err = std::max(max_rel_err, rel_err);
      nc_csv.add({format_double(a1), format_double(a2), format_double(eps),
                  format_double(w.value), format_double(w.formula_value),
                  format_double(rel_err)});
      Json jr;
      jr["alpha1"] = a1;
      jr["alpha2"] = a2;
      jr["eps"] = eps;
      jr["value"] = w.value;
      jr["formula_value"] = w.formula_value;
      jr["rel_err"] = rel_err;
      nc_rows.push_back(std::move(jr));
    }

  CsvTable opsc_csv({"alpha1", "alpha2", "eps", "normalized_form"});
  CsvTable pl_csv({"alpha1", "alpha2", "eps", "f", "grad_norm_sq"});
  Json opsc_fits = Json::array();
  Json pl_fits = Json::array();
  bool opsc_band = true;
  bool pl_f_band = true;
  bool pl_grad_band = true;
  std::vector<double> log_eps;
  for (double eps : eps_grid) log_eps.push_back(std::log(eps));
  for (const auto& [a1, a2] : balanced_pairs) {
    std::vector<double> log_form, log_f, log_grad;
    for (double eps : eps_grid) {
      const OpscWitness ow = opsc_witness(v, a1, a2, eps);
      const PlWitness pw = pl_witness(v, a1, a2, eps);
      opsc_csv.add({format_double(a1), format_double(a2), format_double(eps),
                    format_double(ow.normalized_form)});
      pl_csv.add({format_double(a1), format_double(a2), format_double(eps),
                  format_double(pw.f_value), format_double(pw.grad_norm_sq)});
      log_form.push_back(std::log(std::abs(ow.normalized_form)));
      log_f.push_back(std::log(pw.f_value));
      log_grad.push_back(std::log(pw.grad_norm_sq));
    }
    const double opsc_slope = detail::fit_slope(log_eps, log_form);
    const double f_slope = detail::fit_slope(log_eps, log_f);
    const double grad_slope = detail::fit_slope(log_eps, log_grad);
    opsc_band &= opsc_slope >= 0.8 && opsc_slope <= 1.2;
    pl_f_band &= f_slope >= 0.8 && f_slope <= 1.2;
    pl_grad_band &= grad_slope >= 1.8 && grad_slope <= 2.2;
    Json of;
    of["alpha1"] = a1;
    of["alpha2"] = a2;
    of["slope"] = opsc_slope;
    opsc_fits.push_back(std::move(of));
    Json pf;
    pf["alpha1"] = a1;
    pf["alpha2"] = a2;
    pf["f_slope"] = f_slope;
    pf["grad_sq_slope"] = grad_slope;
    pl_fits.push_back(std::move(pf));
  }

  Json assertions;
  assertions["all_quadratic_forms_negative"] = all_negative;
  assertions["formula_match_1e8"] = max_rel_err <= 1e-8;
  assertions["opsc_slope_in_band"] = opsc_band;
  assertions["pl_f_slope_in_band"] = pl_f_band;
  assertions["pl_grad_sq_slope_in_band"] = pl_grad_band;

  Json params;
  params["k"] = k;
  params["d"] = d;
  params["eps_grid"] = eps_grid;

  ExperimentReport report;
  report.document["provenance"] = detail::provenance(cfg, params);
  report.document["nonconvexity"] = std::move(nc_rows);
  report.document["nonconvexity_max_rel_err"] = max_rel_err;
  report.document["opsc_fits"] = std::move(opsc_fits);
  report.document["pl_fits"] = std::move(pl_fits);
  report.document["assertions"] = assertions;
  report.ok = detail::all_true(assertions);
  report.document["ok"] = report.ok;
  report.csv_files.emplace_back("witness_nonconvexity.csv", std::move(nc_csv));
  report.csv_files.emplace_back("witness_opsc.csv", std::move(opsc_csv));
  report.csv_files.emplace_back("witness_pl.csv", std::move(pl_csv));
  return report;
}

/// Dispatches on cfg.experiment.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  if (cfg.experiment == "minima_hunt") return minima_hunt(cfg);
  if (cfg.experiment == "conjecture") return conjecture_sweep(cfg);
  if (cfg.experiment == "pgd_convergence") return pgd_convergence(cfg);
  if (cfg.experiment == "witness_sweep") return witness_sweep(cfg);
  throw ConfigError("unknown experiment id: '" + cfg.experiment + "'");
}

}  // namespace landscape
