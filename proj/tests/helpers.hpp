#pragma once

/// Shared fixtures for the test binaries: a golden two-neuron configuration,
/// matrix comparison helpers, and a deterministic gradient-descent minima
/// search reused by the splitting tests and the acceptance gate.

#include <cstdint>
#include <vector>

#include "landscape/minima.hpp"
#include "landscape/model.hpp"
#include "landscape/optimize.hpp"
#include "landscape/rng.hpp"
#include "landscape/spectral.hpp"

namespace testutil {

using landscape::Mat;
using landscape::StudentParams;
using landscape::TeacherConfig;
using landscape::Vec;

/// Fixed non-critical two-neuron student in d = 3 used by the closed-form
/// value checks; teachers are the first two standard basis vectors.
inline Mat golden_student() {
  Mat w(2, 3);
  w << 1.0, 0.5, -0.25, -0.5, 1.25, 0.75;
  return w;
}

inline TeacherConfig golden_teacher() {
  return TeacherConfig::standard_basis(2, 3);
}

inline double max_abs_diff(const Mat& a, const Mat& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

/// Outcome of a seeded k = n gradient-descent sweep: the deduplicated minima
/// plus which representatives are non-global (positive loss).
struct HuntResult {
  TeacherConfig teacher;
  landscape::MinimaCatalog catalog;
  std::vector<double> losses;          ///< per representative
  std::vector<int> nonglobal;          ///< representative indices, F > 1e-10
  std::vector<StudentParams> converged_finals;  ///< one per converged run
  long long converged_runs = 0;
};

/// Runs `runs` seeded gradient-descent starts for the k = n = d teacher with
/// step size 5 / k and collects the converged minima. Deterministic.
inline HuntResult hunt_minima(int k, long long runs, std::uint64_t master_seed,
                              long long max_iters = 200000) {
  HuntResult out;
  out.teacher = TeacherConfig::standard_basis(k, k);
  out.catalog.permutable_coords = k;
  for (long long r = 0; r < runs; ++r) {
    const StudentParams w0 = landscape::xavier_init(
        k, k, k, landscape::mix_seed(master_seed, 10000 + r));
    landscape::GDConfig cfg;
    cfg.step_size = 5.0 / k;
    cfg.max_iters = max_iters;
    cfg.grad_norm_stop = 1e-12;
    landscape::RunRecord rec;
    try {
      rec = landscape::gradient_descent(w0, out.teacher, cfg, std::nullopt,
                                        max_iters);
    } catch (const landscape::NonDifferentiablePoint&) {
      continue;
    }
    if (rec.termination_reason != "converged") continue;
    ++out.converged_runs;
    out.converged_finals.push_back(rec.final_params);
    out.catalog.add(rec.final_params);
  }
  for (std::size_t rep = 0; rep < out.catalog.representatives.size(); ++rep) {
    const double f =
        landscape::objective(out.catalog.representatives[rep], out.teacher);
    out.losses.push_back(f);
    if (f > 1e-10) out.nonglobal.push_back(static_cast<int>(rep));
  }
  return out;
}

}  // namespace testutil
