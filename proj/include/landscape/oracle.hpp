#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "landscape/errors.hpp"
#include "landscape/model.hpp"
#include "landscape/rng.hpp"

namespace landscape {

/// A Monte-Carlo estimate with its standard error (sample sd / sqrt(N)).
struct MCEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  long long n_samples = 0;
  std::uint64_t seed = 0;
};

/// Estimates the population loss by direct sampling of the defining
/// expectation: draws standard Gaussian inputs x, forms the residual
/// r(x) = sum_i relu<w_i, x> - sum_j relu<v_j, x>, and averages r^2 / 2
/// (matching the objective() normalization). Deterministic per seed;
/// Welford accumulation keeps the variance numerically stable.
inline MCEstimate mc_objective(const StudentParams& w, const TeacherConfig& v,
                               long long n_samples, std::uint64_t seed) {
  if (n_samples < 100)
    throw InvalidParams("mc_objective: need at least 100 samples, got " +
                        std::to_string(n_samples));
  detail::check_same_ambient(w, v);
  GaussianStream stream(seed);
  double mean = 0.0;
  double m2 = 0.0;
  for (long long s = 0; s < n_samples; ++s) {
    const Vec x = stream.gaussian_vector(w.d);
    // Student and teacher responses are accumulated separately so that
    // identical parameter sets cancel exactly rather than to rounding dust.
    double student = 0.0, teacher = 0.0;
    for (int i = 0; i < w.n; ++i)
      student += std::max(0.0, w.vectors.row(i).dot(x.transpose()));
    for (int j = 0; j < v.k; ++j)
      teacher += std::max(0.0, v.vectors.row(j).dot(x.transpose()));
    const double residual = student - teacher;
    const double y = 0.5 * residual * residual;
    const double delta = y - mean;
    mean += delta / static_cast<double>(s + 1);
    m2 += delta * (y - mean);
  }
  MCEstimate out;
  out.mean = mean;
  out.stderr_ = std::sqrt(m2 / static_cast<double>(n_samples - 1)) /
                std::sqrt(static_cast<double>(n_samples));
  out.n_samples = n_samples;
  out.seed = seed;
  return out;
}

namespace detail {

inline void check_fd_point(const StudentParams& w, double step,
                           const char* who) {
  if (!(step > 0.0)) throw InvalidParams(std::string(who) + ": step must be > 0");
  for (int i = 0; i < w.n; ++i)
    if (w.vectors.row(i).norm() <= 2.0 * step)
      throw NonDifferentiablePoint(
          std::string(who) + ": neuron " + std::to_string(i) +
          " has norm <= 2*step; a perturbed copy could vanish");
}

}  // namespace detail

/// Central-difference gradient of the loss, coordinate by coordinate.
/// Agrees with gradient() to ~1e-5 relative error at step 1e-5 away from
/// alignment singularities.
inline Mat fd_gradient(const StudentParams& w, const TeacherConfig& v,
                       double step = 1e-5) {
  detail::check_same_ambient(w, v);
  detail::check_fd_point(w, step, "fd_gradient");
  Mat out(w.n, w.d);
  Mat bumped = w.vectors;
  for (int i = 0; i < w.n; ++i)
    for (int a = 0; a < w.d; ++a) {
      const double saved = bumped(i, a);
      bumped(i, a) = saved + step;
      const double up = objective(StudentParams::from_matrix(bumped), v);
      bumped(i, a) = saved - step;
      const double down = objective(StudentParams::from_matrix(bumped), v);
      bumped(i, a) = saved;
      out(i, a) = (up - down) / (2.0 * step);
    }
  return out;
}

/// Central-difference Hessian: differentiates gradient() column by column
/// and symmetrizes. Validates the closed-form Hessian to ~1e-4 relative
/// Frobenius error at step 1e-4 (looser near alignment singularities, where
/// the finite differences themselves degrade).
inline HessianMatrix fd_hessian(const StudentParams& w, const TeacherConfig& v,
                                double step = 1e-4) {
  detail::check_same_ambient(w, v);
  detail::check_fd_point(w, step, "fd_hessian");
  const Eigen::Index dim = static_cast<Eigen::Index>(w.n) * w.d;
  Mat h(dim, dim);
  Mat bumped = w.vectors;
  for (int i = 0; i < w.n; ++i)
    for (int a = 0; a < w.d; ++a) {
      const double saved = bumped(i, a);
      bumped(i, a) = saved + step;
      const Vec up = flatten_rows(gradient(StudentParams::from_matrix(bumped), v));
      bumped(i, a) = saved - step;
      const Vec down =
          flatten_rows(gradient(StudentParams::from_matrix(bumped), v));
      bumped(i, a) = saved;
      h.col(i * w.d + a) = (up - down) / (2.0 * step);
    }
  HessianMatrix out;
  out.n = w.n;
  out.d = w.d;
  out.entries = 0.5 * (h + h.transpose());
  return out;
}

}  // namespace landscape
