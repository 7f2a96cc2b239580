#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "landscape/errors.hpp"
#include "landscape/model.hpp"
#include "landscape/rng.hpp"

namespace landscape {

/// Plain gradient descent settings.
struct GDConfig {
  double step_size = 0.1;
  long long max_iters = 100000;
  double grad_norm_stop = 1e-12;
  std::uint64_t seed = 0;
};

/// Perturbed gradient descent settings: every iteration adds
/// noise_level * xi (one shared Gaussian xi per iteration) to all neurons
/// and steps from the perturbed point; runs exactly `iters` iterations.
struct PGDConfig {
  double step_size = 0.1;
  double noise_level = 0.0;
  long long iters = 1000;
  std::uint64_t seed = 0;
};

/// One logged state along a run. `dist_to_target` is the Frobenius distance
/// to the optional target parameters (NaN when no target was given).
struct TrajectoryPoint {
  long long iter = 0;
  double f = 0.0;
  double grad_norm = 0.0;
  double dist_to_target = std::numeric_limits<double>::quiet_NaN();
};

/// Everything a single optimization run produces.
struct RunRecord {
  std::vector<TrajectoryPoint> trajectory;  ///< sampled at the log stride + final
  StudentParams final_params;
  std::string termination_reason;  ///< converged | max_iters | completed |
                                   ///< diverged | non_differentiable
  std::uint64_t seed = 0;
  long long iterations = 0;
  double final_f = 0.0;
  double final_grad_norm = 0.0;
};

namespace detail {

inline double smallest_row_norm(const Mat& w) {
  double smallest = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    smallest = std::min(smallest, w.row(i).norm());
  return smallest;
}

inline double distance_to(const Mat& w,
                          const std::optional<StudentParams>& target) {
  if (!target) return std::numeric_limits<double>::quiet_NaN();
  return (w - target->vectors).norm();
}

inline void check_step_config(double step_size, double stop,
                              long long iters) {
  if (!(step_size > 0.0)) throw InvalidParams("step size must be > 0");
  if (!(stop > 0.0)) throw InvalidParams("gradient stopping norm must be > 0");
  if (iters < 0) throw InvalidParams("iteration count must be >= 0");
}

}  // namespace detail

/// Runs W <- W - eta * grad F(W) until the gradient norm falls below the
/// stopping threshold or max_iters is reached. Guards record a termination
/// reason instead of throwing: "diverged" when F exceeds 1e6 and
/// "non_differentiable" when a neuron norm drops below 1e-14 mid-run (an
/// initial violation throws, since the caller promised nonzero neurons).
/// The trajectory logs every `log_stride`-th iterate plus the final state.
inline RunRecord gradient_descent(
    const StudentParams& w0, const TeacherConfig& v, const GDConfig& cfg,
    const std::optional<StudentParams>& target = std::nullopt,
    long long log_stride = 1) {
  detail::check_step_config(cfg.step_size, cfg.grad_norm_stop, cfg.max_iters);
  if (log_stride < 1) throw InvalidParams("log stride must be >= 1");
  detail::check_same_ambient(w0, v);
  if (detail::smallest_row_norm(w0.vectors) < 1e-14)
    throw NonDifferentiablePoint(
        "gradient_descent: an initial neuron has norm below 1e-14");

  RunRecord record;
  record.seed = cfg.seed;
  Mat w = w0.vectors;
  long long t = 0;
  while (true) {
    StudentParams current = StudentParams::from_matrix(w);
    if (detail::smallest_row_norm(w) < 1e-14) {
      record.termination_reason = "non_differentiable";
      record.trajectory.push_back({t, objective(current, v),
                                   std::numeric_limits<double>::quiet_NaN(),
                                   detail::distance_to(w, target)});
      record.final_params = std::move(current);
      record.final_f = record.trajectory.back().f;
      record.final_grad_norm = record.trajectory.back().grad_norm;
      break;
    }
    const double f = objective(current, v);
    const Vec grad_flat = flatten_rows(gradient(current, v));
    const double grad_norm = grad_flat.norm();
    const bool stopping = f > 1e6 || grad_norm <= cfg.grad_norm_stop ||
                          t >= cfg.max_iters;
    if (stopping || t % log_stride == 0)
      record.trajectory.push_back(
          {t, f, grad_norm, detail::distance_to(w, target)});
    if (stopping) {
      if (f > 1e6)
        record.termination_reason = "diverged";
      else if (grad_norm <= cfg.grad_norm_stop)
        record.termination_reason = "converged";
      else
        record.termination_reason = "max_iters";
      record.final_params = std::move(current);
      record.final_f = f;
      record.final_grad_norm = grad_norm;
      break;
    }
    w -= cfg.step_size * unflatten_rows(grad_flat, w0.n, w0.d);
    ++t;
  }
  record.iterations = t;
  return record;
}

/// Runs exactly cfg.iters iterations of
///   W_hat <- W + noise_level * (xi, ..., xi),   xi ~ N(0, I/d) shared,
///   W     <- W_hat - eta * grad F(W_hat),
/// logging F at the iterate and the gradient norm at the perturbed point
/// (the gradient actually used). With noise_level = 0 the trajectory is
/// bit-identical to gradient_descent with the stopping rules disabled.
inline RunRecord perturbed_gradient_descent(
    const StudentParams& w0, const TeacherConfig& v, const PGDConfig& cfg,
    const std::optional<StudentParams>& target = std::nullopt,
    long long log_stride = 1) {
  detail::check_step_config(cfg.step_size, 1.0, cfg.iters);
  if (cfg.noise_level < 0.0)
    throw InvalidParams("noise level must be >= 0");
  if (log_stride < 1) throw InvalidParams("log stride must be >= 1");
  detail::check_same_ambient(w0, v);
  if (detail::smallest_row_norm(w0.vectors) < 1e-14)
    throw NonDifferentiablePoint(
        "perturbed_gradient_descent: an initial neuron has norm below 1e-14");

  RunRecord record;
  record.seed = cfg.seed;
  GaussianStream stream(cfg.seed);
  const double coord_sd = 1.0 / std::sqrt(static_cast<double>(w0.d));
  Mat w = w0.vectors;
  long long t = 0;
  std::string early_reason;
  for (; t < cfg.iters; ++t) {
    Mat perturbed = w;
    if (cfg.noise_level > 0.0) {
      const Vec xi = coord_sd * stream.gaussian_vector(w0.d);
      perturbed.rowwise() += (cfg.noise_level * xi).transpose();
    }
    if (detail::smallest_row_norm(perturbed) < 1e-14) {
      early_reason = "non_differentiable";
      break;
    }
    const StudentParams at = StudentParams::from_matrix(perturbed);
    const double f = objective(StudentParams::from_matrix(w), v);
    const Vec grad_flat = flatten_rows(gradient(at, v));
    if (t % log_stride == 0)
      record.trajectory.push_back(
          {t, f, grad_flat.norm(), detail::distance_to(w, target)});
    if (f > 1e6) {
      early_reason = "diverged";
      break;
    }
    w = perturbed - cfg.step_size * unflatten_rows(grad_flat, w0.n, w0.d);
  }
  record.final_params = StudentParams::from_matrix(w);
  record.final_f = objective(record.final_params, v);
  record.final_grad_norm =
      detail::smallest_row_norm(w) < 1e-14
          ? std::numeric_limits<double>::quiet_NaN()
          : flatten_rows(gradient(record.final_params, v)).norm();
  record.trajectory.push_back(
      {t, record.final_f, record.final_grad_norm, detail::distance_to(w, target)});
  record.termination_reason = early_reason.empty() ? "completed" : early_reason;
  record.iterations = t;
  return record;
}

/// Xavier initialization: an n x d matrix with i.i.d. N(0, 1/d) entries, so
/// each row has expected squared norm 1. `k` records the experiment's
/// teacher count and does not affect the draw. Deterministic per seed.
inline StudentParams xavier_init(int n, int k, int d, std::uint64_t seed) {
  if (n < 1 || k < 1 || d < 1)
    throw InvalidParams("xavier_init: n, k, d must be >= 1");
  GaussianStream stream(seed);
  const double sd = 1.0 / std::sqrt(static_cast<double>(d));
  Mat w(n, d);
  for (int i = 0; i < n; ++i)
    w.row(i) = (sd * stream.gaussian_vector(d)).transpose();
  return StudentParams::from_matrix(std::move(w));
}

}  // namespace landscape
