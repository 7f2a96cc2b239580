#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>

#include "landscape/errors.hpp"
#include "landscape/kernels.hpp"

namespace landscape {

/// Fixed target network: k orthonormal unit vectors (rows of a k x d matrix).
struct TeacherConfig {
  Mat vectors;  ///< k x d, orthonormal rows
  int k = 0;
  int d = 0;

  /// Validates and wraps a k x d matrix with orthonormal rows
  /// (||V V^T - I||_F <= 1e-10, d >= k).
  static TeacherConfig from_matrix(Mat v) {
    TeacherConfig cfg;
    cfg.k = static_cast<int>(v.rows());
    cfg.d = static_cast<int>(v.cols());
    if (cfg.k < 1 || cfg.d < cfg.k)
      throw InvalidSpec("teacher: need 1 <= k <= d, got k=" +
                        std::to_string(cfg.k) + " d=" + std::to_string(cfg.d));
    const Mat gram = v * v.transpose();
    const double residual = (gram - Mat::Identity(cfg.k, cfg.k)).norm();
    if (residual > 1e-10)
      throw InvalidSpec("teacher rows not orthonormal: ||VV^T - I||_F = " +
                        std::to_string(residual));
    cfg.vectors = std::move(v);
    return cfg;
  }

  /// The first k standard basis vectors of R^d (the canonical teacher after
  /// rotating any orthonormal target set onto the axes).
  static TeacherConfig standard_basis(int k, int d) {
    return from_matrix(Mat::Identity(k, d));
  }

  Vec row(int j) const { return vectors.row(j).transpose(); }
};

/// Optimization variable: n student neurons (rows of an n x d matrix).
struct StudentParams {
  Mat vectors;  ///< n x d
  int n = 0;
  int d = 0;

  static StudentParams from_matrix(Mat w) {
    StudentParams p;
    p.n = static_cast<int>(w.rows());
    p.d = static_cast<int>(w.cols());
    if (p.n < 1 || p.d < 1)
      throw InvalidSpec("student: need n >= 1 and d >= 1");
    if (!w.allFinite())
      throw InvalidSpec("student: non-finite entries");
    p.vectors = std::move(w);
    return p;
  }

  Vec row(int i) const { return vectors.row(i).transpose(); }
};

/// Flattens an n x d row matrix into the length-n*d vector used for Hessian
/// quadratic forms (neuron-major: entry i*d + a is coordinate a of neuron i).
inline Vec flatten_rows(const Mat& m) {
  Mat t = m.transpose();
  return Eigen::Map<Vec>(t.data(), m.size());
}

/// Inverse of flatten_rows.
inline Mat unflatten_rows(const Vec& v, int n, int d) {
  Mat t = Eigen::Map<const Mat>(v.data(), d, n);
  return t.transpose();
}

/// Dense symmetric (n*d) x (n*d) Hessian in n x n block layout of d x d
/// blocks; block (i, j) couples neurons i and j.
struct HessianMatrix {
  Mat entries;
  int n = 0;
  int d = 0;

  Eigen::Block<Mat> block(int i, int j) {
    return entries.block(i * d, j * d, d, d);
  }
  Eigen::Block<const Mat> block(int i, int j) const {
    return entries.block(i * d, j * d, d, d);
  }
};

namespace detail {

inline void check_same_ambient(const StudentParams& w,
                               const TeacherConfig& v) {
  if (w.d != v.d)
    throw DimensionMismatch("student d=" + std::to_string(w.d) +
                            " vs teacher d=" + std::to_string(v.d));
}

inline void check_differentiable(const StudentParams& w,
                                 const char* where) {
  for (int i = 0; i < w.n; ++i)
    if (w.vectors.row(i).norm() == 0.0)
      throw NonDifferentiablePoint(std::string(where) + ": student neuron " +
                                   std::to_string(i) + " has norm zero");
}

/// f extended by continuity to zero vectors (f -> 0 with either argument).
inline double pair_f_extended(const Vec& a, const Vec& b) {
  if (a.norm() == 0.0 || b.norm() == 0.0) return 0.0;
  return pair_f(a, b);
}

}  // namespace detail

/// Population loss
///   F(W) = (1/2) E_x[(sum_i relu<w_i, x> - sum_j relu<v_j, x>)^2]
///        = (1/2) sum_ij f(w_i, w_j) - sum_ij f(w_i, v_j)
///          + (1/2) sum_ij f(v_i, v_j),
/// evaluated in closed form. Zero student neurons are allowed (f extends
/// continuously by 0); F is nonnegative and vanishes exactly at the global
/// minima (each teacher matched by a group of nonnegative multiples summing
/// to one).
inline double objective(const StudentParams& w, const TeacherConfig& v) {
  detail::check_same_ambient(w, v);
  double sum_ww = 0.0, sum_wv = 0.0, sum_vv = 0.0;
  for (int i = 0; i < w.n; ++i)
    for (int j = 0; j < w.n; ++j)
      sum_ww += detail::pair_f_extended(w.row(i), w.row(j));
  for (int i = 0; i < w.n; ++i)
    for (int j = 0; j < v.k; ++j)
      sum_wv += detail::pair_f_extended(w.row(i), v.row(j));
  for (int i = 0; i < v.k; ++i)
    for (int j = 0; j < v.k; ++j)
      sum_vv += pair_f(v.row(i), v.row(j));
  return (0.5 * sum_ww - sum_wv) + 0.5 * sum_vv;
}

/// Exact gradient of the population loss; row i is
///   w_i / 2 + sum_{j != i} g(w_i, w_j) - sum_j g(w_i, v_j).
/// Requires every student neuron nonzero (differentiability domain).
inline Mat gradient(const StudentParams& w, const TeacherConfig& v) {
  detail::check_same_ambient(w, v);
  detail::check_differentiable(w, "gradient");
  Mat grad(w.n, w.d);
  for (int i = 0; i < w.n; ++i) {
    Vec gi = 0.5 * w.row(i);
    for (int j = 0; j < w.n; ++j)
      if (j != i) gi += pair_g(w.row(i), w.row(j));
    for (int j = 0; j < v.k; ++j) gi -= pair_g(w.row(i), v.row(j));
    grad.row(i) = gi.transpose();
  }
  return grad;
}

/// Convenience wrapper returning the loss and its gradient together
/// (the optimizer's per-iteration evaluation).
inline std::pair<double, Mat> objective_and_gradient(
    const StudentParams& w, const TeacherConfig& v) {
  return {objective(w, v), gradient(w, v)};
}

/// Exact Hessian in block form:
///   block (i, i) = I/2 + sum_{j != i} h1(w_i, w_j) - sum_j h1(w_i, v_j)
///   block (i, j) = h2(w_i, w_j)                       for i != j,
/// with the continuous limit blocks substituted at (anti)parallel pairs.
/// The result is exactly symmetric (lower blocks mirror the upper ones).
inline HessianMatrix hessian(const StudentParams& w, const TeacherConfig& v) {
  detail::check_same_ambient(w, v);
  detail::check_differentiable(w, "hessian");
  HessianMatrix h;
  h.n = w.n;
  h.d = w.d;
  h.entries = Mat::Zero(w.n * w.d, w.n * w.d);
  for (int i = 0; i < w.n; ++i) {
    Mat diag = 0.5 * Mat::Identity(w.d, w.d);
    for (int j = 0; j < w.n; ++j)
      if (j != i) diag += pair_h1(w.row(i), w.row(j));
    for (int j = 0; j < v.k; ++j) diag -= pair_h1(w.row(i), v.row(j));
    h.block(i, i) = diag;
    for (int j = i + 1; j < w.n; ++j) {
      const Mat off = pair_h2(w.row(i), w.row(j));
      h.block(i, j) = off;
      h.block(j, i) = off.transpose();
    }
  }
  return h;
}

/// Centered diagonal block H'_ii = H_ii - I/2, the quantity whose negative
/// eigenvalues certify that splitting neuron i turns a minimum into a saddle.
inline Mat h_prime_block(const StudentParams& w, const TeacherConfig& v,
                         int i) {
  detail::check_same_ambient(w, v);
  if (i < 0 || i >= w.n)
    throw IndexOutOfRange("h_prime_block: neuron index " + std::to_string(i) +
                          " outside [0, " + std::to_string(w.n) + ")");
  if (w.vectors.row(i).norm() == 0.0)
    throw NonDifferentiablePoint("h_prime_block: neuron " + std::to_string(i) +
                                 " has norm zero");
  Mat block = Mat::Zero(w.d, w.d);
  for (int j = 0; j < w.n; ++j)
    if (j != i) block += pair_h1(w.row(i), w.row(j));
  for (int j = 0; j < v.k; ++j) block -= pair_h1(w.row(i), v.row(j));
  return block;
}

}  // namespace landscape
