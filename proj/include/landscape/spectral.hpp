#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "landscape/errors.hpp"
#include "landscape/kernels.hpp"

namespace landscape {

/// Positive-semidefiniteness tolerance for a matrix with the given spectral
/// norm: analytic zero eigenvalues show up as ~1e-12 rounding noise on O(1)
/// entries, so anything above -1e-9 * max(1, ||M||_2) counts as nonnegative.
inline double psd_tolerance(double spectral_norm) {
  return 1e-9 * std::max(1.0, spectral_norm);
}

/// Full symmetric eigendecomposition summary.
struct SpectralReport {
  std::vector<double> eigenvalues;  ///< sorted ascending
  Vec min_eigvec;                   ///< unit eigenvector of eigenvalues[0]
  bool psd = false;                 ///< eigenvalues[0] >= -tolerance_used
  double tolerance_used = 0.0;
};

namespace detail {

/// Deterministic sign convention: first coordinate of nonnegligible
/// magnitude is made positive, so reports are reproducible across runs.
inline void fix_sign(Vec& x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::abs(x[i]) > 1e-14) {
      if (x[i] < 0.0) x = -x;
      return;
    }
  }
}

inline void check_symmetric(const Mat& m, const char* where) {
  if (m.rows() != m.cols())
    throw NotSymmetric(std::string(where) + ": matrix is not square");
  const double norm = m.norm();
  const double skew = (m - m.transpose()).norm();
  if (skew > 1e-8 * std::max(norm, 1e-300))
    throw NotSymmetric(std::string(where) +
                       ": ||M - M^T||_F = " + std::to_string(skew) +
                       " exceeds 1e-8 * ||M||_F");
}

}  // namespace detail

/// Eigendecomposition of a symmetric matrix. The input must be symmetric
/// within 1e-8 relative Frobenius tolerance; it is exactly symmetrized
/// before solving so the reported pairs satisfy ||Mx - lambda x|| at the
/// solver's backward-stable accuracy.
inline SpectralReport eig_symmetric(const Mat& m) {
  detail::check_symmetric(m, "eig_symmetric");
  const Mat sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> solver(sym);
  if (solver.info() != Eigen::Success)
    throw Error("eig_symmetric: eigensolver failed to converge");
  SpectralReport report;
  const Vec& evals = solver.eigenvalues();
  report.eigenvalues.assign(evals.data(), evals.data() + evals.size());
  report.min_eigvec = solver.eigenvectors().col(0);
  detail::fix_sign(report.min_eigvec);
  const double spectral_norm =
      std::max(std::abs(report.eigenvalues.front()),
               std::abs(report.eigenvalues.back()));
  report.tolerance_used = psd_tolerance(spectral_norm);
  report.psd = report.eigenvalues.front() >= -report.tolerance_used;
  return report;
}

/// Smallest eigenvalue of a symmetric matrix.
inline double min_eigenvalue(const Mat& m) {
  return eig_symmetric(m).eigenvalues.front();
}

/// Spectral norm (largest absolute eigenvalue) of a symmetric matrix.
inline double spectral_norm(const Mat& m) {
  const SpectralReport r = eig_symmetric(m);
  return std::max(std::abs(r.eigenvalues.front()),
                  std::abs(r.eigenvalues.back()));
}

/// x^T M x.
inline double quadratic_form(const Mat& m, const Vec& x) {
  if (m.rows() != m.cols() || m.cols() != x.size())
    throw DimensionMismatch("quadratic_form: " + std::to_string(m.rows()) +
                            "x" + std::to_string(m.cols()) + " matrix vs " +
                            std::to_string(x.size()) + "-vector");
  return x.dot(m * x);
}

/// Finds a unit vector u with u^T M u = target (within 1e-10) by bisecting
/// the normalized interpolation gamma(t) between the extreme eigenvectors:
/// the Rayleigh quotient along gamma is continuous and monotone from
/// lambda_min to lambda_max, so the intermediate value theorem applies.
inline Vec find_level_direction(const Mat& m, double target) {
  const Mat sym = 0.5 * (m + m.transpose());
  detail::check_symmetric(m, "find_level_direction");
  Eigen::SelfAdjointEigenSolver<Mat> solver(sym);
  if (solver.info() != Eigen::Success)
    throw Error("find_level_direction: eigensolver failed to converge");
  const Vec& evals = solver.eigenvalues();
  const double lo = evals[0];
  const double hi = evals[evals.size() - 1];
  if (target < lo - 1e-12 || target > hi + 1e-12)
    throw TargetOutOfRange("find_level_direction: target " +
                           std::to_string(target) + " outside [" +
                           std::to_string(lo) + ", " + std::to_string(hi) +
                           "]");
  const Vec x_min = solver.eigenvectors().col(0);
  const Vec x_max = solver.eigenvectors().col(evals.size() - 1);
  const double clamped = std::clamp(target, lo, hi);
  auto gamma = [&](double t) -> Vec {
    Vec g = (1.0 - t) * x_min + t * x_max;
    return g / g.norm();
  };
  double t_lo = 0.0, t_hi = 1.0;
  Vec u = gamma(0.0);
  double value = lo;
  for (int iter = 0; iter < 200 && std::abs(value - clamped) > 1e-10;
       ++iter) {
    const double t_mid = 0.5 * (t_lo + t_hi);
    u = gamma(t_mid);
    value = quadratic_form(sym, u);
    if (value < clamped)
      t_lo = t_mid;
    else
      t_hi = t_mid;
  }
  if (std::abs(value - clamped) > 1e-10)
    throw Error("find_level_direction: bisection failed to reach target");
  detail::fix_sign(u);
  return u;
}

}  // namespace landscape
