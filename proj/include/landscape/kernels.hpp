#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "landscape/errors.hpp"

namespace landscape {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Pairs whose angle satisfies sin(theta) < kParallelTol are classified as
/// (anti)parallel and handled by the exact limit forms: below this the
/// normalized rejection directions lose all precision, while the limits are
/// exact.
inline constexpr double kParallelTol = 1e-8;

enum class Alignment { general, parallel, antiparallel };

/// Relative geometry of a pair of nonzero vectors: norms, angle data, and
/// the alignment classification used to switch kernel limit forms.
struct PairGeometry {
  double norm_w = 0.0;
  double norm_v = 0.0;
  double cos_theta = 0.0;  ///< clamped to [-1, 1]
  double sin_theta = 0.0;  ///< in [0, 1]
  double theta = 0.0;      ///< in [0, pi]
  Alignment alignment = Alignment::general;
  Vec unit_w;              ///< w / ||w||
  Vec unit_v;              ///< v / ||v||
  Vec rejection_vw;        ///< unit_v - cos_theta * unit_w (norm == sin_theta)
};

/// Computes norms, angle and alignment class for a pair of nonzero vectors.
///
/// The angle is evaluated as atan2(||r||, cos) with r the rejection of
/// unit_v onto unit_w; unlike acos of the clamped dot product this stays
/// fully accurate for angles near 0 and pi, which the small-angle witnesses
/// and limit tests rely on.
inline PairGeometry pair_geometry(const Vec& w, const Vec& v) {
  if (w.size() != v.size())
    throw DimensionMismatch("pair_geometry: vectors of size " +
                            std::to_string(w.size()) + " vs " +
                            std::to_string(v.size()));
  PairGeometry geo;
  geo.norm_w = w.norm();
  geo.norm_v = v.norm();
  if (geo.norm_w == 0.0 || geo.norm_v == 0.0)
    throw ZeroVector("pair_geometry: zero-norm input vector");
  geo.unit_w = w / geo.norm_w;
  geo.unit_v = v / geo.norm_v;
  geo.cos_theta = std::clamp(geo.unit_w.dot(geo.unit_v), -1.0, 1.0);
  geo.rejection_vw = geo.unit_v - geo.cos_theta * geo.unit_w;
  geo.sin_theta = std::min(geo.rejection_vw.norm(), 1.0);
  geo.theta = std::atan2(geo.sin_theta, geo.cos_theta);
  if (geo.sin_theta < kParallelTol)
    geo.alignment =
        geo.cos_theta > 0.0 ? Alignment::parallel : Alignment::antiparallel;
  return geo;
}

/// Correlation kernel
///   f(w, v) = (1/2pi) * ||w|| * ||v|| * (sin t + (pi - t) cos t),
/// the exact Gaussian expectation E[relu(<w,x>) relu(<v,x>)].
/// Symmetric, nonnegative, and positively homogeneous in each argument;
/// f(w, w) = ||w||^2 / 2 and f(w, -w) = 0.
inline double pair_f(const Vec& w, const Vec& v) {
  const PairGeometry geo = pair_geometry(w, v);
  const double shape =
      geo.sin_theta + (M_PI - geo.theta) * geo.cos_theta;
  return geo.norm_w * geo.norm_v * shape / (2.0 * M_PI);
}

/// Gradient kernel
///   g(w, v) = (1/2pi) * (||v|| sin t * unit_w + (pi - t) * v),
/// the derivative of f(w, v) in w. Continuous on nonzero pairs:
/// g(w, v) -> v/2 as the pair becomes parallel and -> 0 antiparallel.
inline Vec pair_g(const Vec& w, const Vec& v) {
  const PairGeometry geo = pair_geometry(w, v);
  return (geo.norm_v * geo.sin_theta * geo.unit_w + (M_PI - geo.theta) * v) /
         (2.0 * M_PI);
}

/// Diagonal Hessian kernel
///   h1(w, v) = (sin t ||v|| / (2pi ||w||)) *
///              (I - unit_w unit_w^T + nbar nbar^T),
/// with nbar the unit rejection of v onto w. Symmetric PSD; its largest
/// eigenvalue is sin t ||v|| / (pi ||w||) (attained at nbar). Returns the
/// exact zero-matrix limit for (anti)parallel pairs.
inline Mat pair_h1(const Vec& w, const Vec& v) {
  const PairGeometry geo = pair_geometry(w, v);
  const auto d = w.size();
  if (geo.alignment != Alignment::general) return Mat::Zero(d, d);
  const Vec nbar = geo.rejection_vw / geo.rejection_vw.norm();
  const double scale =
      geo.sin_theta * geo.norm_v / (2.0 * M_PI * geo.norm_w);
  Mat m = Mat::Identity(d, d);
  m.noalias() -= geo.unit_w * geo.unit_w.transpose();
  m.noalias() += nbar * nbar.transpose();
  return scale * m;
}

/// Off-diagonal Hessian kernel
///   h2(w, v) = (1/2pi) * ((pi - t) I + nbar_wv unit_v^T + nbar_vw unit_w^T),
/// where nbar_wv is the unit rejection of w onto v and vice versa.
/// Scale-invariant in both arguments; h2(w, v) = h2(v, w)^T. Limits:
/// I/2 for parallel pairs, 0 for antiparallel pairs (returned exactly).
inline Mat pair_h2(const Vec& w, const Vec& v) {
  const PairGeometry geo = pair_geometry(w, v);
  const auto d = w.size();
  if (geo.alignment == Alignment::parallel)
    return 0.5 * Mat::Identity(d, d);
  if (geo.alignment == Alignment::antiparallel) return Mat::Zero(d, d);
  const Vec nbar_vw = geo.rejection_vw / geo.rejection_vw.norm();
  const Vec rejection_wv = geo.unit_w - geo.cos_theta * geo.unit_v;
  const Vec nbar_wv = rejection_wv / rejection_wv.norm();
  Mat m = (M_PI - geo.theta) * Mat::Identity(d, d);
  m.noalias() += nbar_wv * geo.unit_v.transpose();
  m.noalias() += nbar_vw * geo.unit_w.transpose();
  return m / (2.0 * M_PI);
}

}  // namespace landscape
