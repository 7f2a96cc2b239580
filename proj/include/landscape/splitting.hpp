#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "landscape/errors.hpp"
#include "landscape/model.hpp"
#include "landscape/spectral.hpp"

namespace landscape {

/// Which neuron is split and how its mass is divided between the twins.
struct SplitSpec {
  int neuron_index = 0;
  double alpha = 0.5;  ///< twin 1 gets alpha * w_i, twin 2 gets (1 - alpha) * w_i
};

/// Replaces neuron i by the adjacent pair (alpha * w_i, (1 - alpha) * w_i).
/// The map preserves the realized network function, hence the loss.
/// alpha may be 0 or 1 (one twin vanishes); differential quantities at such
/// endpoints are then undefined.
inline StudentParams split(const StudentParams& w, int neuron_index,
                           double alpha) {
  if (neuron_index < 0 || neuron_index >= w.n)
    throw IndexOutOfRange("split: neuron index " +
                          std::to_string(neuron_index) + " not in [0, " +
                          std::to_string(w.n) + ")");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw AlphaOutOfRange("split: alpha " + std::to_string(alpha) +
                          " not in [0, 1]");
  Mat out(w.n + 1, w.d);
  for (int i = 0; i < neuron_index; ++i) out.row(i) = w.vectors.row(i);
  out.row(neuron_index) = alpha * w.vectors.row(neuron_index);
  out.row(neuron_index + 1) = (1.0 - alpha) * w.vectors.row(neuron_index);
  for (int i = neuron_index + 1; i < w.n; ++i)
    out.row(i + 1) = w.vectors.row(i);
  return StudentParams::from_matrix(std::move(out));
}

inline StudentParams split(const StudentParams& w, const SplitSpec& spec) {
  return split(w, spec.neuron_index, spec.alpha);
}

/// Hessian after a split, assembled from blocks of the Hessian before it.
struct SplitHessian {
  HessianMatrix hessian;
  bool diverging = false;  ///< a twin's rescaled diagonal block exceeded 1e6
};

/// Closed-form Hessian at split(w, i, alpha) in terms of blocks at w: with
/// t1, t2 the twin positions and B = H_ii(w) - I/2,
///   [t1,t1] = I/2 + B / alpha,    [t2,t2] = I/2 + B / (1 - alpha),
///   [t1,t2] = I/2,                rows t1, t2 copy row i off-diagonal,
/// and every block not involving the twins is unchanged. Valid wherever the
/// Hessian at w exists; alpha must lie strictly inside (0, 1).
inline SplitHessian split_hessian_formula(const StudentParams& w,
                                          const TeacherConfig& v,
                                          int neuron_index, double alpha) {
  if (neuron_index < 0 || neuron_index >= w.n)
    throw IndexOutOfRange("split_hessian_formula: neuron index " +
                          std::to_string(neuron_index) + " not in [0, " +
                          std::to_string(w.n) + ")");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw AlphaOutOfRange("split_hessian_formula: alpha " +
                          std::to_string(alpha) + " not in (0, 1)");
  const HessianMatrix before = hessian(w, v);
  const Mat b = h_prime_block(w, v, neuron_index);
  const Mat eye = Mat::Identity(w.d, w.d);

  const int t1 = neuron_index;
  const int t2 = neuron_index + 1;
  // position of original neuron j in the split parameter set
  auto shifted = [&](int j) { return j < neuron_index ? j : j + 1; };

  SplitHessian out;
  out.hessian.n = w.n + 1;
  out.hessian.d = w.d;
  out.hessian.entries =
      Mat::Zero(static_cast<Eigen::Index>(w.n + 1) * w.d,
                static_cast<Eigen::Index>(w.n + 1) * w.d);
  Mat& h = out.hessian.entries;
  auto put = [&](int bi, int bj, const Mat& block) {
    h.block(bi * w.d, bj * w.d, w.d, w.d) = block;
  };

  for (int i = 0; i < w.n; ++i)
    for (int j = 0; j < w.n; ++j)
      if (i != neuron_index && j != neuron_index)
        put(shifted(i), shifted(j), before.block(i, j));
  for (int j = 0; j < w.n; ++j) {
    if (j == neuron_index) continue;
    const Mat cross = before.block(neuron_index, j);
    put(t1, shifted(j), cross);
    put(t2, shifted(j), cross);
    put(shifted(j), t1, cross.transpose());
    put(shifted(j), t2, cross.transpose());
  }
  put(t1, t1, 0.5 * eye + b / alpha);
  put(t2, t2, 0.5 * eye + b / (1.0 - alpha));
  put(t1, t2, 0.5 * eye);
  put(t2, t1, 0.5 * eye);

  const double scale = b.norm() / std::min(alpha, 1.0 - alpha);
  out.diverging = scale > 1e6;
  return out;
}

inline SplitHessian split_hessian_formula(const StudentParams& w,
                                           const TeacherConfig& v,
                                           const SplitSpec& spec) {
  return split_hessian_formula(w, v, spec.neuron_index, spec.alpha);
}

/// A verified negative-curvature direction at a split of a local minimum.
struct SaddleCertificate {
  SplitSpec spec;
  StudentParams split_point;
  double lambda = 0.0;          ///< min eigenvalue of the diagonal excess block
  Vec direction_u;              ///< its unit eigenvector (d-vector)
  Vec embedded_direction;       ///< u on twin 1, -u on twin 2, zero elsewhere
  double quadratic_value = 0.0; ///< direction^T H(split point) direction
  double predicted_value = 0.0; ///< lambda * (1/alpha + 1/(1-alpha))
  double grad_norm_at_split = 0.0;
};

/// Mean curvature carried by neuron i beyond its isotropic 1/2 share:
/// trace(H_ii - I/2) / d. Negative values flag neurons whose splits open
/// descent directions.
inline double mean_curvature(const StudentParams& w, const TeacherConfig& v,
                             int neuron_index) {
  return h_prime_block(w, v, neuron_index).trace() / w.d;
}

/// The neuron with the most negative mean curvature, or nullopt when no
/// neuron has negative mean curvature (e.g. at an exactly matched minimum).
inline std::optional<int> select_split_candidate(const StudentParams& w,
                                                 const TeacherConfig& v) {
  std::optional<int> best;
  // Mean curvatures that are analytically zero (e.g. at an exactly matched
  // minimum) come back as +-1e-17 rounding noise; only clearly negative
  // values qualify.
  double best_value = -1e-12;
  for (int i = 0; i < w.n; ++i) {
    const double value = mean_curvature(w, v, i);
    if (value < best_value) {
      best_value = value;
      best = i;
    }
  }
  return best;
}

/// Certifies that splitting neuron i of the critical point w produces a
/// strict saddle: returns the split point together with a direction whose
/// (directly evaluated) Hessian quadratic form is negative. Throws
/// NotACriticalPoint unless the gradient at w is ~0 and the Hessian at w is
/// positive semidefinite; returns nullopt when the excess block of neuron i
/// has no certifiable negative eigenvalue.
inline std::optional<SaddleCertificate> certify_saddle(const StudentParams& w,
                                                       const TeacherConfig& v,
                                                       int neuron_index,
                                                       double alpha) {
  if (neuron_index < 0 || neuron_index >= w.n)
    throw IndexOutOfRange("certify_saddle: neuron index " +
                          std::to_string(neuron_index) + " not in [0, " +
                          std::to_string(w.n) + ")");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw AlphaOutOfRange("certify_saddle: alpha " + std::to_string(alpha) +
                          " not in (0, 1)");
  const double grad_norm = gradient(w, v).norm();
  if (grad_norm > 1e-10)
    throw NotACriticalPoint("certify_saddle: gradient norm " +
                            std::to_string(grad_norm) + " exceeds 1e-10");
  const HessianMatrix h_before = hessian(w, v);
  const SpectralReport spectrum = eig_symmetric(h_before.entries);
  if (!spectrum.psd)
    throw NotACriticalPoint(
        "certify_saddle: Hessian is not positive semidefinite; the point is "
        "already a saddle without splitting");

  const Mat b = h_prime_block(w, v, neuron_index);
  const SpectralReport block_spectrum = eig_symmetric(b);
  const double lambda = block_spectrum.eigenvalues.front();
  if (lambda >= -psd_tolerance(spectral_norm(b))) return std::nullopt;

  SaddleCertificate cert;
  cert.spec = SplitSpec{neuron_index, alpha};
  cert.lambda = lambda;
  cert.direction_u = block_spectrum.min_eigvec;
  cert.split_point = split(w, neuron_index, alpha);
  cert.grad_norm_at_split = gradient(cert.split_point, v).norm();

  const HessianMatrix h_after = hessian(cert.split_point, v);
  Vec embedded = Vec::Zero(h_after.entries.rows());
  embedded.segment(neuron_index * w.d, w.d) = cert.direction_u;
  embedded.segment((neuron_index + 1) * w.d, w.d) = -cert.direction_u;
  cert.embedded_direction = embedded;
  cert.quadratic_value = quadratic_form(h_after.entries, embedded);
  cert.predicted_value = lambda * (1.0 / alpha + 1.0 / (1.0 - alpha));
  return cert;
}

inline std::optional<SaddleCertificate> certify_saddle(const StudentParams& w,
                                                       const TeacherConfig& v,
                                                       const SplitSpec& spec) {
  return certify_saddle(w, v, spec.neuron_index, spec.alpha);
}

}  // namespace landscape
