#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "landscape/errors.hpp"
#include "landscape/minima.hpp"
#include "landscape/model.hpp"
#include "landscape/rng.hpp"
#include "landscape/spectral.hpp"

namespace landscape {

/// A perturbation of a zero-loss base point: one delta per student neuron.
/// When `orthogonal` is set, every delta is orthogonal to its base neuron
/// (the neighborhood that leaves the flat manifold of zero-loss points);
/// otherwise it is a standard epsilon-neighborhood sample.
struct OrthogonalPerturbation {
  StudentParams base;
  std::vector<Vec> deltas;  ///< one per student row, each of norm <= epsilon
  double epsilon = 0.0;
  bool orthogonal = false;

  StudentParams apply() const {
    Mat w = base.vectors;
    for (int i = 0; i < base.n; ++i) w.row(i) += deltas[i].transpose();
    return StudentParams::from_matrix(std::move(w));
  }

  Vec flattened() const {
    Vec out(static_cast<Eigen::Index>(base.n) * base.d);
    for (int i = 0; i < base.n; ++i) out.segment(i * base.d, base.d) = deltas[i];
    return out;
  }
};

/// Curvature of the loss at a perturbed zero-loss point, decomposed into the
/// quantities of the orthogonal-neighborhood lower bound:
///   lhs    = (w - wbase)^T H(w) (w - wbase)
///   rhs    = (1/4) (||g||^2 + (1 - 2/pi) sum_i ||g_i||^2)
/// with g_i the vector sum of group i's deltas and g the sum of all deltas.
struct CurvatureBreakdown {
  double lhs = 0.0;
  double g_norm_sq = 0.0;               ///< ||sum of all deltas||^2
  std::vector<double> group_norms;      ///< ||g_i||^2 per teacher group
  double rhs = 0.0;
  double margin = 0.0;                  ///< lhs - rhs
  double delta_norm_sq = 0.0;           ///< sum_i ||delta_i||^2

  /// lhs divided by the squared norm of the full perturbation vector.
  double normalized_lhs() const { return lhs / delta_norm_sq; }
};

/// Result of the local non-convexity probe: a point arbitrarily close to a
/// zero-loss configuration together with a direction of negative curvature.
struct NonconvexityWitness {
  StudentParams point;   ///< two siblings on v1 tilted off-axis, rest = teachers
  Vec direction;         ///< d-vector z; the full direction is (z, -z, 0, ...)
  double value;          ///< (z,-z,0,...)^T H (z,-z,0,...) — negative
  double formula_value;  ///< stated closed-form target for `value`
};

/// Result of the one-point-strong-convexity probe: the Hessian quadratic
/// form along the offset from the base minimum, normalized by its length,
/// which decays linearly in the tilt epsilon (so no positive lower bound
/// survives epsilon -> 0).
struct OpscWitness {
  StudentParams point;
  StudentParams base;
  double normalized_form;  ///< delta^T H(point) delta / ||delta||^2
};

/// Loss and squared gradient norm at the same tilted point; their ratio
/// ||grad F||^2 / F decays with epsilon, violating any gradient-dominance
/// (PL) inequality with a fixed constant.
struct PlWitness {
  StudentParams point;
  double f_value;
  double grad_norm_sq;
};

/// One exported probe evaluation (serialized to JSON downstream).
struct ProbeRecord {
  std::string probe;
  std::map<std::string, double> params;  ///< ordered -> deterministic output
  double value = 0.0;
  double formula_value = 0.0;
  double margin = 0.0;
  std::uint64_t seed = 0;
};

namespace detail {

/// Some unit vector orthogonal to unit-vector v1: the second teacher row if
/// one exists, otherwise a Gram-Schmidt complement of a basis vector.
inline Vec unit_orthogonal_to_first_teacher(const TeacherConfig& v) {
  if (v.k >= 2) return v.row(1);
  const Vec v1 = v.row(0);
  int pick = 0;
  double best = std::abs(v1[0]);
  for (int a = 1; a < v.d; ++a)
    if (std::abs(v1[a]) < best) {
      best = std::abs(v1[a]);
      pick = a;
    }
  Vec u = Vec::Zero(v.d);
  u[pick] = 1.0;
  u -= u.dot(v1) * v1;
  return u / u.norm();
}

/// Students 3..k+1 set to teachers v2..vk (the matched remainder shared by
/// all two-sibling witnesses); rows 1 and 2 are filled by the caller.
inline Mat witness_frame(const TeacherConfig& v) {
  Mat w(v.k + 1, v.d);
  for (int j = 1; j < v.k; ++j) w.row(j + 1) = v.vectors.row(j);
  return w;
}

}  // namespace detail

/// Builds the two-sibling tilted point
///   w1 = alpha1 (v1 + eps u),  w2 = alpha2 (v1 + eps u),  w_{j+1} = v_j,
/// (u a unit vector orthogonal to v1) and evaluates the Hessian quadratic
/// form along (z, -z, 0, ...), z being the top eigenvector of h1(w1, v1).
/// The value is strictly negative for every eps > 0 — curvature is lost in
/// every neighborhood of a zero-loss point with a split teacher.
inline NonconvexityWitness nonconvexity_witness(const TeacherConfig& v,
                                                double alpha1, double alpha2,
                                                double eps) {
  if (alpha1 <= 0.0 || alpha2 <= 0.0 || eps <= 0.0)
    throw InvalidParams("nonconvexity_witness: alpha1, alpha2, eps must be > 0");
  if (v.d < 2)
    throw InvalidParams("nonconvexity_witness: needs d >= 2 for a tilt direction");
  const Vec v1 = v.row(0);
  const Vec u = detail::unit_orthogonal_to_first_teacher(v);
  Mat wmat = detail::witness_frame(v);
  const Vec tilted = v1 + eps * u;
  wmat.row(0) = (alpha1 * tilted).transpose();
  wmat.row(1) = (alpha2 * tilted).transpose();
  NonconvexityWitness witness;
  witness.point = StudentParams::from_matrix(std::move(wmat));

  const Mat h1 = pair_h1(witness.point.row(0), v1);
  Eigen::SelfAdjointEigenSolver<Mat> solver(h1);
  Vec z = solver.eigenvectors().col(v.d - 1);
  detail::fix_sign(z);
  witness.direction = z;

  const HessianMatrix h = hessian(witness.point, v);
  Vec embedded = Vec::Zero(h.entries.rows());
  embedded.segment(0, v.d) = z;
  embedded.segment(v.d, v.d) = -z;
  witness.value = quadratic_form(h.entries, embedded);

  const PairGeometry geo = pair_geometry(witness.point.row(0), v1);
  witness.formula_value = -(1.0 + eps) * (geo.sin_theta / M_PI) *
                          (alpha1 + alpha2) * (alpha1 + alpha2) /
                          (alpha1 * alpha2);
  return witness;
}

/// Builds the oppositely tilted two-sibling point
///   w1 = alpha1 v1 + eps v2,  w2 = alpha2 v1 - eps v2,  w_{j+1} = v_j
/// (a point of the eps-orthogonal neighborhood of the base minimum when
/// alpha1 + alpha2 = 1) and returns the Hessian quadratic form along the
/// offset, normalized by the squared offset length. The value is O(eps).
inline OpscWitness opsc_witness(const TeacherConfig& v, double alpha1,
                                double alpha2, double eps) {
  if (alpha1 <= 0.0 || alpha2 <= 0.0 || eps <= 0.0)
    throw InvalidParams("opsc_witness: alpha1, alpha2, eps must be > 0");
  if (v.k < 2)
    throw InvalidParams("opsc_witness: needs k >= 2 (tilt uses v2)");
  const Vec v1 = v.row(0);
  const Vec v2 = v.row(1);
  Mat wmat = detail::witness_frame(v);
  wmat.row(0) = (alpha1 * v1 + eps * v2).transpose();
  wmat.row(1) = (alpha2 * v1 - eps * v2).transpose();
  Mat base = detail::witness_frame(v);
  base.row(0) = (alpha1 * v1).transpose();
  base.row(1) = (alpha2 * v1).transpose();

  OpscWitness witness;
  witness.point = StudentParams::from_matrix(std::move(wmat));
  witness.base = StudentParams::from_matrix(std::move(base));
  const HessianMatrix h = hessian(witness.point, v);
  const Vec delta =
      flatten_rows(witness.point.vectors - witness.base.vectors);
  witness.normalized_form =
      quadratic_form(h.entries, delta) / delta.squaredNorm();
  return witness;
}

/// Loss and squared gradient norm at the opsc_witness point.
inline PlWitness pl_witness(const TeacherConfig& v, double alpha1,
                            double alpha2, double eps) {
  const OpscWitness base = opsc_witness(v, alpha1, alpha2, eps);
  PlWitness witness;
  witness.point = base.point;
  witness.f_value = objective(witness.point, v);
  witness.grad_norm_sq = gradient(witness.point, v).squaredNorm();
  return witness;
}

/// Evaluates the curvature decomposition at base + deltas, where base must
/// be the balanced m-way split of the teacher (students grouped
/// teacher-major: student s belongs to teacher s / m).
inline CurvatureBreakdown curvature_breakdown(
    const TeacherConfig& v, int m, const OrthogonalPerturbation& pert) {
  if (m < 1) throw InvalidParams("curvature_breakdown: m must be >= 1");
  if (pert.base.n != v.k * m)
    throw InvalidParams("curvature_breakdown: base has " +
                        std::to_string(pert.base.n) + " neurons, expected " +
                        std::to_string(v.k * m));
  for (int i = 0; i < v.k; ++i)
    for (int j = 0; j < m; ++j)
      if ((pert.base.row(i * m + j) - v.row(i) / m).norm() > 1e-9)
        throw InvalidParams(
            "curvature_breakdown: base is not the balanced m-way split");

  const StudentParams point = pert.apply();
  const HessianMatrix h = hessian(point, v);
  const Vec delta = pert.flattened();

  CurvatureBreakdown out;
  out.lhs = quadratic_form(h.entries, delta);
  out.delta_norm_sq = delta.squaredNorm();
  Vec total = Vec::Zero(v.d);
  out.group_norms.resize(v.k);
  double group_sum = 0.0;
  for (int i = 0; i < v.k; ++i) {
    Vec gi = Vec::Zero(v.d);
    for (int j = 0; j < m; ++j) gi += pert.deltas[i * m + j];
    out.group_norms[i] = gi.squaredNorm();
    group_sum += out.group_norms[i];
    total += gi;
  }
  out.g_norm_sq = total.squaredNorm();
  out.rhs = 0.25 * (out.g_norm_sq + (1.0 - 2.0 / M_PI) * group_sum);
  out.margin = out.lhs - out.rhs;
  return out;
}

enum class NeighborhoodMode { gaussian, adversarial };

/// Draws one seeded perturbation of `base` (the balanced m-way split, or any
/// student set for gaussian mode with m = 1):
///  - gaussian:    i.i.d. normal deltas with the given per-coordinate
///                 variance, each clipped to norm <= eps;
///  - adversarial: gaussian deltas whose first member per group is replaced
///                 by minus the sum of the others, so every group sums to 0
///                 (clipping then rescales whole groups to preserve this).
/// With `orthogonal` set, deltas are first projected orthogonal to their
/// base neuron. Deterministic per seed.
inline OrthogonalPerturbation sample_orthogonal_neighborhood(
    const StudentParams& base, double eps, NeighborhoodMode mode,
    std::uint64_t seed, int m = 1, double variance = 1e-5,
    bool orthogonal = false) {
  if (eps <= 0.0)
    throw InvalidParams("sample_orthogonal_neighborhood: eps must be > 0");
  if (m < 1 || base.n % m != 0)
    throw InvalidParams(
        "sample_orthogonal_neighborhood: m must divide the neuron count");
  if (mode == NeighborhoodMode::adversarial && m < 2)
    throw InvalidParams(
        "sample_orthogonal_neighborhood: adversarial mode needs m >= 2");
  GaussianStream stream(seed);
  const double sd = std::sqrt(variance);
  OrthogonalPerturbation pert;
  pert.base = base;
  pert.epsilon = eps;
  pert.orthogonal = orthogonal;
  pert.deltas.reserve(base.n);
  for (int i = 0; i < base.n; ++i) {
    Vec delta = sd * stream.gaussian_vector(base.d);
    if (orthogonal) {
      const double nrm = base.vectors.row(i).norm();
      if (nrm > 0.0) {
        const Vec unit = base.row(i) / nrm;
        delta -= delta.dot(unit) * unit;
      }
    }
    pert.deltas.push_back(std::move(delta));
  }
  const int groups = base.n / m;
  if (mode == NeighborhoodMode::adversarial) {
    for (int gi = 0; gi < groups; ++gi) {
      Vec rest = Vec::Zero(base.d);
      for (int j = 1; j < m; ++j) rest += pert.deltas[gi * m + j];
      pert.deltas[gi * m] = -rest;
    }
    for (int gi = 0; gi < groups; ++gi) {
      double worst = 0.0;
      for (int j = 0; j < m; ++j)
        worst = std::max(worst, pert.deltas[gi * m + j].norm());
      if (worst > eps)
        for (int j = 0; j < m; ++j) pert.deltas[gi * m + j] *= eps / worst;
    }
  } else {
    for (auto& delta : pert.deltas) {
      const double nrm = delta.norm();
      if (nrm > eps) delta *= eps / nrm;
    }
  }
  return pert;
}

enum class StructuredMode { independent, identical, zero_sum };

/// Deterministic orthogonal perturbations of the balanced m-way split with
/// exactly controlled structure, used by the curvature-bound spot checks:
///  - independent: every delta orthogonal to its neuron, norm exactly eps;
///  - identical:   one orthogonal direction per group, copied to all members;
///  - zero_sum:    orthogonal deltas recentered so each group sums to zero,
///                 then commonly scaled so the largest norm is eps.
inline OrthogonalPerturbation structured_orthogonal_perturbation(
    const TeacherConfig& v, int m, double eps, StructuredMode mode,
    std::uint64_t seed) {
  if (eps <= 0.0)
    throw InvalidParams("structured_orthogonal_perturbation: eps must be > 0");
  if (mode == StructuredMode::zero_sum && m < 2)
    throw InvalidParams(
        "structured_orthogonal_perturbation: zero_sum needs m >= 2");
  GaussianStream stream(seed);
  OrthogonalPerturbation pert;
  pert.base = balanced_split(v, m);
  pert.epsilon = eps;
  pert.orthogonal = true;
  pert.deltas.assign(pert.base.n, Vec::Zero(v.d));
  auto orthogonal_draw = [&](const Vec& axis) {
    Vec delta = stream.gaussian_vector(v.d);
    delta -= delta.dot(axis) * axis;
    return delta;
  };
  for (int i = 0; i < v.k; ++i) {
    const Vec axis = v.row(i);
    switch (mode) {
      case StructuredMode::independent:
        for (int j = 0; j < m; ++j) {
          Vec delta = orthogonal_draw(axis);
          pert.deltas[i * m + j] = eps * delta / delta.norm();
        }
        break;
      case StructuredMode::identical: {
        Vec delta = orthogonal_draw(axis);
        delta *= eps / delta.norm();
        for (int j = 0; j < m; ++j) pert.deltas[i * m + j] = delta;
        break;
      }
      case StructuredMode::zero_sum: {
        std::vector<Vec> draws(m);
        Vec mean = Vec::Zero(v.d);
        for (int j = 0; j < m; ++j) {
          draws[j] = orthogonal_draw(axis);
          mean += draws[j];
        }
        mean /= m;
        double worst = 0.0;
        for (int j = 0; j < m; ++j) {
          draws[j] -= mean;
          worst = std::max(worst, draws[j].norm());
        }
        for (int j = 0; j < m; ++j)
          pert.deltas[i * m + j] = draws[j] * (eps / worst);
        break;
      }
    }
  }
  return pert;
}

}  // namespace landscape
