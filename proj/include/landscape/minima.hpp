#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "landscape/errors.hpp"
#include "landscape/format.hpp"
#include "landscape/model.hpp"
#include "landscape/spectral.hpp"

namespace landscape {

/// Description of a zero-loss configuration: each teacher i owns a disjoint
/// group of student indices whose nonnegative weights sum to one, and every
/// student j in group i equals weights[j] * v_i.
struct GlobalMinSpec {
  std::vector<std::vector<int>> partition;  ///< per-teacher student groups
  std::vector<double> weights;              ///< per-student coefficients
};

/// Materializes the student matrix described by a GlobalMinSpec.
/// The result has objective() <= 1e-12 by construction.
inline StudentParams build_global_min(const TeacherConfig& v,
                                      const GlobalMinSpec& spec) {
  if (static_cast<int>(spec.partition.size()) != v.k)
    throw InvalidSpec("build_global_min: partition has " +
                      std::to_string(spec.partition.size()) +
                      " groups for k=" + std::to_string(v.k) + " teachers");
  const int n = static_cast<int>(spec.weights.size());
  if (n < 1) throw InvalidSpec("build_global_min: no student weights");
  std::vector<int> owner(n, -1);
  for (int i = 0; i < v.k; ++i) {
    if (spec.partition[i].empty())
      throw InvalidSpec("build_global_min: teacher group " +
                        std::to_string(i) + " is empty");
    double sum = 0.0;
    for (int j : spec.partition[i]) {
      if (j < 0 || j >= n)
        throw InvalidSpec("build_global_min: student index " +
                          std::to_string(j) + " outside [0, " +
                          std::to_string(n) + ")");
      if (owner[j] != -1)
        throw InvalidSpec("build_global_min: student " + std::to_string(j) +
                          " assigned to two groups");
      if (spec.weights[j] < 0.0)
        throw InvalidSpec("build_global_min: negative weight for student " +
                          std::to_string(j));
      owner[j] = i;
      sum += spec.weights[j];
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw InvalidSpec("build_global_min: weights of group " +
                        std::to_string(i) + " sum to " +
                        format_double(sum) + ", expected 1");
  }
  for (int j = 0; j < n; ++j)
    if (owner[j] == -1)
      throw InvalidSpec("build_global_min: student " + std::to_string(j) +
                        " not covered by any group");
  Mat w(n, v.d);
  for (int j = 0; j < n; ++j)
    w.row(j) = spec.weights[j] * v.vectors.row(owner[j]);
  return StudentParams::from_matrix(std::move(w));
}

/// The balanced m-way split of the teacher: every v_i is represented by m
/// students equal to v_i / m (student s belongs to teacher s / m).
inline StudentParams balanced_split(const TeacherConfig& v, int m) {
  if (m < 1) throw InvalidParams("balanced_split: m must be >= 1");
  GlobalMinSpec spec;
  spec.partition.resize(v.k);
  spec.weights.assign(static_cast<std::size_t>(v.k) * m, 1.0 / m);
  for (int i = 0; i < v.k; ++i)
    for (int j = 0; j < m; ++j) spec.partition[i].push_back(i * m + j);
  return build_global_min(v, spec);
}

/// Attempts to recover the zero-loss structure of W: each student must be a
/// nonnegative multiple of some teacher (residual <= tol) and each teacher's
/// weights must sum to 1 (within tol). Returns the recovered spec, or
/// nothing if W is not of that form (the "not global" outcome is a value,
/// not an error). Students with norm <= tol count as weight-0 members of
/// group 0.
inline std::optional<GlobalMinSpec> verify_global_structure(
    const StudentParams& w, const TeacherConfig& v, double tol = 1e-9) {
  detail::check_same_ambient(w, v);
  GlobalMinSpec spec;
  spec.partition.resize(v.k);
  spec.weights.assign(w.n, 0.0);
  std::vector<double> group_sum(v.k, 0.0);
  for (int j = 0; j < w.n; ++j) {
    const Vec wj = w.row(j);
    if (wj.norm() <= tol) {
      spec.partition[0].push_back(j);
      continue;
    }
    const Vec dots = v.vectors * wj;
    int best = 0;
    for (int i = 1; i < v.k; ++i)
      if (dots[i] > dots[best]) best = i;
    const double alpha = dots[best];
    if (alpha <= 0.0) return std::nullopt;
    if ((wj - alpha * v.row(best)).norm() > tol) return std::nullopt;
    spec.partition[best].push_back(j);
    spec.weights[j] = alpha;
    group_sum[best] += alpha;
  }
  for (int i = 0; i < v.k; ++i)
    if (std::abs(group_sum[i] - 1.0) > tol) return std::nullopt;
  return spec;
}

/// Sum of the Euclidean norms of the student neurons.
inline double norm_sum(const StudentParams& w) {
  double sum = 0.0;
  for (int i = 0; i < w.n; ++i) sum += w.vectors.row(i).norm();
  return sum;
}

/// Exact minimum-cost square assignment (shortest augmenting paths with
/// potentials, O(n^3)). Returns (row -> column map, total cost).
inline std::pair<std::vector<int>, double> min_cost_assignment(
    const Mat& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n)
    throw DimensionMismatch("min_cost_assignment: matrix must be square");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), pot(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> min_reduced(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      int j1 = 0;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - pot[j];
        if (cur < min_reduced[j]) {
          min_reduced[j] = cur;
          way[j] = j0;
        }
        if (min_reduced[j] < delta) {
          delta = min_reduced[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          pot[j] -= delta;
        } else {
          min_reduced[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  double total = 0.0;
  for (int j = 1; j <= n; ++j) {
    if (match[j] != 0) {
      row_to_col[match[j] - 1] = j - 1;
      total += cost(match[j] - 1, j - 1);
    }
  }
  return {row_to_col, total};
}

namespace detail {

/// Frobenius distance between two student sets after optimally permuting
/// the rows of b (assignment on squared row distances).
inline double row_matched_distance(const Mat& a, const Mat& b) {
  const int n = static_cast<int>(a.rows());
  Mat cost(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      cost(i, j) = (a.row(i) - b.row(j)).squaredNorm();
  const auto [perm, total] = min_cost_assignment(cost);
  (void)perm;
  return std::sqrt(std::max(total, 0.0));
}

/// Greedy coordinate matching over the first n_coords columns, using the
/// sorted column entries as a row-permutation-invariant signature.
/// Returns dest[c] = column of b matched to column c of a.
inline std::vector<int> greedy_coordinate_match(const Mat& a, const Mat& b,
                                                int n_coords) {
  const int n = static_cast<int>(a.rows());
  auto signature = [n](const Mat& m, int c) {
    std::vector<double> col(n);
    for (int r = 0; r < n; ++r) col[r] = m(r, c);
    std::sort(col.begin(), col.end());
    return col;
  };
  std::vector<std::vector<double>> sig_a(n_coords), sig_b(n_coords);
  for (int c = 0; c < n_coords; ++c) {
    sig_a[c] = signature(a, c);
    sig_b[c] = signature(b, c);
  }
  std::vector<std::tuple<double, int, int>> pairs;
  pairs.reserve(static_cast<std::size_t>(n_coords) * n_coords);
  for (int ca = 0; ca < n_coords; ++ca)
    for (int cb = 0; cb < n_coords; ++cb) {
      double dist = 0.0;
      for (int r = 0; r < n; ++r) {
        const double diff = sig_a[ca][r] - sig_b[cb][r];
        dist += diff * diff;
      }
      pairs.emplace_back(dist, ca, cb);
    }
  std::sort(pairs.begin(), pairs.end());
  std::vector<int> dest(n_coords, -1);
  std::vector<char> taken(n_coords, 0);
  int matched = 0;
  for (const auto& [dist, ca, cb] : pairs) {
    (void)dist;
    if (dest[ca] != -1 || taken[cb]) continue;
    dest[ca] = cb;
    taken[cb] = 1;
    if (++matched == n_coords) break;
  }
  return dest;
}

}  // namespace detail

/// Minimal Frobenius distance between two student sets over neuron-row
/// permutations and coordinate permutations. Rows are matched exactly
/// (min-cost assignment on squared distances); the coordinate permutation
/// is searched greedily over the first permutable_coords columns (the
/// teacher-aligned axes) plus the identity, since exact joint optimization
/// is factorial. permutable_coords < 0 means all columns.
inline double canonical_distance(const StudentParams& a,
                                 const StudentParams& b,
                                 int permutable_coords = -1) {
  if (a.n != b.n || a.d != b.d)
    throw DimensionMismatch("canonical_distance: shapes " +
                            std::to_string(a.n) + "x" + std::to_string(a.d) +
                            " vs " + std::to_string(b.n) + "x" +
                            std::to_string(b.d));
  double best = detail::row_matched_distance(a.vectors, b.vectors);
  const int n_coords =
      permutable_coords < 0 ? a.d : std::min(permutable_coords, a.d);
  if (n_coords >= 2) {
    const std::vector<int> dest =
        detail::greedy_coordinate_match(a.vectors, b.vectors, n_coords);
    bool identity = true;
    for (int c = 0; c < n_coords; ++c) identity &= (dest[c] == c);
    if (!identity) {
      Mat permuted = b.vectors;
      for (int c = 0; c < n_coords; ++c)
        permuted.col(c) = b.vectors.col(dest[c]);
      best = std::min(best,
                      detail::row_matched_distance(a.vectors, permuted));
    }
  }
  return best;
}

/// Representative store for deduplicating optimizer endpoints up to neuron
/// and coordinate permutations.
struct MinimaCatalog {
  double dedup_tolerance = 5e-9;
  int permutable_coords = -1;
  std::vector<StudentParams> representatives;
  std::vector<int> multiplicities;

  /// Inserts W, merging it into an existing representative when the
  /// canonical distance is within dedup_tolerance. Returns the
  /// representative's index.
  int add(const StudentParams& w) {
    for (std::size_t r = 0; r < representatives.size(); ++r) {
      if (canonical_distance(representatives[r], w, permutable_coords) <=
          dedup_tolerance) {
        ++multiplicities[r];
        return static_cast<int>(r);
      }
    }
    representatives.push_back(w);
    multiplicities.push_back(1);
    return static_cast<int>(representatives.size()) - 1;
  }
};

/// Writes one CSV row per representative: n, k, d, loss, norm sum, smallest
/// Hessian eigenvalue, multiplicity.
inline void write_catalog_csv(const MinimaCatalog& catalog,
                              const TeacherConfig& v,
                              const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("write_catalog_csv: cannot open " + path);
  out << "n,k,d,F,norm_sum,min_eig,multiplicity\n";
  for (std::size_t r = 0; r < catalog.representatives.size(); ++r) {
    const StudentParams& w = catalog.representatives[r];
    const double f = objective(w, v);
    const double min_eig = min_eigenvalue(hessian(w, v).entries);
    out << w.n << ',' << v.k << ',' << w.d << ',' << format_double(f) << ','
        << format_double(norm_sum(w)) << ',' << format_double(min_eig) << ','
        << catalog.multiplicities[r] << '\n';
  }
}

}  // namespace landscape
