#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "landscape/kernels.hpp"
#include "landscape/rng.hpp"
#include "landscape/spectral.hpp"

#include "helpers.hpp"

using landscape::Alignment;
using landscape::Mat;
using landscape::pair_f;
using landscape::pair_g;
using landscape::pair_geometry;
using landscape::pair_h1;
using landscape::pair_h2;
using landscape::PairGeometry;
using landscape::Vec;

namespace {

Vec basis(int i, int d) {
  Vec v = Vec::Zero(d);
  v[i] = 1.0;
  return v;
}

Vec random_nonzero(landscape::GaussianStream& stream, int d) {
  for (;;) {
    Vec v = stream.gaussian_vector(d);
    if (v.norm() > 1e-3) return v;
  }
}

Mat random_rotation(landscape::GaussianStream& stream, int d) {
  Mat a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = stream.gaussian();
  Eigen::HouseholderQR<Mat> qr(a);
  Mat q = qr.householderQ();
  if (q.determinant() < 0) q.col(0) *= -1.0;
  return q;
}

constexpr double kHalfInvPi = 1.0 / (2.0 * M_PI);

}  // namespace

TEST_CASE("pair geometry reports angle, norms and alignment", "[kernels]") {
  const Vec e1 = basis(0, 2), e2 = basis(1, 2);

  const PairGeometry orth = pair_geometry(e1, e2);
  REQUIRE(orth.alignment == Alignment::general);
  REQUIRE(std::abs(orth.theta - M_PI / 2.0) <= 1e-15);
  REQUIRE(std::abs(orth.cos_theta) <= 1e-15);
  REQUIRE(std::abs(orth.sin_theta - 1.0) <= 1e-15);
  REQUIRE(std::abs(orth.norm_w - 1.0) <= 1e-15);

  const PairGeometry par = pair_geometry(e1, 3.0 * e1);
  REQUIRE(par.alignment == Alignment::parallel);
  REQUIRE(std::abs(par.theta) <= 1e-8);
  REQUIRE(std::abs(par.norm_v - 3.0) <= 1e-15);

  const PairGeometry anti = pair_geometry(e1, -e1);
  REQUIRE(anti.alignment == Alignment::antiparallel);
  REQUIRE(std::abs(anti.theta - M_PI) <= 1e-7);

  REQUIRE_THROWS_AS(pair_geometry(Vec::Zero(2), e1), landscape::ZeroVector);
  REQUIRE_THROWS_AS(pair_geometry(e1, Vec::Zero(2)), landscape::ZeroVector);
  REQUIRE_THROWS_AS(pair_geometry(e1, basis(0, 3)),
                    landscape::DimensionMismatch);
}

TEST_CASE("pair geometry angle matches sin/cos consistency at general angles",
          "[kernels]") {
  landscape::GaussianStream stream(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 2 + static_cast<int>(stream.uniform() * 4);
    const Vec w = random_nonzero(stream, d);
    const Vec v = random_nonzero(stream, d);
    const PairGeometry geo = pair_geometry(w, v);
    REQUIRE(geo.theta >= 0.0);
    REQUIRE(geo.theta <= M_PI);
    REQUIRE(std::abs(geo.sin_theta * geo.sin_theta +
                     geo.cos_theta * geo.cos_theta - 1.0) <= 1e-12);
    REQUIRE(std::abs(geo.sin_theta - std::sin(geo.theta)) <= 1e-12);
    REQUIRE(std::abs(geo.rejection_vw.norm() - geo.sin_theta) <= 1e-12);
    REQUIRE(std::abs(geo.rejection_vw.dot(w)) <= 1e-12 * w.norm());
  }
}

TEST_CASE("correlation kernel values at aligned and orthogonal pairs",
          "[kernels]") {
  const Vec e1 = basis(0, 2), e2 = basis(1, 2);
  REQUIRE(std::abs(pair_f(e1, e1) - 0.5) <= 1e-12);
  REQUIRE(std::abs(pair_f(e1, e2) - kHalfInvPi) <= 1e-12);
  REQUIRE(std::abs(pair_f(e1, -e1)) <= 1e-12);
  REQUIRE(std::abs(pair_f(2.0 * e1, e1) - 1.0) <= 1e-12);
}

TEST_CASE("correlation kernel is symmetric and homogeneous in both norms",
          "[kernels]") {
  landscape::GaussianStream stream(12);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 2 + static_cast<int>(stream.uniform() * 3);
    const Vec w = random_nonzero(stream, d);
    const Vec v = random_nonzero(stream, d);
    const double base = pair_f(w, v);
    REQUIRE(std::abs(pair_f(v, w) - base) <= 1e-12 * std::max(1.0, base));
    const double a = 0.5 + stream.uniform(), b = 0.5 + stream.uniform();
    REQUIRE(std::abs(pair_f(a * w, b * v) - a * b * base) <=
            1e-12 * std::max(1.0, a * b * base));
    REQUIRE(base >= -1e-15);
    REQUIRE(base <= 0.5 * w.norm() * v.norm() + 1e-12);
  }
}

TEST_CASE("first-argument gradient kernel values", "[kernels]") {
  const Vec e1 = basis(0, 2), e2 = basis(1, 2);

  const Vec parallel = pair_g(e1, e1);
  REQUIRE((parallel - 0.5 * e1).norm() <= 1e-12);

  const Vec orthogonal = pair_g(e1, e2);
  REQUIRE(std::abs(orthogonal[0] - kHalfInvPi) <= 1e-12);
  REQUIRE(std::abs(orthogonal[1] - 0.25) <= 1e-12);

  const Vec scaled = pair_g(2.0 * e1, e1);
  REQUIRE((scaled - 0.5 * e1).norm() <= 1e-12);

  const Vec anti = pair_g(e1, -e1);
  REQUIRE(anti.norm() <= 1e-7);
}

TEST_CASE("gradient kernel matches finite differences of the correlation",
          "[kernels]") {
  landscape::GaussianStream stream(13);
  const double step = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + static_cast<int>(stream.uniform() * 3);
    const Vec w = random_nonzero(stream, d);
    const Vec v = random_nonzero(stream, d);
    const Vec g = pair_g(w, v);
    for (int a = 0; a < d; ++a) {
      Vec bump = w;
      bump[a] += step;
      const double up = pair_f(bump, v);
      bump[a] = w[a] - step;
      const double down = pair_f(bump, v);
      REQUIRE(std::abs((up - down) / (2.0 * step) - g[a]) <= 1e-6);
    }
  }
}

TEST_CASE("same-layer curvature kernel vanishes at aligned pairs and has the "
          "orthogonal-pair closed form",
          "[kernels]") {
  const Vec e1 = basis(0, 2), e2 = basis(1, 2);

  REQUIRE(pair_h1(e1, 2.0 * e1).norm() <= 1e-12);
  REQUIRE(pair_h1(e1, -e1).norm() <= 1e-12);

  Mat expected(2, 2);
  expected << 0.0, 0.0, 0.0, 1.0 / M_PI;
  REQUIRE(testutil::max_abs_diff(pair_h1(e1, e2), expected) <= 1e-12);
}

TEST_CASE("same-layer curvature kernel is PSD with top eigenvalue "
          "sin(theta) |v| / (pi |w|)",
          "[kernels]") {
  landscape::GaussianStream stream(14);
  for (int trial = 0; trial < 25; ++trial) {
    const int d = 2 + static_cast<int>(stream.uniform() * 3);
    const Vec w = random_nonzero(stream, d);
    const Vec v = random_nonzero(stream, d);
    const Mat h1 = pair_h1(w, v);
    REQUIRE(testutil::max_abs_diff(h1, h1.transpose()) <= 1e-12);
    const auto report = landscape::eig_symmetric(h1);
    REQUIRE(report.eigenvalues[0] >= -1e-12);
    const PairGeometry geo = pair_geometry(w, v);
    const double expected_top =
        geo.sin_theta * geo.norm_v / (M_PI * geo.norm_w);
    REQUIRE(std::abs(report.eigenvalues[d - 1] - expected_top) <= 1e-10);
  }
}

TEST_CASE("cross-layer curvature kernel values at aligned and orthogonal "
          "pairs",
          "[kernels]") {
  const Vec e1 = basis(0, 2), e2 = basis(1, 2);

  REQUIRE(testutil::max_abs_diff(pair_h2(e1, 2.0 * e1),
                                 0.5 * Mat::Identity(2, 2)) <= 1e-12);
  REQUIRE(pair_h2(e1, -e1).norm() <= 1e-12);

  Mat expected(2, 2);
  expected << 0.25, kHalfInvPi, kHalfInvPi, 0.25;
  REQUIRE(testutil::max_abs_diff(pair_h2(e1, e2), expected) <= 1e-12);
}

TEST_CASE("cross-layer curvature kernel transposes under argument swap",
          "[kernels]") {
  landscape::GaussianStream stream(15);
  for (int trial = 0; trial < 25; ++trial) {
    const int d = 2 + static_cast<int>(stream.uniform() * 3);
    const Vec w = random_nonzero(stream, d);
    const Vec v = random_nonzero(stream, d);
    REQUIRE(testutil::max_abs_diff(pair_h2(w, v),
                                   pair_h2(v, w).transpose()) <= 1e-12);
  }
}

TEST_CASE("curvature kernels are continuous through the parallel limit",
          "[kernels]") {
  const Vec e1 = basis(0, 2);
  double previous_h1 = 1.0, previous_h2 = 1.0;
  for (const double t : {1e-2, 1e-4, 1e-6}) {
    Vec vt(2);
    vt << std::cos(t), std::sin(t);
    const double h1_norm = pair_h1(e1, vt).norm();
    const double h2_gap =
        testutil::max_abs_diff(pair_h2(e1, vt), 0.5 * Mat::Identity(2, 2));
    REQUIRE(h1_norm <= 2.0 * t);
    REQUIRE(h1_norm < previous_h1);
    REQUIRE(h2_gap <= t);
    REQUIRE(h2_gap <= previous_h2);
    previous_h1 = h1_norm;
    previous_h2 = h2_gap;
  }
}

TEST_CASE("kernels are invariant under joint rotation", "[kernels]") {
  landscape::GaussianStream stream(16);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 3;
    const Vec w = random_nonzero(stream, d);
    const Vec v = random_nonzero(stream, d);
    const Mat q = random_rotation(stream, d);
    REQUIRE(std::abs(pair_f(q * w, q * v) - pair_f(w, v)) <= 1e-12);
    REQUIRE((pair_g(q * w, q * v) - q * pair_g(w, v)).norm() <= 1e-12);
    REQUIRE(testutil::max_abs_diff(pair_h1(q * w, q * v),
                                   q * pair_h1(w, v) * q.transpose()) <=
            1e-12);
    REQUIRE(testutil::max_abs_diff(pair_h2(q * w, q * v),
                                   q * pair_h2(w, v) * q.transpose()) <=
            1e-12);
  }
}

TEST_CASE("seeded gaussian stream is deterministic with unit moments",
          "[kernels][rng]") {
  landscape::GaussianStream a(99), b(99), c(100);
  for (int i = 0; i < 32; ++i) {
    const double x = a.gaussian();
    REQUIRE(x == b.gaussian());
  }
  bool any_different = false;
  landscape::GaussianStream a2(99);
  for (int i = 0; i < 32; ++i)
    if (a2.gaussian() != c.gaussian()) any_different = true;
  REQUIRE(any_different);

  landscape::GaussianStream moments(7);
  const int n = 100000;
  double mean = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = moments.gaussian();
    mean += x;
    sq += x * x;
  }
  mean /= n;
  sq /= n;
  REQUIRE(std::abs(mean) <= 5.0 / std::sqrt(static_cast<double>(n)));
  REQUIRE(std::abs(sq - 1.0) <= 10.0 / std::sqrt(static_cast<double>(n)));

  landscape::GaussianStream u(8);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform();
    REQUIRE(x >= 0.0);
    REQUIRE(x < 1.0);
  }
  REQUIRE(landscape::mix_seed(1, 2) != landscape::mix_seed(1, 3));
  REQUIRE(landscape::mix_seed(1, 2) != landscape::mix_seed(2, 2));
  REQUIRE(landscape::mix_seed(5, 7) == landscape::mix_seed(5, 7));
}
