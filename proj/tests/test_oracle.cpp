#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "landscape/model.hpp"
#include "landscape/oracle.hpp"
#include "landscape/rng.hpp"

#include "helpers.hpp"

using landscape::fd_gradient;
using landscape::fd_hessian;
using landscape::Mat;
using landscape::mc_objective;
using landscape::MCEstimate;
using landscape::StudentParams;
using landscape::TeacherConfig;

namespace {

Mat random_student_matrix(landscape::GaussianStream& stream, int n, int d) {
  Mat w(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) w(i, j) = stream.gaussian();
  return w;
}

}  // namespace

TEST_CASE("Monte Carlo estimate is exactly zero at the teacher", "[oracle]") {
  const TeacherConfig v = TeacherConfig::standard_basis(2, 3);
  const MCEstimate est =
      mc_objective(StudentParams::from_matrix(v.vectors), v, 1000, 5);
  REQUIRE(est.mean == 0.0);
  REQUIRE(est.stderr_ == 0.0);
  REQUIRE(est.n_samples == 1000);
}

TEST_CASE("Monte Carlo estimate brackets the hand-solved zero-neuron value",
          "[oracle]") {
  const TeacherConfig v = TeacherConfig::standard_basis(1, 2);
  const StudentParams w = StudentParams::from_matrix(Mat::Zero(1, 2));
  const MCEstimate est = mc_objective(w, v, 1000000, 6);
  REQUIRE(est.stderr_ > 0.0);
  REQUIRE(std::abs(est.mean - 0.25) <= 4.0 * est.stderr_);
}

TEST_CASE("Monte Carlo estimates agree with the closed form across random "
          "configurations",
          "[oracle]") {
  landscape::GaussianStream stream(71);
  int within = 0;
  const int trials = 20;
  for (int t = 0; t < trials; ++t) {
    const int k = 1 + static_cast<int>(stream.uniform() * 5);
    const int d = k + static_cast<int>(stream.uniform() * (6 - k));
    const int n = 1 + static_cast<int>(stream.uniform() * 5);
    const TeacherConfig v = TeacherConfig::standard_basis(k, d);
    const StudentParams w =
        StudentParams::from_matrix(random_student_matrix(stream, n, d));
    const double exact = landscape::objective(w, v);
    const MCEstimate est =
        mc_objective(w, v, 1000000, landscape::mix_seed(2024, 100 + t));
    if (std::abs(est.mean - exact) <= 4.0 * est.stderr_) ++within;
    REQUIRE(est.stderr_ <= 0.05 * std::max(exact, 1e-3));
  }
  REQUIRE(within >= 19);
}

TEST_CASE("Monte Carlo estimator is deterministic per seed and validates "
          "the sample count",
          "[oracle]") {
  const TeacherConfig v = TeacherConfig::standard_basis(1, 2);
  const StudentParams w = StudentParams::from_matrix(Mat::Zero(1, 2));
  const MCEstimate a = mc_objective(w, v, 5000, 11);
  const MCEstimate b = mc_objective(w, v, 5000, 11);
  REQUIRE(a.mean == b.mean);
  REQUIRE(a.stderr_ == b.stderr_);
  const MCEstimate c = mc_objective(w, v, 5000, 12);
  REQUIRE(a.mean != c.mean);
  REQUIRE_THROWS_AS(mc_objective(w, v, 99, 11), landscape::InvalidParams);
}

TEST_CASE("finite differences confirm the closed-form gradient", "[oracle]") {
  landscape::GaussianStream stream(72);
  for (int t = 0; t < 10; ++t) {
    const int k = 1 + static_cast<int>(stream.uniform() * 3);
    const int d = k + static_cast<int>(stream.uniform() * 2);
    const int n = 1 + static_cast<int>(stream.uniform() * 3);
    const TeacherConfig v = TeacherConfig::standard_basis(k, d);
    const StudentParams w =
        StudentParams::from_matrix(random_student_matrix(stream, n, d));
    const Mat analytic = landscape::gradient(w, v);
    const Mat numeric = fd_gradient(w, v);
    REQUIRE((analytic - numeric).norm() <=
            1e-5 * std::max(1.0, analytic.norm()));
  }

  const TeacherConfig v = TeacherConfig::standard_basis(2, 2);
  const Mat at_teacher = fd_gradient(StudentParams::from_matrix(v.vectors), v);
  REQUIRE(at_teacher.norm() <= 1e-9);
}

TEST_CASE("finite differences confirm the closed-form Hessian", "[oracle]") {
  landscape::GaussianStream stream(73);
  for (int t = 0; t < 6; ++t) {
    const int k = 1 + static_cast<int>(stream.uniform() * 3);
    const int d = k + static_cast<int>(stream.uniform() * 2);
    const int n = 1 + static_cast<int>(stream.uniform() * 3);
    const TeacherConfig v = TeacherConfig::standard_basis(k, d);
    const StudentParams w =
        StudentParams::from_matrix(random_student_matrix(stream, n, d));
    const auto analytic = landscape::hessian(w, v);
    const auto numeric = fd_hessian(w, v);
    REQUIRE((analytic.entries - numeric.entries).norm() <=
            1e-4 * std::max(1.0, analytic.entries.norm()));
    REQUIRE(testutil::max_abs_diff(numeric.entries,
                                   numeric.entries.transpose()) <= 1e-12);
  }
}

TEST_CASE("finite differences stay accurate near (but off) the kernel's "
          "parallel seam",
          "[oracle]") {
  const TeacherConfig v = TeacherConfig::standard_basis(1, 2);
  const double tilt = 1e-3;
  Mat w(1, 2);
  w << std::cos(tilt), std::sin(tilt);
  const auto analytic = landscape::hessian(StudentParams::from_matrix(w), v);
  const auto numeric =
      fd_hessian(StudentParams::from_matrix(w), v, 1e-6);
  REQUIRE((analytic.entries - numeric.entries).norm() <=
          1e-3 * std::max(1.0, analytic.entries.norm()));

  // Diagonal block near the seam: half identity minus the same-layer kernel.
  const Mat expected = 0.5 * Mat::Identity(2, 2) -
                       landscape::pair_h1(w.row(0), v.row(0));
  REQUIRE(testutil::max_abs_diff(analytic.block(0, 0), expected) <= 1e-12);
}

TEST_CASE("finite differences refuse steps that could cross the seam at "
          "zero",
          "[oracle]") {
  const TeacherConfig v = TeacherConfig::standard_basis(1, 2);
  Mat tiny(1, 2);
  tiny << 1e-6, 0.0;
  REQUIRE_THROWS_AS(fd_gradient(StudentParams::from_matrix(tiny), v, 1e-5),
                    landscape::NonDifferentiablePoint);
  REQUIRE_THROWS_AS(fd_hessian(StudentParams::from_matrix(tiny), v, 1e-4),
                    landscape::NonDifferentiablePoint);
  REQUIRE_NOTHROW(fd_gradient(StudentParams::from_matrix(tiny), v, 1e-8));
}
