#include <cmath>
#include <random>

#include "doctest.h"
#include "equimorse/field.hpp"
#include "equimorse/hamflow.hpp"
#include "equimorse/linalg.hpp"

using namespace equimorse;
using namespace equimorse::hamflow;

namespace {

// H = c |z|^2 with c = pi * 0.3, written out as JSON terms.
HamiltonianGerm clockwise(double c) {
  return HamiltonianGerm::from_json({{"n", 1},
                                     {"terms",
                                      {{{"c", c}, {"m", {2, 0}}, {"time", {{"mode", "const"}}}},
                                       {{"c", c}, {"m", {0, 2}}, {"time", {{"mode", "const"}}}}}}});
}

std::vector<HamiltonianGerm> catalog_germs() {
  return {HamiltonianGerm::rotation(0.3), HamiltonianGerm::rotation(0.7), HamiltonianGerm::hyperbolic(std::log(2.0)),
          HamiltonianGerm::quartic(-1), HamiltonianGerm::quartic(1),
          HamiltonianGerm(1, {{0.3, {2, 0}, TimeMode::Cos, 1}, {0.5, {0, 2}}, {0.2, {3, 0}}})};
}

// dT(0) for T(x, y) = (x, Y), Y the second block of psi.
Mat dT(const Mat& dpsi) {
  const int n = int(dpsi.rows()) / 2;
  Mat t = Mat::Zero(2 * n, 2 * n);
  t.topLeftCorner(n, n).setIdentity();
  t.bottomRows(n) = dpsi.bottomRows(n);
  return t;
}

}  // namespace

TEST_CASE("linear flow of c |z|^2 is a rotation by 2c") {
  const double c = M_PI * 0.3;
  Vec z(2);
  z << 0.1, 0;
  auto r = integrate_flow(clockwise(c), 0, 1, z);
  // xdot = 2c y, ydot = -2c x.
  const double th = 2 * c;
  CHECK(r.z(0) == doctest::Approx(0.1 * std::cos(th)).epsilon(1e-9));
  CHECK(r.z(1) == doctest::Approx(-0.1 * std::sin(th)).epsilon(1e-9));
  CHECK((r.jac - rotation2(-th)).norm() < 1e-9);
  // The preset is the opposite orientation.
  CHECK((linear_flow(HamiltonianGerm::rotation(0.3), 0, 1) - rotation2(th)).norm() < 1e-9);
}

TEST_CASE("trivial flows") {
  Vec z(2);
  z << 0.2, -0.1;
  auto r = integrate_flow(HamiltonianGerm::zero(1), 0, 1, z);
  CHECK((r.z - z).norm() < 1e-14);
  CHECK((r.jac - Mat::Identity(2, 2)).norm() < 1e-14);
  auto q = integrate_flow(HamiltonianGerm::quartic(-1), 0, 1, Vec::Zero(2));
  CHECK(q.z.norm() == 0);
  CHECK((q.jac - Mat::Identity(2, 2)).norm() < 1e-12);
  Vec far(2);
  far << 3, 0;
  CHECK_THROWS_AS(integrate_flow(HamiltonianGerm::quartic(-1), 0, 1, far), Error);
}

TEST_CASE("property: flows are symplectic and compose") {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  for (auto& g : catalog_germs()) {
    for (int i = 0; i < 4; ++i) {
      Vec z(2);
      z << u(rng), u(rng);
      auto a = integrate_flow(g, 0.1, 0.4, z);
      CHECK(symplectic_residual(a.jac) < 1e-7);
      auto b = integrate_flow(g, 0.4, 0.9, a.z);
      auto c = integrate_flow(g, 0.1, 0.9, z);
      CHECK((b.z - c.z).norm() < 1e-8);
      CHECK((b.jac * a.jac - c.jac).norm() < 1e-7);
    }
  }
}

TEST_CASE("Gen1 on linear maps") {
  CHECK(check_gen1(Mat::Identity(2, 2)));
  CHECK_FALSE(check_gen1(rotation2(M_PI / 2)));
  CHECK(check_gen1(rotation2(2 * M_PI * 0.3)));
  // Oracle: det [e_x | dpsi e_y] = dpsi(1,1) for n = 1.
  for (double a : {0.1, 0.2, 0.25, 0.3, 0.45, 0.6, 0.75}) {
    Mat r = rotation2(2 * M_PI * a);
    CHECK(check_gen1(r) == (std::abs(r(1, 1)) > 1e-8));
  }
}

TEST_CASE("adapted step counts") {
  CHECK(adapted_N(HamiltonianGerm::rotation(0.3), 1));
  CHECK(adapted_N(HamiltonianGerm::zero(1), 1));
  CHECK_FALSE(adapted_N(clockwise(3 * M_PI), 1));
  CHECK(adapted_N(clockwise(3 * M_PI), 8));
  // Substeps of length 1/2 turn 0.35 of a circle: a quarter turn is crossed.
  CHECK_FALSE(adapted_N(HamiltonianGerm::rotation(0.7), 1));
  CHECK(adapted_N(HamiltonianGerm::rotation(0.7), 2));
  // Full steps: 0.3 of a turn crosses the quarter turn, 0.15 does not.
  CHECK_FALSE(step_homotopy_ok(HamiltonianGerm::rotation(0.3), 1));
  CHECK(step_homotopy_ok(HamiltonianGerm::rotation(0.3), 2));
}

TEST_CASE("generating function of the identity vanishes") {
  GeneratingFunction gf(HamiltonianGerm::zero(1), 0, 1);
  Vec x(1), Y(1);
  x << 0.03;
  Y << -0.02;
  auto e = gf.eval(x, Y);
  CHECK(std::abs(e.S) < 1e-14);
  CHECK(e.d1.norm() < 1e-14);
  CHECK(e.d2.norm() < 1e-14);
  CHECK(gf.hessian_at_zero().norm() < 1e-14);
}

TEST_CASE("Hessian of S at 0 satisfies the linear identity") {
  Mat hyp(2, 2);
  hyp << 2, 0, 0, 0.5;
  for (Mat m : {hyp, Mat(rotation2(2 * M_PI * 0.3))}) {
    double asym = 1;
    Mat s = lemma_hessian(m, &asym);
    CHECK(asym < 1e-8);
    CHECK((s - s.transpose()).norm() < 1e-12);
    CHECK((m - Mat::Identity(2, 2) + J0(1) * s * dT(m)).norm() < 1e-10);
  }
  Mat sr = lemma_hessian(rotation2(2 * M_PI * 0.3));
  CHECK(sr.norm() > 0.1);
  CHECK(kernel_dim(sr) == 0);
}

TEST_CASE("property: Gen2 round trip, kernel dimensions and two S routes") {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  for (auto& g : catalog_germs()) {
    int N = 1;
    while (!adapted_N(g, N) || !step_homotopy_ok(g, N)) ++N;
    GeneratingFunction gf(g, 0, 1.0 / N);
    Mat d = gf.dpsi_at_zero();
    CHECK(kernel_dim(gf.hessian_at_zero()) == kernel_dim(d - Mat::Identity(2, 2)));
    // (x, Y) -> y scales like 1 / gen1_det; stay where y is inside the trust radius.
    const double scale = std::min(1.0, std::abs(gen1_det(d)));
    for (int i = 0; i < 5; ++i) {
      Vec x(1), Y(1);
      x << scale * u(rng);
      Y << scale * u(rng);
      CHECK(gf.gen2_residual(x, Y) < 1e-8);
      auto sol = gf.solve(x, Y);
      Vec z(2);
      z << x(0), sol.y(0);
      auto f = integrate_flow(g, 0, 1.0 / N, z, false);
      CHECK(std::abs(f.z(1) - Y(0)) < 1e-8);
      auto e = gf.eval(x, Y);
      CHECK(std::abs(e.d2(0) - (f.z(0) - x(0))) < 1e-8);
      auto et = gf.eval(x, Y, SValueMethod::Trajectory);
      CHECK(std::abs(e.S - et.S) < 1e-9);
    }
  }
}
