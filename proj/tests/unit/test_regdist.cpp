#include <cmath>
#include <random>

#include "doctest.h"
#include "equimorse/regdist.hpp"

using namespace equimorse;
using namespace equimorse::regdist;

namespace {

Mat x_axis() {
  Mat e(2, 1);
  e << 1, 0;
  return e;
}

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// Two points (+-1, 0) and the x-axis, symmetric under diag(1, -1).
RegularizedDistance two_points(int depth = 12) {
  ClosedSet Y(2);
  Y.add_point(v2(1, 0)).add_point(v2(-1, 0));
  Mat A(2, 2);
  A << 1, 0, 0, -1;
  return RegularizedDistance(Y, x_axis(), CyclicAction{A, 2}, 2.0, depth);
}

}  // namespace

TEST_CASE("Whitney cubes around a point on the line") {
  ClosedSet p(1);
  p.add_point(Vec::Zero(1));
  auto w = whitney_decompose(p, 1, 0, 12);
  auto r = w.check();
  CHECK(r.ok());
  CHECK(r.cubes > 0);
  for (int i = 0; i < int(w.cubes().size()); ++i) {
    const double ratio = w.cube_dist(i) / w.diam(w.cubes()[i]);
    CHECK(ratio >= 1 - 1e-12);
    CHECK(ratio <= 4 + 1e-12);
  }
}

TEST_CASE("Whitney cubes around the x-axis form congruent bands") {
  ClosedSet ax(2);
  ax.add_subspace(x_axis());
  auto w = whitney_decompose(ax, 1, 0, 10);
  auto r = w.check();
  CHECK(r.ok());
  CHECK(r.max_touching <= 144);
  // Cubes at the same height have the same side.
  std::map<double, double> side_at;
  for (auto& c : w.cubes()) {
    const double y = std::round(std::abs(w.center(c)(1)) * 1e9) / 1e9;
    if (side_at.count(y)) CHECK(side_at[y] == doctest::Approx(w.side(c)));
    side_at[y] = w.side(c);
  }
}

TEST_CASE("a set covering the box has no cubes") {
  ClosedSet full(2);
  full.add_ball(Vec::Zero(2), 10);
  CHECK(whitney_decompose(full, 1, 0, 8).cubes().empty());
}

TEST_CASE("exhaustive Whitney checks in three dimensions") {
  ClosedSet X(3);
  Mat e(3, 1);
  e << 0, 0, 1;
  X.add_subspace(e);
  Vec p(3);
  p << 0.5, 0, 0;
  X.add_point(p);
  auto r = whitney_decompose(X, 1, 0, 6).check();
  CHECK(r.ok());
  CHECK(r.max_touching <= 12 * 12 * 12);
}

TEST_CASE("coincidence with the distance to E away from Y") {
  ClosedSet far(2);
  far.add_point(v2(50, 50));
  RegularizedDistance rd(far, x_axis(), std::nullopt, 1.0, 12);
  for (double y : {0.01, -0.03, 0.05})
    for (double x : {-0.4, 0.0, 0.3}) {
      Vec q = v2(x, y);
      REQUIRE(rd.in_coincidence_region(q));
      CHECK(std::abs(rd.value(q) - std::abs(y)) < 1e-12);
    }
}

TEST_CASE("invariance, bounds and partition of unity") {
  auto rd = two_points();
  Mat A(2, 2);
  A << 1, 0, 0, -1;
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-1.4, 1.4);
  const double c1 = lower_constant(2), c2 = upper_constant(2);
  for (int i = 0; i < 300; ++i) {
    Vec x = v2(u(rng), u(rng));
    const double d = rd.dist_x(x);
    if (d < 1e-3) continue;
    const double v = rd.value(x);
    CHECK(std::abs(rd.value(A * x) - v) < 1e-10);
    CHECK(v >= c1 * d);
    CHECK(v <= c2 * d);
    auto e = rd.eval_hat(x);
    if (!e.in_x && !e.clamped) {
      CHECK(e.phi >= 1 - 1e-12);
      CHECK(e.phi <= 144 + 1e-12);
    }
    // x lies in Q* of each listed cube: (3/4) diam Q <= dist(x, X) <= 6 diam Q.
    auto& wd = rd.decomposition();
    for (int c : wd.star_containing(x)) {
      const double dm = wd.diam(wd.cubes()[c]);
      CHECK(d >= 0.75 * dm - 1e-12);
      CHECK(d <= 6 * dm + 1e-12);
    }
  }
}

TEST_CASE("points of X and insufficient depth") {
  auto rd = two_points();
  CHECK(rd.value(v2(0.3, 0)) == 0);
  CHECK(rd.value(v2(1, 0)) == 0);
  CHECK(rd.gradient(v2(0.3, 0)).norm() == 0);
  // Off the axis, next to a point of Y, below the finest cubes.
  auto coarse = two_points(6);
  CHECK_THROWS_AS(coarse.value(v2(1 + 1e-6, 1e-6)), Error);
}
