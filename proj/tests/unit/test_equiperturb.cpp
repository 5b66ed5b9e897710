#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "equimorse/catalog.hpp"
#include "equimorse/equiperturb.hpp"
#include "equimorse/linalg.hpp"

using namespace equimorse;
using namespace equimorse::equiperturb;

namespace {

// Order 6 on R^4: a sixth turn on (x1, x2), a sign on x3, identity on x4.
CyclicAction order_six() {
  Mat a = Mat::Zero(4, 4);
  a.topLeftCorner(2, 2) = rotation2(2 * M_PI / 6);
  a(2, 2) = -1;
  a(3, 3) = 1;
  return {a, 6};
}

// dim ker(M - I) by SVD.
int fixed_dim(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m - Mat::Identity(m.rows(), m.cols()));
  int z = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i) z += svd.singularValues()(i) < 1e-9;
  return z;
}

}  // namespace

TEST_CASE("strata of a cyclic action") {
  auto a = order_six();
  auto s = strata(a);
  std::vector<int> js;
  for (auto& st : s.strata) js.push_back(st.j);
  CHECK(js == std::vector<int>{1, 2, 3, 6});
  CHECK(s.F(1).dim() == 1);
  CHECK(s.F(2).dim() == 2);
  CHECK(s.F(3).dim() == 1);
  CHECK(s.F(6).dim() == 4);
  for (auto& st : s.strata) {
    CHECK(st.dim() == fixed_dim(a.power(st.j)));
    CHECK((st.P * a.A - a.A * st.P).norm() < 1e-12);
    CHECK((st.P * st.P - st.P).norm() < 1e-12);
  }
  CHECK(s.commute_residual < 1e-12);
  CHECK(s.orthogonality_residual < 1e-12);
  // F_i n F_j = F_gcd(i, j), from the kernel of [B_i | B_j].
  for (auto& si : s.strata)
    for (auto& sj : s.strata) {
      Mat both(4, si.dim() + sj.dim());
      both << si.basis, sj.basis;
      const int inter = kernel_dim(both);
      CHECK(inter == s.F(std::gcd(si.j, sj.j)).dim());
    }
  Vec x(4);
  x << 0, 0, 0.3, 0.2;
  CHECK(s.isotropy(x) == 2);
  x << 0, 0, 0, 0.2;
  CHECK(s.isotropy(x) == 1);
  CHECK(s.dist(x, 1) < 1e-14);
}

TEST_CASE("normal decreasing extension") {
  auto s = strata(order_six());
  // f(u, v) = u^2 + u v^3 on F_2 = span(e3, e4).
  auto f = std::make_shared<Polynomial>(2, std::vector<Polynomial::Term>{{1, {2, 0}}, {1, {1, 3}}});
  auto ext = normal_decreasing_extension(f, s, 2);
  CHECK(ext.tangency_residual < 1e-10);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  const auto& F2 = s.F(2);
  for (int i = 0; i < 10; ++i) {
    Vec z(4);
    for (int c = 0; c < 4; ++c) z(c) = u(rng);
    Vec w = F2.basis.transpose() * F2.P * z;
    const double expect = f->value(w) - ((Mat::Identity(4, 4) - F2.P) * z).squaredNorm();
    CHECK(ext.f->value(z) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("invariant Morse perturbations of the two quartic models") {
  for (auto spec : {catalog::perturb_quartic_reflection(), catalog::perturb_quartic_rotation()}) {
    auto r = perturb_invariant_morse(spec);
    const auto& c = r.cert;
    CHECK(c.invariance_residual < 1e-9);
    CHECK(c.strata_ok);
    CHECK(c.normal_margin >= 0.9);
    CHECK(c.c2_distance < 0.05);
    CHECK(c.morse_ok);
    CHECK(c.min_abs_eig > 1e-10);
    CHECK(c.passed());
    CHECK(!c.critical.empty());
    // Critical points come in full orbits.
    const auto& A = spec.action->A;
    for (auto& p : c.critical) {
      bool found = false;
      for (auto& q : c.critical) found = found || (A * p.p - q.p).norm() < 1e-6;
      CHECK(found);
    }
  }
}

TEST_CASE("a non-invariant input is rejected") {
  Mat a(2, 2);
  a << 1, 0, 0, -1;
  FunctionSpec f{std::make_shared<Polynomial>(2, std::vector<Polynomial::Term>{{1, {4, 0}}, {1, {0, 3}}}),
                 CyclicAction{a, 2}};
  CHECK_THROWS_AS(perturb_invariant_morse(f), Error);
}

TEST_CASE("saddle connections of the bagel") {
  auto r = verify_morse_smale_2d(catalog::bagel(), 1.5);
  CHECK(r.saddle_connections.size() == 1);
  CHECK_FALSE(r.clean());
  CHECK(r.tangency_ok);
  // A single nondegenerate saddle has nothing to connect to.
  FunctionSpec saddle{std::make_shared<Polynomial>(2, std::vector<Polynomial::Term>{{1, {2, 0}}, {-1, {0, 2}}}),
                      std::nullopt};
  auto s = verify_morse_smale_2d(saddle, 1.0);
  CHECK(s.saddles == 1);
  CHECK(s.clean());
}
