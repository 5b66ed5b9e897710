#include <cmath>
#include <random>

#include "doctest.h"
#include "equimorse/dact.hpp"
#include "equimorse/field.hpp"
#include "equimorse/linalg.hpp"
#include "equimorse/spindex.hpp"

using namespace equimorse;
using namespace equimorse::spindex;
using hamflow::HamiltonianGerm;

namespace {

// H = a x^2 + b x y + c y^2 for n = 1.
HamiltonianGerm quadratic(double a, double b, double c) {
  return HamiltonianGerm(1, {{a, {2, 0}}, {b, {1, 1}}, {c, {0, 2}}});
}

Mat rot(double turns) { return rotation2(2 * M_PI * turns); }

int floor_formula(double a) { return 2 * int(std::floor(a)) + 1; }

}  // namespace

TEST_CASE("rotation paths follow 2 floor(a) + 1") {
  CHECK(cz_index(SymplecticPath::rotation(0.3, 1)) == 1);
  CHECK(cz_index(SymplecticPath::rotation(0.3, 4)) == 3);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-2.9, 2.9);
  for (int i = 0; i < 20; ++i) {
    double a = u(rng);
    if (std::abs(a - std::round(a)) < 0.02) continue;
    CHECK(cz_index(SymplecticPath::rotation(a, 1)) == floor_formula(a));
  }
  for (int k = 1; k <= 6; ++k) {
    CHECK(cz_index(SymplecticPath::from_germ(HamiltonianGerm::rotation(0.3), k)) == floor_formula(0.3 * k));
    CHECK(cz_index(SymplecticPath::from_germ(HamiltonianGerm::rotation(0.7), k)) == floor_formula(0.7 * k));
  }
}

TEST_CASE("constant identity path has index -n") {
  CHECK(cz_index(SymplecticPath::constant(1, 1)) == -1);
  CHECK(cz_index(SymplecticPath::constant(2, 1)) == -2);
}

TEST_CASE("CZ agrees with the quadratic action route") {
  for (double a : {0.3, 0.7, 1.2, -0.4}) {
    auto p = SymplecticPath::from_germ(HamiltonianGerm::rotation(a), 1);
    CHECK(cz_action(p) == cz_index(p));
  }
  auto hyp = SymplecticPath::from_germ(HamiltonianGerm::hyperbolic(std::log(2.0)), 1);
  CHECK(cz_action(hyp) == cz_index(hyp));
  // Index of D^2 A(0) minus nkN on the rotation germ.
  for (int k = 1; k <= 3; ++k) {
    dact::DiscreteAction da(HamiltonianGerm::rotation(0.3), k, 2);
    CHECK(da.index_at_zero().index - k * 2 == cz_index(SymplecticPath::from_germ(HamiltonianGerm::rotation(0.3), k)));
  }
}

TEST_CASE("property: direct sums add indices") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-3, 3);
  int checked = 0;
  for (int i = 0; i < 12 && checked < 6; ++i) {
    auto g1 = quadratic(u(rng), u(rng), u(rng)), g2 = quadratic(u(rng), u(rng), u(rng));
    auto p = SymplecticPath::from_germ(g1, 1), q = SymplecticPath::from_germ(g2, 1);
    if (nullity(p.end()) || nullity(q.end())) continue;
    CHECK(cz_index(direct_sum(p, q)) == cz_index(p) + cz_index(q));
    ++checked;
  }
  CHECK(checked >= 3);
}

TEST_CASE("property: good admissible iterates keep the parity") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-2, 2);
  int checked = 0;
  for (int i = 0; i < 30; ++i) {
    auto g = quadratic(u(rng), u(rng), u(rng));
    Mat m = hamflow::linear_flow(g, 0, 1);
    for (int k = 2; k <= 4; ++k) {
      auto cls = classify_iteration(m, k);
      Mat mk = Mat::Identity(2, 2);
      for (int s = 0; s < k; ++s) mk = mk * m;
      if (!cls.admissible || !cls.good || nullity(m) || nullity(mk)) continue;
      const int c1 = cz_index(SymplecticPath::from_germ(g, 1)), ck = cz_index(SymplecticPath::from_germ(g, k));
      CHECK((ck - c1) % 2 == 0);
      ++checked;
    }
  }
  CHECK(checked > 10);
}

TEST_CASE("mean index") {
  auto r = mean_index(HamiltonianGerm::rotation(0.3));
  CHECK(std::abs(r.delta - 0.6) <= r.tolerance);
  CHECK(r.tolerance <= 0.2);
  CHECK(std::abs(mean_index(HamiltonianGerm::zero(1)).delta) <= mean_index(HamiltonianGerm::zero(1)).tolerance);
  auto h = mean_index(HamiltonianGerm::hyperbolic(std::log(2.0)));
  CHECK(std::abs(h.delta) <= h.tolerance);
  // CZ(k) within n of k Delta, exact Delta = 2a for rotations.
  for (double a : {0.3, 0.7})
    for (int k = 1; k <= 8; ++k)
      CHECK(std::abs(cz_index(SymplecticPath::from_germ(HamiltonianGerm::rotation(a), k)) - 2 * a * k) <= 1.0);
}

TEST_CASE("nullity") {
  CHECK(nullity(Mat::Identity(2, 2)) == 2);
  CHECK(nullity(rot(0.3)) == 0);
  // (x1, x2, y1, y2): identity on (x1, y1), diag(2, 1/2) on (x2, y2).
  Mat m = Mat::Identity(4, 4);
  m(1, 1) = 2;
  m(3, 3) = 0.5;
  CHECK(symplectic_residual(m) < 1e-12);
  CHECK(nullity(m) == 2);
}

TEST_CASE("iteration classes") {
  auto c3 = classify_iteration(rot(0.3), 3);
  CHECK(c3.admissible);
  CHECK(c3.good);
  auto c10 = classify_iteration(rot(0.3), 10);
  CHECK_FALSE(c10.admissible);
  CHECK(c10.good);
  Mat neg(2, 2);
  neg << -0.5, 0, 0, -2;
  auto c2 = classify_iteration(neg, 2);
  CHECK(c2.admissible);
  CHECK_FALSE(c2.good);
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 10; ++i) {
    auto c = classify_iteration(hamflow::linear_flow(quadratic(u(rng), u(rng), u(rng)), 0, 1), 1);
    CHECK(c.admissible);
    CHECK(c.good);
  }
}

TEST_CASE("Maslov index of loops") {
  auto full = SymplecticPath::rotation(1.0, 1);
  CHECK(maslov_loop_index(SymplecticPath::constant(1, 1)) == 0);
  CHECK(maslov_loop_index(full) == 1);
  CHECK(maslov_loop_index(full.concatenate(full.reversed())) == 0);
  CHECK(maslov_loop_index(full.concatenate(full)) == 2);
  CHECK_THROWS_AS(maslov_loop_index(SymplecticPath::rotation(0.3, 1)), Error);
}

TEST_CASE("paths from JSON samples") {
  nlohmann::json j = {{"n", 1}, {"samples", nlohmann::json::array()}};
  for (int i = 0; i <= 64; ++i) {
    Mat m = rot(0.3 * i / 64.0);
    j["samples"].push_back({{"t", i / 64.0}, {"M", {{m(0, 0), m(0, 1)}, {m(1, 0), m(1, 1)}}}});
  }
  CHECK(cz_index(SymplecticPath::from_json(j)) == 1);
  nlohmann::json g = {{"hamiltonian", HamiltonianGerm::rotation(0.3).to_json()}, {"T", 4}};
  CHECK(cz_index(SymplecticPath::from_json(g)) == 3);
}
