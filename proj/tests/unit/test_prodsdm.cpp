#include <cmath>

#include "doctest.h"
#include "equimorse/prodsdm.hpp"

using namespace equimorse;
using namespace equimorse::prodsdm;
using hamflow::HamiltonianGerm;

namespace {

std::optional<int> threshold_oracle(int i, double delta, int n) {
  for (int r = 1; r <= 1000; ++r) {
    const double d = r * i - (r - 1) * n;
    if (d < r * delta - n || d > r * delta + n) return r;
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("product degrees and signs") {
  auto p = product_degree({{2, "a", 1}, {3, "b", 2}}, 1);
  CHECK(p.degree == 4);
  CHECK(p.period == 3);
  CHECK(product_degree({{1, "a", 1}, {1, "b", 1}, {1, "c", 1}}, 1).degree == 1);
  CHECK(product_degree({{2, "a", 1}, {3, "b", 1}}, 2).degree == 3);
  auto pair = product_degree({{1, "e", 1}, {1, "e", 1}}, 1);
  CHECK(pair.degree == 1);
  CHECK(pair.period == 2);
  CHECK_THROWS_AS(product_degree({{5, "a", 1}}, 2), Error);
  CHECK(supercommutativity_sign(1, 1) == -1);
  CHECK(supercommutativity_sign(2, 3) == 1);
  CHECK(supercommutativity_sign(3, 5) == -1);
}

TEST_CASE("vanishing thresholds") {
  CHECK(vanishing_threshold(1, 0.6, 1) == 4);
  CHECK(vanishing_threshold(1, 0.0, 1) == std::nullopt);
  for (int i = -2; i <= 4; ++i)
    for (double delta : {-0.7, 0.0, 0.3, 1.0, 2.5})
      for (int n = 1; n <= 2; ++n) CHECK(vanishing_threshold(i, delta, n) == threshold_oracle(i, delta, n));
}

TEST_CASE("special case of the product") {
  for (int k : {2, 3, 4}) {
    auto sp = special_case_product(HamiltonianGerm::quartic(-0.4), k);
    CHECK(sp.nonzero);
    CHECK(sp.failing == Condition::None);
    CHECK(sp.degree == 1);
    CHECK(sp.degree_hm == 1 + k);
  }
  Polynomial bowl(2, {{1, {2, 0}}, {1, {0, 2}}});
  auto f = special_case_product(bowl, 2);
  CHECK_FALSE(f.nonzero);
  CHECK(f.indeterminate);
  CHECK(f.failing == Condition::A);
}

TEST_CASE("symplectically degenerate maxima") {
  auto q = check_sdm(HamiltonianGerm::quartic(-1));
  CHECK(q.sdm);
  CHECK(q.delta_zero);
  CHECK(q.totally_degenerate);
  CHECK(q.homology.plain == exactalg::Betti{{1, 1}});
  auto r = check_sdm(HamiltonianGerm::rotation(0.3));
  CHECK_FALSE(r.sdm);
  CHECK_FALSE(r.delta_zero);
  CHECK(std::abs(r.delta - 0.6) <= r.tolerance);
  CHECK_FALSE(check_sdm(HamiltonianGerm::quartic(1)).sdm);
}
