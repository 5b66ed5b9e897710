#include <cmath>

#include "doctest.h"
#include "equimorse/iterthy.hpp"

using namespace equimorse;
using namespace equimorse::iterthy;
using hamflow::HamiltonianGerm;

namespace {

int lowest(const Betti& b) { return b.begin()->first; }
int highest(const Betti& b) { return b.rbegin()->first; }

}  // namespace

TEST_CASE("step counts are even and adapted") {
  for (auto g : {HamiltonianGerm::rotation(0.3), HamiltonianGerm::quartic(-1), HamiltonianGerm::hyperbolic(std::log(2.0))})
    for (int k = 1; k <= 3; ++k) {
      const int N = choose_N(g, k);
      CHECK(N % 2 == 0);
      CHECK(hamflow::adapted_N(g, N));
    }
}

TEST_CASE("local homology of nondegenerate germs sits in the CZ degree") {
  auto rot = HamiltonianGerm::rotation(0.3);
  for (int k = 1; k <= 4; ++k) {
    auto h = local_floer_homology(rot, k);
    CHECK(h.shift == k * h.N);
    CHECK(h.plain == Betti{{cz(rot, k), 1}});
    CHECK(h.invariant == h.plain);
  }
  CHECK(cz(rot, 4) == 3);
  auto hyp = HamiltonianGerm::hyperbolic(std::log(2.0));
  CHECK(local_floer_homology(hyp, 1).plain == Betti{{cz(hyp, 1), 1}});
}

TEST_CASE("degenerate quartic: support inside [CZ, CZ + nu]") {
  auto g = HamiltonianGerm::quartic(-1);
  for (int k = 1; k <= 3; ++k) {
    auto h = local_floer_homology(g, k);
    CHECK(h.plain == Betti{{1, 1}});
    CHECK(h.invariant == Betti{{1, 1}});
    const int c = cz(g, k), nu = spindex::nullity(hamflow::linear_flow(g, 0, k));
    CHECK(lowest(h.plain) >= c);
    CHECK(highest(h.plain) <= c + nu);
  }
}

TEST_CASE("persistence under admissible iteration") {
  auto rot = HamiltonianGerm::rotation(0.3);
  auto r = persistence_check(rot, 1, 3);
  CHECK(r.cls.admissible);
  CHECK(r.plain_checked);
  CHECK(r.ok());
  CHECK(r.shift == r.cz_km - r.cz_m);
  auto skip = persistence_check(rot, 1, 10);
  CHECK_FALSE(skip.cls.admissible);
  CHECK_FALSE(skip.skipped.empty());
  auto q = HamiltonianGerm::quartic(-1);
  for (int k : {2, 3}) {
    auto p = persistence_check(q, 1, k);
    CHECK(p.ok());
    CHECK((p.plain_checked || p.invariant_checked));
  }
}

TEST_CASE("fixed point indices") {
  CHECK(fixed_point_index(HamiltonianGerm::rotation(0.3), 1).index == 1);
  CHECK(fixed_point_index(HamiltonianGerm::hyperbolic(std::log(2.0)), 1).index == -1);
  auto q = fixed_point_index(HamiltonianGerm::quartic(-1), 1);
  CHECK(q.degenerate);
  CHECK(q.index == 1);
  CHECK(q.count_eps == q.count_half);
}

TEST_CASE("Euler characteristic of the invariant part") {
  CHECK(totient(1) == 1);
  CHECK(totient(6) == 2);
  CHECK(totient(7) == 6);
  CHECK(euler_lefschetz(HamiltonianGerm::rotation(0.3), 3).match);
  auto e = euler_lefschetz(HamiltonianGerm::quartic(-1), 2);
  CHECK(e.match);
  CHECK(e.chi_formula.get_den() == 1);
}

TEST_CASE("subordination of a rotation") {
  auto s = subordination_structure(HamiltonianGerm::rotation(0.3), 6);
  CHECK(s.J == std::vector<int>{1});
  CHECK(s.lcm_closed);
  CHECK(s.check);
  CHECK(s.failures.empty());
}
