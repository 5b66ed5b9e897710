#include <random>

#include "doctest.h"
#include "equimorse/catalog.hpp"
#include "equimorse/exactalg.hpp"
#include "../oracles.hpp"

using namespace equimorse;
using namespace equimorse::exactalg;
using nlohmann::json;

namespace {

Betti B(std::initializer_list<std::pair<const int, int>> l) { return Betti(l); }

// Direct sum of `pairs[j]` acyclic pieces (x -> y from degree j to j-1) and
// `free[j]` cycles, hidden by random unimodular changes of basis.
ChainComplex disguised(const std::map<int, int>& pairs, const std::map<int, int>& free, std::mt19937& rng) {
  std::map<int, int> dim;
  for (auto& [j, c] : free) dim[j] += c;
  for (auto& [j, c] : pairs) {
    dim[j] += c;
    dim[j - 1] += c;
  }
  ChainComplex::Gens gens;
  for (auto& [j, n] : dim)
    for (int i = 0; i < n; ++i) gens[j].push_back("g" + std::to_string(j) + "_" + std::to_string(i));
  // Layout per degree: [free | tops of pairs from j | bottoms of pairs from j+1].
  auto offset_top = [&](int j) { return free.count(j) ? free.at(j) : 0; };
  auto offset_bottom = [&](int j) { return offset_top(j) + (pairs.count(j) ? pairs.at(j) : 0); };
  std::map<int, QMatrix> d;
  for (auto& [j, c] : pairs) {
    QMatrix m(dim[j - 1], dim[j]);
    for (int i = 0; i < c; ++i) m(offset_bottom(j - 1) + i, offset_top(j) + i) = 1;
    d[j] = m;
  }
  // P_j and its inverse from random elementary operations.
  std::map<int, QMatrix> P, Pinv;
  std::uniform_int_distribution<int> coef(-2, 2);
  for (auto& [j, n] : dim) {
    P[j] = QMatrix::identity(n);
    Pinv[j] = QMatrix::identity(n);
    if (n < 2) continue;
    std::uniform_int_distribution<int> idx(0, n - 1);
    for (int s = 0; s < 3 * n; ++s) {
      int a = idx(rng), b = idx(rng);
      if (a == b) continue;
      const int c = coef(rng);
      QMatrix e = QMatrix::identity(n), einv = QMatrix::identity(n);
      e(a, b) = c;
      einv(a, b) = -c;
      P[j] = e * P[j];
      Pinv[j] = Pinv[j] * einv;
    }
  }
  for (auto& [j, m] : d) m = P[j - 1] * m * Pinv[j];
  return ChainComplex(gens, d);
}

}  // namespace

TEST_CASE("built-in complexes give the stated Betti numbers") {
  struct Row {
    json doc;
    Betti plain, inv;
  };
  std::vector<Row> rows = {{catalog::fig1_complex(), B({{1, 1}}), {}},
                           {catalog::fig2_complex(), B({{0, 1}}), B({{0, 1}})},
                           {catalog::fig3_complex(), B({{1, 1}}), {}},
                           {catalog::torus_complex(), B({{0, 1}, {1, 2}, {2, 1}}), B({{0, 1}, {1, 1}})}};
  for (auto& r : rows) {
    auto cx = complex_from_json(r.doc);
    CHECK(homology_betti(cx) == r.plain);
    CHECK(invariant_homology_betti(cx) == r.inv);
    CHECK(oracle::betti(cx, false) == r.plain);
    CHECK(oracle::betti(cx, true) == r.inv);
  }
}

TEST_CASE("zero differential keeps every generator") {
  ChainComplex cx({{0, {"a"}}, {1, {"b"}}, {2, {"c"}}}, {});
  CHECK(homology_betti(cx) == B({{0, 1}, {1, 1}, {2, 1}}));
}

TEST_CASE("euler characteristic") {
  CHECK(euler_characteristic(B({{1, 1}})) == -1);
  CHECK(euler_characteristic(B({{0, 1}, {1, 1}})) == 0);
  CHECK(euler_characteristic(B({{2, 3}, {1, 1}, {0, 2}})) == 4);
}

TEST_CASE("degree shift and sign flip") {
  auto f1 = complex_from_json(catalog::fig1_complex());
  CHECK(homology_betti(tensor_with_shift(f1, 3, false)) == B({{4, 1}}));

  QMatrix plus(1, 1);
  plus(0, 0) = 1;
  ChainComplex one({{0, {"p"}}}, {}, {{0, plus}}, 2);
  CHECK(invariant_homology_betti(one) == B({{0, 1}}));
  CHECK(invariant_homology_betti(tensor_with_shift(one, 0, true)).empty());

  auto f2 = tensor_with_shift(complex_from_json(catalog::fig2_complex()), 2, false);
  CHECK(invariant_homology_betti(f2) == oracle::betti(f2, true));
  CHECK(invariant_homology_betti(f2) == B({{2, 1}}));
}

TEST_CASE("rationals are reduced with positive denominators") {
  CHECK(format_rational(parse_rational("6/4")) == "3/2");
  CHECK(format_rational(parse_rational("-3/6")) == "-1/2");
  CHECK(format_rational(parse_rational("4/2")) == "2");
  CHECK_THROWS_AS(parse_rational("1/0"), Error);
  CHECK_THROWS_AS(parse_rational("x"), Error);
}

TEST_CASE("invalid complexes are rejected") {
  auto kind = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Usage;
  };
  // d^2 != 0: x -> y, y -> z.
  json bad = {{"k", 1},
              {"generators", {{"2", {"x"}}, {"1", {"y"}}, {"0", {"z"}}}},
              {"differential", {{{"from", "x"}, {"to", "y"}, {"coeff", "1"}}, {{"from", "y"}, {"to", "z"}, {"coeff", "1"}}}}};
  CHECK(kind([&] { complex_from_json(bad); }) == ErrorKind::Validation);

  json skip = {{"k", 1},
               {"generators", {{"2", {"x"}}, {"0", {"z"}}}},
               {"differential", {{{"from", "x"}, {"to", "z"}, {"coeff", "1"}}}}};
  CHECK(kind([&] { complex_from_json(skip); }) == ErrorKind::Shape);

  // Action swapping y and z but not fixing x's boundary sign.
  json noncommuting = catalog::fig1_complex();
  noncommuting["action"] = {{{"from", "x"}, {"to", "x"}, {"coeff", "1"}},
                            {{"from", "y"}, {"to", "y"}, {"coeff", "-1"}},
                            {{"from", "z"}, {"to", "z"}, {"coeff", "-1"}}};
  CHECK(kind([&] { complex_from_json(noncommuting); }) == ErrorKind::Validation);

  json scaled = catalog::fig1_complex();
  scaled["action"][0]["coeff"] = "2";
  CHECK(kind([&] { complex_from_json(scaled); }) == ErrorKind::Validation);

  ChainComplex plain({{0, {"a"}}}, {});
  CHECK(kind([&] { invariant_homology_betti(plain); }) == ErrorKind::Configuration);
}

TEST_CASE("JSON round trip keeps Betti numbers and rational strings") {
  for (auto doc : {catalog::fig1_complex(), catalog::fig2_complex(), catalog::fig3_complex(), catalog::torus_complex()}) {
    auto cx = complex_from_json(doc);
    json j = complex_to_json(cx);
    auto back = complex_from_json(json::parse(j.dump()));
    CHECK(homology_betti(back) == homology_betti(cx));
    CHECK(invariant_homology_betti(back) == invariant_homology_betti(cx));
    for (auto& e : j["differential"]) CHECK(e["coeff"].is_string());
  }
}

TEST_CASE("property: disguised complexes have the Betti numbers of their free part") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> small(0, 3);
  for (int trial = 0; trial < 25; ++trial) {
    std::map<int, int> pairs, free;
    for (int j = 0; j <= 3; ++j) {
      if (int c = small(rng)) free[j] = c;
      if (j > 0)
        if (int c = small(rng)) pairs[j] = c;
    }
    auto cx = disguised(pairs, free, rng);
    Betti expect(free.begin(), free.end());
    CHECK(homology_betti(cx) == expect);
    CHECK(oracle::betti(cx, false) == expect);
  }
}

TEST_CASE("property: identity action gives plain homology; invariant ranks are bounded") {
  for (auto doc : {catalog::fig1_complex(), catalog::fig2_complex(), catalog::fig3_complex(), catalog::torus_complex()}) {
    auto cx = complex_from_json(doc);
    json trivial = doc;
    trivial["k"] = 1;
    json id = json::array();
    for (auto& [deg, names] : doc["generators"].items())
      for (auto& n : names) id.push_back({{"from", n}, {"to", n}, {"coeff", "1"}});
    trivial["action"] = id;
    auto tc = complex_from_json(trivial);
    CHECK(invariant_homology_betti(tc) == homology_betti(tc));
    auto plain = homology_betti(cx);
    for (auto& [j, b] : invariant_homology_betti(cx)) CHECK(b <= plain[j]);
  }
}

TEST_CASE("sparse reduction agrees with the dense complex") {
  // Boundary of a square: 4 vertices, 4 edges, 1 face; rotation by a quarter turn.
  SparseComplex sq;
  sq.dim = {0, 0, 0, 0, 1, 1, 1, 1, 2};
  sq.boundary.resize(9);
  for (int e = 0; e < 4; ++e) sq.boundary[4 + e] = {{(e + 1) % 4, Q(1)}, {e, Q(-1)}};
  sq.boundary[8] = {{4, Q(1)}, {5, Q(1)}, {6, Q(1)}, {7, Q(1)}};
  CHECK(sparse_betti(sq) == B({{0, 1}}));
  SignedPerm rot{{1, 2, 3, 0, 5, 6, 7, 4, 8}, {1, 1, 1, 1, 1, 1, 1, 1, 1}};
  auto dense = to_dense(sq, &rot, 4);
  CHECK(homology_betti(dense) == sparse_betti(sq));
  CHECK(sparse_betti(invariant_subcomplex(sq, rot, 4)) == invariant_homology_betti(dense));
}
