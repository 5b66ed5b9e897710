// One PASS/FAIL line per acceptance criterion, with wall time against its budget.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "equimorse/catalog.hpp"
#include "equimorse/dact.hpp"
#include "equimorse/equiperturb.hpp"
#include "equimorse/exactalg.hpp"
#include "equimorse/iterthy.hpp"
#include "equimorse/lochom.hpp"
#include "equimorse/prodsdm.hpp"
#include "equimorse/regdist.hpp"
#include "equimorse/spindex.hpp"

using namespace equimorse;
using exactalg::Betti;
using hamflow::HamiltonianGerm;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream note;
  void expect(bool c, const std::string& what) {
    if (!c && ok) note << "first failure: " << what;
    ok = ok && c;
  }
};

int failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<void(Check&)>& body) {
  Check c;
  auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.ok = false;
    c.note << "exception: " << e.what();
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = s < budget_s;
  const bool pass = c.ok && in_time;
  failures += !pass;
  std::printf("%s  %2d  %-34s %8.2fs / %.0fs  %s%s\n", pass ? "PASS" : "FAIL", id, title, s, budget_s,
              c.note.str().c_str(), in_time ? "" : " (over time budget)");
  std::fflush(stdout);
}

std::string str(const Betti& b) { return exactalg::betti_to_json(b).dump(); }

// Adapted, with each full step joined to the identity through Gen1 maps.
bool grading_N(const HamiltonianGerm& g, int N) { return hamflow::adapted_N(g, N) && hamflow::step_homotopy_ok(g, N); }

int smallest_N(const HamiltonianGerm& g) {
  int N = 1;
  while (!grading_N(g, N)) ++N;
  return N;
}

std::vector<HamiltonianGerm> germ_catalog() {
  return {HamiltonianGerm::rotation(0.3), HamiltonianGerm::rotation(0.7), HamiltonianGerm::hyperbolic(std::log(2.0)),
          HamiltonianGerm::quartic(-1)};
}

FunctionSpec poly(int d, std::vector<Polynomial::Term> t, std::optional<CyclicAction> a = std::nullopt) {
  return FunctionSpec{std::make_shared<Polynomial>(d, std::move(t)), a};
}

CyclicAction diag_action(std::vector<double> s) {
  Mat a = Mat::Zero(int(s.size()), int(s.size()));
  for (size_t i = 0; i < s.size(); ++i) a(i, i) = s[i];
  return {a, 2};
}

void c1(Check& c) {
  struct Row {
    const char* name;
    nlohmann::json doc;
    Betti plain, inv;
  };
  std::vector<Row> rows = {{"fig1", catalog::fig1_complex(), {{1, 1}}, {}},
                           {"fig2", catalog::fig2_complex(), {{0, 1}}, {{0, 1}}},
                           {"fig3", catalog::fig3_complex(), {{1, 1}}, {}},
                           {"torus", catalog::torus_complex(), {{0, 1}, {1, 2}, {2, 1}}, {{0, 1}, {1, 1}}}};
  for (auto& r : rows) {
    auto cx = exactalg::complex_from_json(r.doc);
    auto p = exactalg::homology_betti(cx), i = exactalg::invariant_homology_betti(cx);
    c.expect(p == r.plain && i == r.inv, std::string(r.name) + " gave " + str(p) + "/" + str(i));
  }
}

void c2(Check& c) {
  int cases = 0, excluded = 0;
  for (double a : {0.3, 0.7}) {
    auto g = HamiltonianGerm::rotation(a);
    for (int k = 1; k <= 6; ++k) {
      const int cz = spindex::cz_index(spindex::SymplecticPath::from_germ(g, k));
      const int nu = spindex::nullity(hamflow::linear_flow(g, 0, k));
      int checked_here = 0;
      for (int N = 1; N <= 3; ++N) {
        if (!hamflow::adapted_N(g, N)) continue;
        if (!hamflow::step_homotopy_ok(g, N)) {
          ++excluded;
          continue;
        }
        auto id = dact::DiscreteAction(g, k, N).index_at_zero();
        c.expect(id.index == cz + k * N && id.nullity == nu,
                 "a=" + std::to_string(a) + " k=" + std::to_string(k) + " N=" + std::to_string(N));
        ++cases;
        ++checked_here;
      }
      c.expect(checked_here > 0, "no usable N for a=" + std::to_string(a) + " k=" + std::to_string(k));
    }
  }
  c.note << cases << " cases, " << excluded << " skipped (full step past a quarter turn) ";
}

void c3(Check& c) {
  int cases = 0;
  for (auto& g : germ_catalog()) {
    const int N = smallest_N(g);
    for (int m = 1; m <= 2; ++m)
      for (int k = 2; k <= 4; ++k) {
        auto cls = spindex::classify_iteration(hamflow::linear_flow(g, 0, m), k);
        if (!cls.good || !cls.admissible) continue;
        auto s = dact::diagonal_split(g, m, k, 2 * N);
        const int expect = iterthy::cz(g, k * m) - iterthy::cz(g, m) + g.n() * m * (k - 1) * 2 * N;
        c.expect(s.dim_e_minus == expect && s.orientation_preserved,
                 g.label() + " m=" + std::to_string(m) + " k=" + std::to_string(k) + " dimE-=" +
                     std::to_string(s.dim_e_minus) + " expected " + std::to_string(expect));
        ++cases;
      }
  }
  c.expect(cases >= 6, "too few good admissible pairs");
  c.note << cases << " pairs ";
}

void c4(Check& c) {
  int cases = 0;
  for (auto& g : germ_catalog()) {
    const int N = smallest_N(g);
    for (int k = 1; k <= 3; ++k) {
      auto s = dact::inflation_index_shift(g, k, N);
      c.expect(s.shift1 == g.n() * k && s.shift2 == 2 * g.n() * k,
               g.label() + " k=" + std::to_string(k) + " shifts " + std::to_string(s.shift1) + "," +
                   std::to_string(s.shift2));
      c.expect(s.nullity_N == s.nullity_N1 && s.nullity_N == s.nullity_N2, "nullity changed under inflation");
      c.expect(s.auxiliary_orientation_preserved, "auxiliary shift reverses orientation");
      ++cases;
    }
  }
  c.note << cases << " cases ";
}

void c5(Check& c) {
  std::vector<std::pair<std::string, FunctionSpec>> models = {
      {"fig1(0.5)", catalog::fig1_model(0.5)},
      {"fig2(0.5)", catalog::fig2_model(0.5, 0.1)},
      {"x2+y2 / (-1,1)", poly(2, {{1, {2, 0}}, {1, {0, 2}}}, diag_action({-1, 1}))},
      {"x2-y2 / (-1,1)", poly(2, {{1, {2, 0}}, {-1, {0, 2}}}, diag_action({-1, 1}))},
      {"x2-y2 / (1,-1)", poly(2, {{1, {2, 0}}, {-1, {0, 2}}}, diag_action({1, -1}))},
      {"-x2-2y2 / (-1,-1)", poly(2, {{-1, {2, 0}}, {-2, {0, 2}}}, diag_action({-1, -1}))}};
  for (auto& [name, f] : models) {
    const bool fig = name.rfind("fig", 0) == 0;
    lochom::MorseOptions mo;
    mo.radius = fig ? 1.2 : 1.0;
    auto mc = lochom::morse_complex_2d(f, mo);
    auto mp = exactalg::homology_betti(mc.cx), mi = exactalg::invariant_homology_betti(mc.cx);
    for (int res : {16, 24}) {
      lochom::GMParams gm;
      gm.radius = fig ? 1.6 : 1.0;
      gm.a = 0.1;
      gm.b = name == "fig1(0.5)" ? 0.2 : 0.1;
      gm.h = gm.radius / res;
      gm.check_isolation = !fig;
      auto pr = lochom::gromoll_meyer_pair(f, gm);
      auto cp = lochom::relative_homology(pr, false).betti, ci = lochom::relative_homology(pr, true).betti;
      c.expect(cp == mp && ci == mi, name + " h=r/" + std::to_string(res) + ": morse " + str(mp) + "/" + str(mi) +
                                         " cubical " + str(cp) + "/" + str(ci));
    }
  }
}

void c6(Check& c) {
  std::vector<FunctionSpec> ex = {poly(2, {{1, {4, 0}}, {1, {0, 2}}}),
                                  poly(2, {{2, {4, 0}}, {1, {0, 2}}, {-2, {2, 1}}}),
                                  poly(2, {{1, {4, 0}}, {-1, {0, 2}}}, diag_action({1, -1}))};
  double worst_s = 0, worst_e = 0;
  for (auto& f : ex) {
    auto r = lochom::EquivariantSplit(f, 1).verify();
    worst_s = std::max(worst_s, r.splitting);
    worst_e = std::max(worst_e, r.equivariance);
    c.expect(r.splitting < 1e-7 && r.equivariance < 1e-8, "residuals too large");
  }
  c.note << "max residuals " << worst_s << ", " << worst_e << " ";
}

void c7(Check& c) {
  auto q = HamiltonianGerm::quartic(-1), rot = HamiltonianGerm::rotation(0.3);
  for (auto [g, k] : std::vector<std::pair<HamiltonianGerm, int>>{{q, 2}, {q, 3}, {rot, 3}}) {
    auto r = iterthy::persistence_check(g, 1, k);
    c.expect(r.invariant_checked && r.invariant_match,
             g.label() + " k=" + std::to_string(k) + " invariant " + str(r.at_m.invariant) + " vs " +
                 str(r.at_km.invariant) + " " + r.skipped);
  }
  int plain = 0;
  for (auto& g : germ_catalog())
    for (int k = 2; k <= 6; ++k) {
      auto cls = spindex::classify_iteration(hamflow::linear_flow(g, 0, 1), k);
      if (!cls.admissible) continue;
      auto r = iterthy::persistence_check(g, 1, k);
      c.expect(r.plain_checked && r.plain_match, g.label() + " k=" + std::to_string(k) + " plain " +
                                                     str(r.at_m.plain) + " vs " + str(r.at_km.plain));
      ++plain;
    }
  c.note << plain << " plain comparisons ";
}

void c8(Check& c) {
  int cases = 0;
  for (auto& g : germ_catalog())
    for (int j = 1; j <= 4; ++j) {
      auto e = iterthy::euler_lefschetz(g, j);
      c.expect(e.sigma == -1, "sigma is not (-1)^n");
      c.expect(e.match, g.label() + " j=" + std::to_string(j) + " formula " + e.chi_formula.get_str() + " direct " +
                            std::to_string(e.chi_direct));
      ++cases;
    }
  c.note << cases << " (germ, j) pairs ";
}

// One constant for the whole catalog: |grad delta| <= M and |D^2 delta| dist <= M.
constexpr double kDerivativeM = 1e5;

struct RdEntry {
  std::string name;
  regdist::ClosedSet Y;
  Mat E;
  CyclicAction A;
  int depth;
};

std::vector<RdEntry> rd_catalog() {
  std::vector<RdEntry> out;
  {
    regdist::ClosedSet Y(1);
    Y.add_point(Vec::Constant(1, 0.25)).add_point(Vec::Constant(1, -0.25));
    out.push_back({"1D pair", Y, Mat(1, 0), diag_action({-1}), 14});
  }
  {
    regdist::ClosedSet Y(2);
    Vec p(2);
    p << 1, 0;
    Y.add_point(p).add_point(-p);
    Mat e(2, 1);
    e << 1, 0;
    out.push_back({"2D axis + pair", Y, e, diag_action({1, -1}), 12});
  }
  {
    regdist::ClosedSet Y(3);
    Vec p(3);
    p << 0.5, 0, 0;
    Y.add_point(p).add_point(-p);
    Mat e(3, 1);
    e << 0, 0, 1;
    out.push_back({"3D axis + pair", Y, e, diag_action({-1, -1, 1}), 7});
  }
  return out;
}

void c9(Check& c) {
  const double L = 2;
  double worst_m = 0, min_ratio = 1e300, max_ratio = 0, worst_coinc = 0, worst_inv = 0;
  int queries = 0, near_e = 0;
  for (auto& e : rd_catalog()) {
    const int N = e.Y.dim();
    regdist::RegularizedDistance rd(e.Y, e.E, e.A, L, e.depth);
    auto w = rd.decomposition().check();
    c.expect(w.ok(), e.name + ": Whitney check failed");
    const double c1 = regdist::lower_constant(N), c2 = regdist::upper_constant(N);
    // Queries with dist(x, X) of at least a few finest cubes.
    const double finest = 2 * L / std::pow(2.0, e.depth) * std::sqrt(double(N));
    std::mt19937 rng(1234 + N);
    std::uniform_real_distribution<double> u(-0.7 * L, 0.7 * L);
    int got = 0;
    while (got < 1000) {
      Vec x(N);
      for (int i = 0; i < N; ++i) x(i) = u(rng);
      const double d = rd.dist_x(x);
      if (d < 8 * finest) continue;
      ++got;
      const double v = rd.value(x);
      min_ratio = std::min(min_ratio, v / d);
      max_ratio = std::max(max_ratio, v / d);
      c.expect(v >= c1 * d && v <= c2 * d, e.name + ": comparison bound");
      worst_inv = std::max(worst_inv, std::abs(rd.value(e.A.A * x) - v));
      if (rd.in_coincidence_region(x)) {
        ++near_e;
        worst_coinc = std::max(worst_coinc, std::abs(v - rd.dist_e(x)));
      }
      if (got % 10 == 0) {
        const double h = 0.01 * d;
        const double g1 = rd.gradient(x, h).norm();
        const double g2 = rd.hessian(x, h).norm() * d;
        worst_m = std::max({worst_m, g1, g2});
      }
    }
    // Points placed near E away from Y.
    if (e.E.cols() > 0) {
      std::uniform_real_distribution<double> t(0.05, 0.3), off(-0.02, 0.02);
      int placed = 0;
      for (int i = 0; i < 200 && placed < 100; ++i) {
        Vec x = e.E * Vec::Constant(1, t(rng) * (i % 2 ? 1 : -1));
        for (int j = 0; j < N; ++j) x(j) += e.E.col(0)(j) ? 0 : off(rng);
        if (!rd.in_coincidence_region(x)) continue;
        ++placed;
        ++near_e;
        worst_coinc = std::max(worst_coinc, std::abs(rd.value(x) - rd.dist_e(x)));
      }
      c.expect(placed > 50, e.name + ": coincidence region not reached");
    }
    queries += got;
  }
  c.expect(worst_coinc < 1e-12, "delta differs from dist(., E) near E");
  c.expect(worst_inv < 1e-10, "delta not invariant");
  c.expect(worst_m <= kDerivativeM, "derivative bound exceeded");
  c.note << queries << " queries, delta/dist in [" << min_ratio << ", " << max_ratio << "], " << near_e
         << " near E, max derivative product " << worst_m << " <= M=" << kDerivativeM << " ";
}

void c10(Check& c) {
  for (auto [name, f] : std::vector<std::pair<std::string, FunctionSpec>>{
           {"reflection", catalog::perturb_quartic_reflection()}, {"rotation", catalog::perturb_quartic_rotation()}}) {
    auto r = equiperturb::perturb_invariant_morse(f);
    const auto& ct = r.cert;
    c.expect(ct.invariance_residual < 1e-9 && ct.strata_ok && ct.normal_margin >= 0.9 && ct.c2_distance < 0.05 &&
                 ct.morse_ok,
             name + " certificate " + equiperturb::certificate_to_json(ct).dump());
    c.note << name << ": " << ct.critical.size() << " critical points, margin " << ct.normal_margin << "; ";
  }
  auto ms = equiperturb::verify_morse_smale_2d(catalog::bagel(), 1.5);
  c.expect(ms.saddle_connections.size() == 1, "bagel connections " + std::to_string(ms.saddle_connections.size()));
}

void c11(Check& c) {
  c.expect(prodsdm::check_sdm(HamiltonianGerm::quartic(-1)).sdm, "-|z|^4/4 not detected");
  c.expect(!prodsdm::check_sdm(HamiltonianGerm::rotation(0.3)).sdm, "rotation flagged");
  c.expect(!prodsdm::check_sdm(HamiltonianGerm::quartic(1)).sdm, "+|z|^4/4 flagged");
  for (int k : {2, 3}) {
    auto p = prodsdm::special_case_product(HamiltonianGerm::quartic(-0.4), k);
    c.expect(p.failing == prodsdm::Condition::None && !p.indeterminate && p.nonzero,
             "special product k=" + std::to_string(k) + ": " + p.reason);
  }
}

}  // namespace

int main() {
  criterion(1, "chain-complex reproductions", 1, c1);
  criterion(2, "index consistency", 10, c2);
  criterion(3, "diagonal splitting", 10, c3);
  criterion(4, "inflation shifts", 10, c4);
  criterion(5, "trajectory vs cubical homology", 120, c5);
  criterion(6, "splitting lemma", 30, c6);
  criterion(7, "persistence", 300, c7);
  criterion(8, "Euler-Lefschetz", 300, c8);
  criterion(9, "regularized distance", 60, c9);
  criterion(10, "perturbation certificate", 120, c10);
  criterion(11, "SDM suite", 120, c11);
  std::printf("%d of 11 criteria failed\n", failures);
  return failures ? 1 : 0;
}
