#include "equimorse/catalog.hpp"

#include <chrono>
#include <cmath>

#include "equimorse/equiperturb.hpp"
#include "equimorse/iterthy.hpp"
#include "equimorse/lochom.hpp"
#include "equimorse/prodsdm.hpp"
#include "equimorse/spindex.hpp"

namespace equimorse::catalog {

using nlohmann::json;

json fig1_complex() {
  return json::parse(R"({
    "k": 2,
    "generators": {"2": ["x"], "1": ["y", "z"]},
    "differential": [{"from": "x", "to": "y", "coeff": "1"}, {"from": "x", "to": "z", "coeff": "-1"}],
    "action": [{"from": "x", "to": "x", "coeff": "-1"}, {"from": "y", "to": "y", "coeff": "-1"},
               {"from": "z", "to": "z", "coeff": "-1"}]
  })");
}

json fig2_complex() {
  return json::parse(R"({
    "k": 2,
    "generators": {"2": ["x"], "1": ["u", "v"], "0": ["y", "z"]},
    "differential": [{"from": "x", "to": "u", "coeff": "1"}, {"from": "x", "to": "v", "coeff": "1"},
                     {"from": "u", "to": "y", "coeff": "1"}, {"from": "u", "to": "z", "coeff": "-1"},
                     {"from": "v", "to": "z", "coeff": "1"}, {"from": "v", "to": "y", "coeff": "-1"}],
    "action": [{"from": "x", "to": "x", "coeff": "-1"}, {"from": "u", "to": "v", "coeff": "-1"},
               {"from": "v", "to": "u", "coeff": "-1"}, {"from": "y", "to": "y", "coeff": "1"},
               {"from": "z", "to": "z", "coeff": "1"}]
  })");
}

json fig3_complex() {
  return json::parse(R"({
    "k": 2,
    "generators": {"2": ["y", "z"], "1": ["x", "a", "b", "c", "d"], "0": ["u", "v"]},
    "differential": [
      {"from": "y", "to": "b", "coeff": "1"}, {"from": "y", "to": "a", "coeff": "-1"}, {"from": "y", "to": "x", "coeff": "1"},
      {"from": "z", "to": "d", "coeff": "1"}, {"from": "z", "to": "c", "coeff": "-1"}, {"from": "z", "to": "x", "coeff": "-1"},
      {"from": "x", "to": "u", "coeff": "1"}, {"from": "x", "to": "v", "coeff": "-1"},
      {"from": "a", "to": "v", "coeff": "-1"}, {"from": "c", "to": "v", "coeff": "1"},
      {"from": "b", "to": "u", "coeff": "-1"}, {"from": "d", "to": "u", "coeff": "1"}],
    "action": [
      {"from": "y", "to": "z", "coeff": "-1"}, {"from": "z", "to": "y", "coeff": "-1"},
      {"from": "x", "to": "x", "coeff": "1"},
      {"from": "a", "to": "c", "coeff": "-1"}, {"from": "c", "to": "a", "coeff": "-1"},
      {"from": "b", "to": "d", "coeff": "-1"}, {"from": "d", "to": "b", "coeff": "-1"},
      {"from": "u", "to": "u", "coeff": "1"}, {"from": "v", "to": "v", "coeff": "1"}]
  })");
}

json torus_complex() {
  return json::parse(R"({
    "k": 2,
    "generators": {"2": ["M"], "1": ["s1", "s2"], "0": ["m"]},
    "differential": [],
    "action": [{"from": "M", "to": "M", "coeff": "-1"}, {"from": "s1", "to": "s1", "coeff": "1"},
               {"from": "s2", "to": "s2", "coeff": "-1"}, {"from": "m", "to": "m", "coeff": "1"}]
  })");
}

namespace {

json reflection_u() { return {{"k", 2}, {"matrix", {{-1, 0}, {0, 1}}}}; }

json fig1_model_json(double t) {
  return {{"d", 2},
          {"terms", {{{"c", -1.0}, {"m", {2, 0}}}, {{"c", -t}, {"m", {0, 2}}}, {{"c", 0.5}, {"m", {0, 4}}}}},
          {"action", reflection_u()}};
}

json fig2_model_json(double t, double e) {
  json terms = {{{"c", 0.25}, {"m", {4, 0}}},
                {{"c", 0.5}, {"m", {2, 2}}},
                {{"c", 0.25}, {"m", {0, 4}}},
                {{"c", -0.5 * t + 0.5 * e}, {"m", {2, 0}}},
                {{"c", -0.5 * t}, {"m", {0, 2}}}};
  if (t != 0) terms.push_back({{"c", t * t / 4}, {"m", {0, 0}}});
  return {{"d", 2}, {"terms", terms}, {"action", reflection_u()}};
}

json bagel_json() {
  return {{"d", 2},
          {"terms", {{{"c", 1.0 / 3}, {"m", {0, 3}}}, {{"c", -1.0}, {"m", {0, 1}}}, {{"c", -1.0}, {"m", {2, 1}}}}},
          {"action", reflection_u()}};
}

json quartic_reflection_json() {
  return {{"d", 2},
          {"terms", {{{"c", 1}, {"m", {4, 0}}}, {{"c", 2}, {"m", {2, 2}}}, {{"c", 1}, {"m", {0, 4}}}}},
          {"action", {{"k", 2}, {"matrix", {{1, 0}, {0, -1}}}}}};
}

json quartic_rotation_json() {
  return {{"d", 2},
          {"terms", {{{"c", 1}, {"m", {4, 0}}}, {{"c", 1}, {"m", {0, 4}}}}},
          {"action", {{"k", 4}, {"matrix", {{0, -1}, {1, 0}}}}}};
}

FunctionSpec unvalidated(const json& j) {
  FunctionSpec s;
  s.f = std::make_shared<Polynomial>(Polynomial::from_json(j));
  if (j.contains("action")) s.action = CyclicAction::from_json(j.at("action"));
  return s;
}

json homology_report(const json& cx_json) {
  auto cx = exactalg::complex_from_json(cx_json);
  return {{"betti", exactalg::betti_to_json(exactalg::homology_betti(cx))},
          {"invariant_betti", exactalg::betti_to_json(exactalg::invariant_homology_betti(cx))}};
}

// Morse complex and cubical pair on the same model.
json oracle_pair(const FunctionSpec& f, double morse_radius, lochom::GMParams gm) {
  lochom::MorseOptions mo;
  mo.radius = morse_radius;
  auto mc = lochom::morse_complex_2d(f, mo);
  auto pr = lochom::gromoll_meyer_pair(f, gm);
  return {{"morse",
           {{"betti", exactalg::betti_to_json(exactalg::homology_betti(mc.cx))},
            {"invariant_betti", exactalg::betti_to_json(exactalg::invariant_homology_betti(mc.cx))},
            {"critical_points", mc.crit.size()}}},
          {"cubical",
           {{"betti", exactalg::betti_to_json(lochom::relative_homology(pr, false).betti)},
            {"invariant_betti", exactalg::betti_to_json(lochom::relative_homology(pr, true).betti)}}}};
}

lochom::GMParams gm_params(double radius, double a, double b) {
  lochom::GMParams p;
  p.radius = radius;
  p.a = a;
  p.b = b;
  p.h = radius / 16;
  p.check_isolation = false;
  return p;
}

json cz_table(const hamflow::HamiltonianGerm& g, int kmax) {
  json t = json::object();
  for (int k = 1; k <= kmax; ++k) t[std::to_string(k)] = iterthy::cz(g, k);
  return t;
}

json germ_json(const hamflow::HamiltonianGerm& g) { return g.to_json(); }

std::vector<Fixture> build() {
  std::vector<Fixture> fx;
  auto complex_fixture = [&](std::string name, std::string desc, json in, json expected) {
    fx.push_back({name, "chain_complex", desc, "stated result", in, expected, [in] { return homology_report(in); }});
  };
  complex_fixture("fig1", "saddle splitting into a maximum and two saddles under reflection", fig1_complex(),
                  {{"betti", {{"1", 1}}}, {"invariant_betti", json::object()}});
  complex_fixture("fig2", "minimum splitting into five critical points under reflection", fig2_complex(),
                  {{"betti", {{"0", 1}}}, {"invariant_betti", {{"0", 1}}}});
  complex_fixture("fig3", "saddle splitting into eight critical points under reflection", fig3_complex(),
                  {{"betti", {{"1", 1}}}, {"invariant_betti", json::object()}});
  complex_fixture("torus", "flat torus with reflection, Morse-Smale symmetric pair", torus_complex(),
                  {{"betti", {{"0", 1}, {"1", 2}, {"2", 1}}}, {"invariant_betti", {{"0", 1}, {"1", 1}}}});

  fx.push_back({"fig1-family", "function", "fig1 model at t = 0.5: trajectory count versus cubical pair",
                "independent computation", fig1_model_json(0.5),
                {{"morse", {{"betti", {{"1", 1}}}, {"invariant_betti", json::object()}}},
                 {"cubical", {{"betti", {{"1", 1}}}, {"invariant_betti", json::object()}}}},
                [] { return oracle_pair(fig1_model(0.5), 1.2, gm_params(1.6, 0.1, 0.2)); }});
  fx.push_back({"fig2-family", "function", "fig2 model at t = 0.5: trajectory count versus cubical pair",
                "independent computation", fig2_model_json(0.5, 0.1),
                {{"morse", {{"betti", {{"0", 1}}}, {"invariant_betti", {{"0", 1}}}}},
                 {"cubical", {{"betti", {{"0", 1}}}, {"invariant_betti", {{"0", 1}}}}}},
                [] { return oracle_pair(fig2_model(0.5, 0.1), 1.2, gm_params(1.6, 0.1, 0.1)); }});

  auto rot03 = hamflow::HamiltonianGerm::rotation(0.3), rot07 = hamflow::HamiltonianGerm::rotation(0.7);
  fx.push_back({"rot03", "hamiltonian", "rotation by 0.3 turns: CZ of iterates", "closed form 2 floor(k a) + 1",
                germ_json(rot03), {{"cz", {{"1", 1}, {"2", 1}, {"3", 1}, {"4", 3}}}},
                [rot03] { return json{{"cz", cz_table(rot03, 4)}}; }});
  fx.push_back({"rot07", "hamiltonian", "rotation by 0.7 turns: CZ of iterates", "closed form 2 floor(k a) + 1",
                germ_json(rot07), {{"cz", {{"1", 1}, {"2", 3}, {"3", 5}, {"4", 5}}}},
                [rot07] { return json{{"cz", cz_table(rot07, 4)}}; }});
  auto hyp = hamflow::HamiltonianGerm::hyperbolic(std::log(2.0));
  fx.push_back({"hyperbolic", "hamiltonian", "time-one map diag(2, 1/2)", "closed form det(I - M) < 0",
                germ_json(hyp), {{"fixed_point_index", -1}, {"cz", 0}},
                [hyp] { return json{{"fixed_point_index", iterthy::fixed_point_index(hyp, 1).index}, {"cz", iterthy::cz(hyp, 1)}}; }});
  fx.push_back({"sdm-quartic", "hamiltonian", "-|z|^4/4: symplectically degenerate maximum", "independent computation",
                germ_json(sdm_germ()), {{"sdm", true}, {"homology", {{"betti", {{"1", 1}}}}}},
                [] { return prodsdm::to_json(prodsdm::check_sdm(sdm_germ())); }});
  auto q4p = hamflow::HamiltonianGerm::quartic(1);
  fx.push_back({"quartic-min", "hamiltonian", "+|z|^4/4: degenerate minimum, not an SDM", "independent computation",
                germ_json(q4p), {{"sdm", false}}, [q4p] { return prodsdm::to_json(prodsdm::check_sdm(q4p)); }});
  fx.push_back({"rot03-sdm", "hamiltonian", "rotation by 0.3 turns is not an SDM", "mean index 0.6",
                germ_json(rot03), {{"sdm", false}, {"delta_zero", false}},
                [rot03] { return prodsdm::to_json(prodsdm::check_sdm(rot03)); }});

  fx.push_back({"bagel", "function", "saddle-saddle connection along the fixed axis survives symmetric perturbation",
                "stated result", bagel_json(), {{"saddle_connections", 1}, {"tangency_ok", true}}, [] {
                  auto r = equiperturb::verify_morse_smale_2d(bagel(), 1.5);
                  return json{{"saddles", r.saddles},
                              {"saddle_connections", r.saddle_connections.size()},
                              {"tangency_ok", r.tangency_ok}};
                }});
  fx.push_back({"perturb-reflection", "function", "(u^2+v^2)^2 under diag(1,-1), eps 0.05, seed 0",
                "certificate", quartic_reflection_json(), {{"passed", true}}, [] {
                  return equiperturb::certificate_to_json(
                      equiperturb::perturb_invariant_morse(perturb_quartic_reflection()).cert);
                }});
  fx.push_back({"perturb-rotation", "function", "u^4+v^4 under the quarter turn, eps 0.05, seed 0", "certificate",
                quartic_rotation_json(), {{"passed", true}}, [] {
                  return equiperturb::certificate_to_json(
                      equiperturb::perturb_invariant_morse(perturb_quartic_rotation()).cert);
                }});
  return fx;
}

}  // namespace

FunctionSpec fig1_model(double t) { return unvalidated(fig1_model_json(t)); }
FunctionSpec fig2_model(double t, double e) { return unvalidated(fig2_model_json(t, e)); }
FunctionSpec bagel() { return unvalidated(bagel_json()); }
FunctionSpec perturb_quartic_reflection() { return unvalidated(quartic_reflection_json()); }
FunctionSpec perturb_quartic_rotation() { return unvalidated(quartic_rotation_json()); }

hamflow::HamiltonianGerm sdm_germ() { return hamflow::HamiltonianGerm::quartic(-1); }

const std::vector<Fixture>& fixtures() {
  static const std::vector<Fixture> fx = build();
  return fx;
}

const Fixture& fixture(const std::string& name) {
  for (auto& f : fixtures())
    if (f.name == name) return f;
  fail(ErrorKind::Validation, "unknown fixture '" + name + "'");
}

bool matches(const json& expected, const json& got) {
  if (expected.is_object()) {
    if (!got.is_object()) return false;
    // An empty expected object means the result must be empty too.
    if (expected.empty()) return got.empty();
    for (auto& [k, v] : expected.items())
      if (!got.contains(k) || !matches(v, got.at(k))) return false;
    return true;
  }
  return expected == got;
}

FixtureResult run_fixture(const Fixture& f) {
  FixtureResult r;
  r.name = f.name;
  auto t0 = std::chrono::steady_clock::now();
  try {
    r.got = f.run();
    r.pass = matches(f.expected, r.got);
  } catch (const Error& e) {
    r.error = std::string(error_kind_name(e.kind())) + ": " + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace equimorse::catalog
