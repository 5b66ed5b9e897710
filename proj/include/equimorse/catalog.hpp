#pragma once

#include <functional>
#include <string>
#include <vector>

#include "equimorse/exactalg.hpp"
#include "equimorse/field.hpp"
#include "equimorse/hamflow.hpp"
#include "json.hpp"

namespace equimorse::catalog {

// Input documents of the built-in examples.
nlohmann::json fig1_complex();
nlohmann::json fig2_complex();
nlohmann::json fig3_complex();
nlohmann::json torus_complex();

// Two-variable models: reflection u -> -u in both.
// fig1_model(t) = -u^2 - t v^2 + v^4/2, a saddle splitting into a maximum and two saddles.
FunctionSpec fig1_model(double t);
// fig2_model(t, e) = (u^2 + v^2 - t)^2/4 + e u^2/2, a minimum splitting into five points.
FunctionSpec fig2_model(double t, double e = 0.1);
// v^3/3 - v - v u^2 under u -> -u: saddles at (0, +-1) joined along the fixed axis.
FunctionSpec bagel();
// (u^2 + v^2)^2 with diag(1, -1), and u^4 + v^4 with the quarter turn.
FunctionSpec perturb_quartic_reflection();
FunctionSpec perturb_quartic_rotation();

hamflow::HamiltonianGerm sdm_germ();  // -|z|^4 / 4

struct Fixture {
  std::string name;
  std::string kind;
  std::string description;
  std::string expected_from;  // how the expected value is known
  nlohmann::json input;       // document accepted by the matching subcommand
  nlohmann::json expected;    // keys that must match in the result
  std::function<nlohmann::json()> run;
};

const std::vector<Fixture>& fixtures();
const Fixture& fixture(const std::string& name);

struct FixtureResult {
  std::string name;
  bool pass = false;
  nlohmann::json got;
  std::string error;
  double seconds = 0;
};
FixtureResult run_fixture(const Fixture& f);
// Every key of `expected` present in `got` with an equal value (recursively).
bool matches(const nlohmann::json& expected, const nlohmann::json& got);

}  // namespace equimorse::catalog
