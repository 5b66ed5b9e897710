#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "equimorse/catalog.hpp"
#include "equimorse/commands.hpp"
#include "equimorse/equimorse.h"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string write_temp(const std::string& name, const json& j) {
  auto p = fs::temp_directory_path() / ("equimorse_test_" + name + ".json");
  std::ofstream(p) << j.dump();
  return p.string();
}

json run_json(const std::vector<std::string>& args) {
  auto r = equimorse::cli::run(args);
  REQUIRE_MESSAGE(r.exit_code == 0, r.err);
  return json::parse(r.out);
}

}  // namespace

TEST_CASE("homology of a wrapped complex document") {
  auto path = write_temp("fig3", {{"kind", "chain_complex"}, {"payload", equimorse::catalog::fig3_complex()}});
  auto j = run_json({"homology", "--input", path, "--invariant"});
  CHECK(j == json::parse(R"({"betti":{"1":1},"invariant_betti":{}})"));
  auto bare = write_temp("torus", equimorse::catalog::torus_complex());
  CHECK(run_json({"homology", "--input", bare})["betti"] == json::parse(R"({"0":1,"1":2,"2":1})"));
}

TEST_CASE("CZ of rotation iterates") {
  CHECK(run_json({"cz", "--rotation", "0.3", "--iterate", "4"}) == json{{"cz", 3}});
  CHECK(run_json({"cz", "--rotation", "0.7", "--iterate", "2"}) == json{{"cz", 3}});
}

TEST_CASE("exit codes") {
  using equimorse::cli::run;
  CHECK(run({}).exit_code == 64);
  CHECK(run({"no-such-command"}).exit_code == 64);
  CHECK(run({"cz", "--rotation", "0.3", "--hyperbolic", "1"}).exit_code == 64);
  CHECK(run({"--help"}).exit_code == 0);
  // d^2 != 0.
  json bad = json::parse(R"({"generators": {"0": ["a"], "1": ["b"], "2": ["c"]},
    "differential": [{"from": "c", "to": "b", "coeff": 1}, {"from": "b", "to": "a", "coeff": 1}]})");
  auto r = run({"homology", "--input", write_temp("bad", bad)});
  CHECK(r.exit_code == 2);
  CHECK_FALSE(r.err.empty());
  CHECK(run({"homology", "--input", "/nonexistent/x.json"}).exit_code == 2);
  // Query below the finest Whitney cubes: resolution error.
  json set = {{"Y", {{"dim", 2}, {"parts", {{{"type", "point"}, {"at", {1, 0}}}}}}},
              {"E", {{1, 0}}},
              {"L", 2},
              {"depth", 4},
              {"points", {{1.000001, 0.000001}}}};
  CHECK(run({"regdist", "--input", write_temp("rd", set)}).exit_code == 3);
}

TEST_CASE("table output and catalog export round trip") {
  auto t = equimorse::cli::run({"--format", "table", "cz", "--rotation", "0.3"});
  CHECK(t.exit_code == 0);
  CHECK(t.out.find("cz") != std::string::npos);
  CHECK(t.out.find('{') == std::string::npos);
  auto doc = run_json({"catalog", "--export", "fig1"});
  CHECK(doc["kind"] == "chain_complex");
  auto path = write_temp("fig1_export", doc);
  CHECK(run_json({"homology", "--input", path})["betti"] == json::parse(R"({"1":1})"));
}

TEST_CASE("catalog listing and a single fixture run") {
  auto list = run_json({"catalog", "--list"});
  CHECK(list["fixtures"].size() == equimorse::catalog::fixtures().size());
  for (auto& f : list["fixtures"]) CHECK_FALSE(f["expected_from"].get<std::string>().empty());
  auto r = run_json({"catalog", "--run", "rot03"});
  CHECK(r["passed"] == 1);
  CHECK(equimorse::cli::run({"catalog", "--run", "missing"}).exit_code == 2);
}

TEST_CASE("regdist CSV") {
  json set = {{"Y", {{"dim", 2}, {"parts", {{{"type", "point"}, {"at", {1, 0}}}, {{"type", "point"}, {"at", {-1, 0}}}}}}},
              {"E", {{1, 0}}},
              {"action", {{"matrix", {{1, 0}, {0, -1}}}, {"k", 2}}},
              {"L", 2},
              {"depth", 10},
              {"points", {{0.2, 0.05}, {0.3, 0}}}};
  auto r = equimorse::cli::run({"regdist", "--input", write_temp("rd_ok", set), "--random", "5"});
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.rfind("x0,x1,delta,grad_norm,dist,bound_ok\n", 0) == 0);
  int lines = 0;
  for (char c : r.out) lines += c == '\n';
  CHECK(lines == 8);
  CHECK(r.out.find(",0\n") == std::string::npos);
}

TEST_CASE("C interface") {
  auto doc = equimorse::catalog::torus_complex().dump();
  em_complex* c = nullptr;
  REQUIRE(em_complex_from_json(doc.c_str(), &c) == EM_OK);
  long b = -1;
  CHECK(em_complex_betti(c, 1, 0, &b) == EM_OK);
  CHECK(b == 2);
  CHECK(em_complex_betti(c, 1, 1, &b) == EM_OK);
  CHECK(b == 1);
  CHECK(em_complex_betti(c, 5, 0, &b) == EM_OK);
  CHECK(b == 0);
  em_complex_free(c);

  em_complex* bad = nullptr;
  CHECK(em_complex_from_json("{not json", &bad) == EM_VALIDATION);
  CHECK(std::string(em_last_error()).size() > 0);

  em_germ* g = nullptr;
  auto gj = equimorse::hamflow::HamiltonianGerm::rotation(0.3).to_json().dump();
  REQUIRE(em_germ_from_json(gj.c_str(), &g) == EM_OK);
  int cz = 0;
  CHECK(em_germ_cz(g, 4, &cz) == EM_OK);
  CHECK(cz == 3);
  em_germ_free(g);

  const char* argv[] = {"cz", "--rotation", "0.7"};
  char *out = nullptr, *err = nullptr;
  CHECK(em_run_command(3, argv, &out, &err) == 0);
  CHECK(json::parse(out) == json{{"cz", 1}});
  em_string_free(out);
  em_string_free(err);
  CHECK(std::string(em_version()).size() > 0);
}
