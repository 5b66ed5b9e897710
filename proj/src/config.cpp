#include "equimorse/common.hpp"

#include <cstdlib>
#include <map>
#include <mutex>
#include <sstream>

#include "json.hpp"

namespace equimorse {

const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Shape: return "shape";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Configuration: return "configuration";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Stiffness: return "stiffness";
    case ErrorKind::Resolution: return "resolution";
    case ErrorKind::TrustRegion: return "trust-region";
    case ErrorKind::Gen1: return "gen1-violation";
    case ErrorKind::Budget: return "budget";
    case ErrorKind::Ambiguity: return "ambiguity";
    case ErrorKind::Degeneracy: return "degeneracy";
    case ErrorKind::Isolation: return "isolation";
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::Boundary: return "boundary";
    case ErrorKind::NonMorseSmale: return "non-morse-smale";
    case ErrorKind::Radius: return "radius";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::Instability: return "instability";
    case ErrorKind::Pipeline: return "pipeline";
    case ErrorKind::Usage: return "usage";
  }
  return "unknown";
}

bool is_numerical(ErrorKind k) {
  switch (k) {
    case ErrorKind::Stiffness:
    case ErrorKind::Resolution:
    case ErrorKind::TrustRegion:
    case ErrorKind::Budget:
    case ErrorKind::Ambiguity:
    case ErrorKind::Radius:
    case ErrorKind::Instability:
    case ErrorKind::Pipeline:
    case ErrorKind::NonMorseSmale:
    case ErrorKind::Boundary:
      return true;
    default:
      return false;
  }
}

namespace {

std::mutex g_tol_mutex;
bool g_tol_loaded = false;
Tolerances g_tol;

double* slot(Tolerances& t, const std::string& key) {
  static const std::map<std::string, double Tolerances::*> table = {
      {"eig_rel", &Tolerances::eig_rel},
      {"gen1_det", &Tolerances::gen1_det},
      {"symplectic", &Tolerances::symplectic},
      {"path_symplectic", &Tolerances::path_symplectic},
      {"ode", &Tolerances::ode},
      {"newton", &Tolerances::newton},
      {"trust_radius", &Tolerances::trust_radius},
      {"root_of_unity", &Tolerances::root_of_unity},
      {"root_ambiguity", &Tolerances::root_ambiguity},
  };
  auto it = table.find(key);
  if (it == table.end()) return nullptr;
  return &(t.*(it->second));
}

void apply_to(Tolerances& t, const std::string& spec) {
  auto set = [&](const std::string& key, double v) {
    double* p = slot(t, key);
    if (!p) fail(ErrorKind::Configuration, "unknown tolerance key '" + key + "'");
    if (!(v > 0)) fail(ErrorKind::Configuration, "tolerance '" + key + "' must be positive");
    *p = v;
  };
  std::string s = spec;
  size_t first = s.find_first_not_of(" \t\n");
  if (first == std::string::npos) return;
  if (s[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(s);
    } catch (const std::exception& e) {
      fail(ErrorKind::Configuration, std::string("EQUIMORSE_TOL: ") + e.what());
    }
    for (auto& [k, v] : j.items()) {
      if (!v.is_number()) fail(ErrorKind::Configuration, "tolerance '" + k + "' is not a number");
      set(k, v.get<double>());
    }
    return;
  }
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) fail(ErrorKind::Configuration, "malformed tolerance entry '" + item + "'");
    std::string key = item.substr(0, eq);
    std::string val = item.substr(eq + 1);
    char* end = nullptr;
    double v = std::strtod(val.c_str(), &end);
    if (end == val.c_str() || *end != '\0') fail(ErrorKind::Configuration, "malformed tolerance value '" + val + "'");
    set(key, v);
  }
}

}  // namespace

Tolerances& tolerances() {
  std::lock_guard<std::mutex> lock(g_tol_mutex);
  if (!g_tol_loaded) {
    g_tol_loaded = true;
    if (const char* env = std::getenv("EQUIMORSE_TOL")) apply_to(g_tol, env);
  }
  return g_tol;
}

void reload_tolerances() {
  Tolerances fresh;
  if (const char* env = std::getenv("EQUIMORSE_TOL")) apply_to(fresh, env);
  std::lock_guard<std::mutex> lock(g_tol_mutex);
  g_tol = fresh;
  g_tol_loaded = true;
}

void apply_tolerance_overrides(const std::string& spec) {
  Tolerances& t = tolerances();
  Tolerances copy = t;
  apply_to(copy, spec);
  std::lock_guard<std::mutex> lock(g_tol_mutex);
  g_tol = copy;
}

Mat J0(int n) {
  Mat j = Mat::Zero(2 * n, 2 * n);
  j.block(0, n, n, n) = -Mat::Identity(n, n);
  j.block(n, 0, n, n) = Mat::Identity(n, n);
  return j;
}

}  // namespace equimorse
