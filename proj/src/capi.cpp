#include "equimorse/equimorse.h"

#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "equimorse/commands.hpp"
#include "equimorse/exactalg.hpp"
#include "equimorse/iterthy.hpp"
#include "equimorse/json_io.hpp"

struct em_complex {
  equimorse::exactalg::Betti plain, invariant;
};

struct em_germ {
  equimorse::hamflow::HamiltonianGerm g;
};

namespace {

thread_local std::string g_error;

template <class F>
em_status guarded(F&& f) {
  g_error.clear();
  try {
    f();
    return EM_OK;
  } catch (const equimorse::Error& e) {
    g_error = std::string(equimorse::error_kind_name(e.kind())) + ": " + e.what();
    if (e.kind() == equimorse::ErrorKind::Usage) return EM_USAGE;
    return equimorse::is_numerical(e.kind()) ? EM_NUMERICAL : EM_VALIDATION;
  } catch (const nlohmann::json::exception& e) {
    g_error = std::string("validation: ") + e.what();
    return EM_VALIDATION;
  } catch (const std::exception& e) {
    g_error = e.what();
    return EM_INTERNAL;
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p) std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

}  // namespace

extern "C" {

const char* em_last_error(void) { return g_error.c_str(); }

const char* em_version(void) { return "0.1.0"; }

em_status em_complex_from_json(const char* json, em_complex** out) {
  if (!json || !out) return EM_USAGE;
  return guarded([&] {
    auto cx = equimorse::exactalg::complex_from_json(equimorse::io::parse_json(json));
    *out = new em_complex{equimorse::exactalg::homology_betti(cx), equimorse::exactalg::invariant_homology_betti(cx)};
  });
}

void em_complex_free(em_complex* c) { delete c; }

em_status em_complex_betti(const em_complex* c, int deg, int invariant, long* out) {
  if (!c || !out) return EM_USAGE;
  const auto& b = invariant ? c->invariant : c->plain;
  auto it = b.find(deg);
  *out = it == b.end() ? 0 : it->second;
  g_error.clear();
  return EM_OK;
}

em_status em_germ_from_json(const char* json, em_germ** out) {
  if (!json || !out) return EM_USAGE;
  return guarded([&] { *out = new em_germ{equimorse::io::germ_from_json(equimorse::io::parse_json(json))}; });
}

void em_germ_free(em_germ* g) { delete g; }

em_status em_germ_cz(const em_germ* g, int k, int* out) {
  if (!g || !out) return EM_USAGE;
  return guarded([&] {
    if (k < 1) equimorse::fail(equimorse::ErrorKind::Validation, "period must be positive");
    *out = equimorse::iterthy::cz(g->g, k);
  });
}

int em_run_command(int argc, const char* const* argv, char** out, char** err) {
  std::vector<std::string> args(argv, argv + argc);
  equimorse::cli::Outcome r;
  em_status st = guarded([&] { r = equimorse::cli::run(args); });
  if (st != EM_OK) {
    r.exit_code = int(st);
    r.err = g_error + "\n";
  }
  if (out) *out = dup(r.out);
  if (err) *err = dup(r.err);
  return r.exit_code;
}

void em_string_free(char* s) { std::free(s); }

}  // extern "C"
