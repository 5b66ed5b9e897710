#pragma once

#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "equimorse/exactalg.hpp"
#include "equimorse/hamflow.hpp"
#include "equimorse/lochom.hpp"
#include "equimorse/spindex.hpp"
#include "json.hpp"

namespace equimorse::iterthy {

using exactalg::Betti;

// Local Floer-type homology H_*(H,k,0) = HM_{*+nkN}(A_{H,k,N}, 0), the
// invariant part taken under the cyclic shift by N sites.
struct FloerHomology {
  int k = 1, N = 1;
  int shift = 0;  // nkN
  Betti plain, invariant;
  int kernel_dim = 0;
  bool orientation_preserved = true;
};
struct FloerOptions {
  double radius = 0.3;
  int max_N = 8;
};
// Smallest even N with adapted_N and step_homotopy_ok.
int choose_N(const hamflow::HamiltonianGerm& g, int k, int max_N = 8);
FloerHomology local_floer_homology(const hamflow::HamiltonianGerm& g, int k, const FloerOptions& opt = {});

int cz(const hamflow::HamiltonianGerm& g, int k);

struct PersistenceReport {
  int m = 1, k = 1;
  spindex::IterationClass cls;
  int cz_m = 0, cz_km = 0, shift = 0;
  FloerHomology at_m, at_km;
  bool plain_checked = false, plain_match = false;
  bool invariant_checked = false, invariant_match = false;
  std::string skipped;  // reason when nothing was checked
  bool ok() const { return (!plain_checked || plain_match) && (!invariant_checked || invariant_match); }
};
PersistenceReport persistence_check(const hamflow::HamiltonianGerm& g, int m, int k, const FloerOptions& opt = {});

// Fixed points of the time-d map within `radius` of 0, from a multi-scale seed grid.
struct FixedPoint {
  Vec z;
  int sign = 0;  // sign det(I - D phi^d(z))
};
std::vector<FixedPoint> fixed_points(const hamflow::HamiltonianGerm& g, int d, double radius, const Vec& shift_v,
                                     double eps);

struct IndexReport {
  int index = 0;
  bool degenerate = false;
  double eps = 0;  // perturbation size when degenerate
  int count_eps = 0, count_half = 0;
};
IndexReport fixed_point_index(const hamflow::HamiltonianGerm& g, int d, double radius = 0.1, unsigned seed = 0);

long totient(long n);

struct EulerReport {
  int j = 1;
  mpq_class chi_formula;
  long chi_direct = 0;
  int sigma = 1;
  bool match = false;
  std::vector<std::pair<int, int>> indices;  // (d, i_{phi^d})
  Betti invariant;
};
EulerReport euler_lefschetz(const hamflow::HamiltonianGerm& g, int j, const FloerOptions& opt = {});

struct SubordinationReport {
  std::vector<int> J;
  std::vector<int> iota;  // iota[j-1], -1 when the pipeline failed at j
  std::vector<std::string> failures;
  bool lcm_closed = true;
  bool check = true;       // iota_j = iota_{q(j)} wherever both are known
  std::vector<int> q;      // q[j-1]
};
SubordinationReport subordination_structure(const hamflow::HamiltonianGerm& g, int j_max, const FloerOptions& opt = {});

nlohmann::json to_json(const FloerHomology& h);
nlohmann::json to_json(const PersistenceReport& r);
nlohmann::json to_json(const IndexReport& r);
nlohmann::json to_json(const EulerReport& r);
nlohmann::json to_json(const SubordinationReport& r);

}  // namespace equimorse::iterthy
