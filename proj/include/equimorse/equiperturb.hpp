#pragma once

#include <memory>
#include <string>
#include <vector>

#include "equimorse/field.hpp"
#include "equimorse/regdist.hpp"
#include "json.hpp"

namespace equimorse::equiperturb {

struct Stratum {
  int j = 1;
  Mat basis;  // orthonormal basis of F_j = ker(A^j - I)
  Mat P;      // orthogonal projection onto F_j
  int dim() const { return int(basis.cols()); }
};

struct Stratification {
  int N = 0, k = 1;
  std::vector<Stratum> strata;  // divisors of k, increasing
  double commute_residual = 0;  // max |P_j A - A P_j|
  double orthogonality_residual = 0;
  const Stratum& F(int j) const;
  double dist(const Vec& x, int j) const;
  // Smallest-dimensional stratum within tol of x (the isotropy stratum).
  int isotropy(const Vec& x, double tol = 1e-6) const;
};

Stratification strata(const CyclicAction& a);

struct Extension {
  std::shared_ptr<const Field> f;
  double invariance_residual = 0;
  double tangency_residual = 0;  // normal gradient on F_j
};
// f~(z) = f(B^T P z) - |(I - P) z|^2 for f given in coordinates of F_j.
Extension normal_decreasing_extension(std::shared_ptr<const Field> f_on_fj, const Stratification& s, int j,
                                      double radius = 0.5);

struct CriticalInfo {
  Vec p;
  int index = 0;
  int stratum = 0;   // isotropy stratum j
  double normal_max_eig = 0;  // largest Hessian eigenvalue on F_j^perp
  double min_abs_eig = 0;
};

struct Certificate {
  double invariance_residual = 0;
  bool invariance_ok = false;
  double nearest_off_stratum = 0;  // smallest distance to a lower stratum among points not on it
  bool strata_ok = false;
  double normal_margin = 0;  // min over stratum points of -max_eig / c_j (needs >= 0.9)
  bool normal_ok = false;
  double c2_distance = 0;
  bool c2_ok = false;
  bool morse_ok = false;
  double min_abs_eig = 0;
  std::vector<CriticalInfo> critical;
  bool passed() const { return invariance_ok && strata_ok && normal_ok && c2_ok && morse_ok; }
};

struct PerturbOptions {
  double eps = 0.05;
  double radius = 0.3;
  unsigned seed = 0;
  double c_factor = 0.25;  // c_d = c_factor * eps
  int draws = 3;
  int regdist_depth = 9;
};

struct PerturbResult {
  std::shared_ptr<const Field> f_out;
  Certificate cert;
  std::vector<std::string> trace;
  int draws_used = 0;
};

PerturbResult perturb_invariant_morse(const FunctionSpec& f, const PerturbOptions& opt = {});

// Newton sweep over multi-scale seed grids in the ball of radius R.
std::vector<Vec> find_critical_points(const Field& f, double radius, int per_axis = 11, int scales = 6);

struct MorseSmaleReport {
  int saddles = 0;
  std::vector<std::pair<std::string, std::string>> saddle_connections;
  int escaped = 0;
  double tangency_residual = 0;
  bool tangency_ok = true;
  bool clean() const { return saddle_connections.empty(); }
};
MorseSmaleReport verify_morse_smale_2d(const FunctionSpec& f, double radius);

Certificate certify(const Field& f_out, const Field& f, const Stratification& s, const CyclicAction& a,
                    const std::vector<double>& c, double eps, double radius);

nlohmann::json certificate_to_json(const Certificate& c);

}  // namespace equimorse::equiperturb
