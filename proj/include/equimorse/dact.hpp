#pragma once

#include <string>
#include <vector>

#include "equimorse/field.hpp"
#include "equimorse/hamflow.hpp"

namespace equimorse::dact {

// Hessian at 0 of sum_i x_i (y_{i+1} - y_i) + S_i(x_i, y_{i+1}) over a cyclic
// chain of L = d2s.size() sites, given D^2 S_i(0) (2n x 2n, variables (x, Y)).
Mat quadratic_action_hessian(int n, const std::vector<Mat>& d2s);
// Same, with D^2 S_i computed from linear step maps.
Mat quadratic_action_hessian_from_steps(const std::vector<Mat>& steps);

struct IndexData {
  int index = 0;
  int nullity = 0;
};
IndexData quadratic_index(const Mat& hess);

// The discrete action A_{H,k,N} on R^{2nkN}. Sites are stored 0-based:
// z_i = (x_i, y_i) occupies [2n i, 2n i + 2n).
class DiscreteAction : public Field {
 public:
  // Throws Configuration unless adapted_N(germ, N) holds.
  DiscreteAction(hamflow::HamiltonianGerm germ, int k, int N, double trust = -1);

  int n() const { return germ_.n(); }
  int k() const { return k_; }
  int N() const { return N_; }
  int sites() const { return k_ * N_; }
  int dim() const override { return 2 * n() * sites(); }
  const hamflow::HamiltonianGerm& germ() const { return germ_; }

  double value(const Vec& z) const override;
  Vec gradient(const Vec& z) const override;
  Mat hessian(const Vec& z) const override;
  Mat hessian_at_zero() const;

  Vec shift(const Vec& z) const;  // tau
  Mat shift_matrix() const;
  IndexData index_at_zero() const;

  Vec x(const Vec& z, int i) const;
  Vec y(const Vec& z, int i) const;

 private:
  const hamflow::GeneratingFunction& gf(int site) const { return gfs_[site % N_]; }
  hamflow::HamiltonianGerm germ_;
  int k_, N_;
  std::vector<hamflow::GeneratingFunction> gfs_;
  Mat hess0_;
};

// Cyclic shift by `by` sites on (R^{2n})^L.
Mat site_shift_matrix(int n, int L, int by);

struct DiagonalSplit {
  int dim_e_minus = 0;
  bool orientation_preserved = true;
  double off_block_norm = 0;
  int ambient_dim = 0;
};
// A_{H,mk,steps} split along the k-fold diagonal of (R^{2n m steps})^k.
// `steps` is the per-period step count (2N in the iteration setting).
DiagonalSplit diagonal_split(const hamflow::HamiltonianGerm& g, int m, int k, int steps);

struct InflationShift {
  int shift1 = 0;  // index(N+1) - index(N)
  int shift2 = 0;  // index(N+2) - index(N)
  int nullity_N = 0, nullity_N1 = 0, nullity_N2 = 0;
  bool auxiliary_orientation_preserved = true;
};
InflationShift inflation_index_shift(const hamflow::HamiltonianGerm& g, int k, int N);

// Orientation behaviour of the cyclic shift of k blocks on the negative
// space of sum_l xi_l . zeta_l, xi, zeta in (R^{block})^k.
bool auxiliary_shift_preserves_orientation(int block, int k);

struct CriticalPoint {
  Vec z;
  std::vector<Vec> orbit;  // site points z_i
  double residual = 0;
  int morse_index = 0;
  int nullity = 0;
  int orbit_size = 1;      // number of distinct shifts
};
struct SeedFailure {
  int seed;
  std::string reason;
};
struct PeriodicPoints {
  std::vector<CriticalPoint> points;
  std::vector<SeedFailure> failures;
};
PeriodicPoints find_periodic_points(const DiscreteAction& da, const std::vector<Vec>& seeds);

}  // namespace equimorse::dact
