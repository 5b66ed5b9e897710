#pragma once

#include <optional>
#include <string>
#include <vector>

#include "equimorse/exactalg.hpp"
#include "equimorse/field.hpp"

namespace equimorse::lochom {

using exactalg::Betti;

// A e_j = sign[j] e_{perm[j]}.
struct AxisAction {
  std::vector<int> perm;
  std::vector<int> sign;
  int k = 1;
  int flip = 1;  // -1 composes the cell action with -id
};
std::optional<AxisAction> axis_action(const Mat& A, int k);

struct GMParams {
  double radius = 0.5;
  double a = -1;  // < 0: 0.05 sup|f| on U
  double b = -1;
  double h = -1;  // < 0: radius / 16
  bool check_isolation = true;
};

struct CubicalPair {
  FunctionSpec f;
  GMParams params;  // resolved a, b, h
  int d = 0;
  int M = 0;  // vertices per axis, centred grid
  std::vector<char> in_w, in_wm;
  std::optional<AxisAction> action;
  double sup_abs = 0;
};

CubicalPair gromoll_meyer_pair(const FunctionSpec& f, const GMParams& p);
// Relative cubical homology of one grid.
Betti pair_homology(const CubicalPair& pair, bool invariant);

struct RelativeHomology {
  Betti betti;
  double h = 0;
  int relative_cells = 0;
};
// Computes at h and h/2; throws Resolution if they differ.
RelativeHomology relative_homology(const CubicalPair& pair, bool invariant);

// 2D Morse complex by trajectory shooting.
struct CriticalPoint2D {
  Vec p;
  int index = 0;
  double value = 0;
  Vec eu;  // unstable direction (saddles)
  Vec es;  // stable direction (saddles)
  std::string name;
};

enum class ShotEnd { Critical, Escaped, Stalled };
struct Shot {
  ShotEnd end = ShotEnd::Stalled;
  int target = -1;
  Vec last;
};
std::vector<CriticalPoint2D> find_critical_points_2d(const Field& f, double radius, int seeds_per_axis = 25);
Shot shoot(const Field& f, const Vec& start, bool descend, const std::vector<CriticalPoint2D>& crit, double radius,
           int exclude);

struct MorseOptions {
  double radius = 1.0;
  int seeds_per_axis = 25;
};
struct MorseComplex2D {
  std::vector<CriticalPoint2D> crit;
  exactalg::ChainComplex cx;
  int escaped_branches = 0;
};
MorseComplex2D morse_complex_2d(const FunctionSpec& f, const MorseOptions& opt);

// Equivariant splitting of f on R^{n1} x R^{n2} (coordinates already split).
class EquivariantSplit {
 public:
  EquivariantSplit(FunctionSpec f, int n1, double radius = 0.3);

  int n1() const { return n1_; }
  int n2() const { return n2_; }
  int positive() const { return p_; }
  int negative() const { return q_; }
  bool orientation_preserved() const { return orient_; }

  Vec phi(const Vec& z1) const;
  Vec phi(const Vec& z1, const Vec& guess) const;
  double g(const Vec& z1) const;
  // Psi(z1, w) with f(Psi) = g(z1) + 1/2 <D^2 f(0) (0,w), (0,w)>.
  Vec psi(const Vec& z1, const Vec& w) const;
  Mat remainder_hessian(const Vec& z1, const Vec& z2) const;  // H(z1, z2)
  Mat sqrt_series(const Mat& B) const;

  struct Residuals {
    double splitting = 0;
    double equivariance = 0;
    int samples = 0;
  };
  Residuals verify(int per_axis = 5, double frac = 0.5) const;

 private:
  FunctionSpec f_;
  int n1_, n2_;
  double radius_;
  Mat d22_, h0_;
  int p_ = 0, q_ = 0;
  bool orient_ = true;
};

struct LocalHomology {
  Betti plain;
  std::optional<Betti> invariant;
  int q = 0;
  bool orientation_preserved = true;
  int kernel_dim = 0;
  int reduced_dim = 0;
  double grid_h = 0;
  std::optional<Betti> morse_cross_check;
};
struct LocalHomologyOptions {
  double radius = 0.3;  // in kernel coordinates
  double h = -1;        // default radius / 8 (then checked at h/2)
  double a = -1, b = -1;
  bool check_isolation = true;
  bool morse_cross_check = false;
};
LocalHomology local_homology(const FunctionSpec& f, const LocalHomologyOptions& opt = {});

}  // namespace equimorse::lochom
