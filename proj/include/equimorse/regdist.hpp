#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "equimorse/field.hpp"
#include "json.hpp"

namespace equimorse::regdist {

// {x : |(I - B B^T)(x - c)| <= r}. Empty basis gives a ball (a point if r = 0);
// c = 0, r = 0 gives a linear subspace.
struct Tube {
  Vec center;
  Mat basis;  // orthonormal columns
  double radius = 0;
  double dist(const Vec& x) const;
  double dist_box(const Vec& lo, const Vec& hi) const;
  bool contains_box(const Vec& lo, const Vec& hi) const;
};

class ClosedSet {
 public:
  explicit ClosedSet(int N = 1) : N_(N) {}
  int dim() const { return N_; }
  bool empty() const { return parts_.empty(); }
  const std::vector<Tube>& parts() const { return parts_; }

  ClosedSet& add(Tube t);
  ClosedSet& add_point(const Vec& p);
  ClosedSet& add_ball(const Vec& c, double r);
  ClosedSet& add_subspace(const Mat& basis);
  ClosedSet& add_tube(const Mat& basis, double r);
  ClosedSet united(const ClosedSet& o) const;

  double dist(const Vec& x) const;  // +inf when empty
  double dist_box(const Vec& lo, const Vec& hi) const;
  bool contains(const Vec& x) const { return dist(x) <= 1e-12; }
  bool contains_box(const Vec& lo, const Vec& hi) const;
  // Samples dist(Ax) = dist(x); throws Validation.
  void check_invariant(const CyclicAction& a, double radius, int samples = 200, unsigned seed = 0) const;

  static ClosedSet from_json(const nlohmann::json& j);

 private:
  int N_;
  std::vector<Tube> parts_;
};

// Dyadic cube of the box [-L, L]^N: integer corner in units of
// 2L / 2^max_depth, side 2^(max_depth - depth) units.
struct Cube {
  std::array<long, 3> corner{0, 0, 0};
  int depth = 0;
};

struct WhitneyReport {
  long cubes = 0;
  bool coverage = true;        // (a) cube volume + resolved-out volume = box volume
  long unresolved_cells = 0;   // max-depth cells next to X (expected accumulation)
  long overlaps = 0;           // (b)
  long ratio_violations = 0;   // (c), excluding top-level cubes far from X
  long top_level_far = 0;
  long neighbour_violations = 0;  // (d)
  int max_touching = 0;           // (e) bound 12^N
  bool touching_ok = true;
  double min_ratio = 0, max_ratio = 0;  // dist(Q,X)/diam Q
  bool ok() const {
    return coverage && overlaps == 0 && ratio_violations == 0 && neighbour_violations == 0 && touching_ok;
  }
};

class WhitneyDecomposition {
 public:
  WhitneyDecomposition(const ClosedSet& X, double L, int min_depth, int max_depth);

  int dim() const { return N_; }
  double half_width() const { return L_; }
  int max_depth() const { return max_depth_; }
  const std::vector<Cube>& cubes() const { return cubes_; }
  double side(const Cube& c) const;
  double diam(const Cube& c) const { return side(c) * std::sqrt(double(N_)); }
  Vec lower(const Cube& c) const;
  Vec center(const Cube& c) const;
  // Indices of cubes whose dilated cube Q* contains x.
  std::vector<int> star_containing(const Vec& x) const;
  std::vector<int> touching(int cube) const;
  double cube_dist(int i) const { return cube_dist_[i]; }  // dist(closed Q, X)
  WhitneyReport check() const;
  std::vector<std::string> warnings() const { return warnings_; }

 private:
  struct Node {
    int child = -1;  // first of 2^N children
    int cube = -1;
    char state = 0;  // 0 internal, 1 cube, 2 inside X, 3 unresolved
  };
  void build();
  std::array<long, 3> extent(const std::array<long, 3>& c, int depth, Vec& lo, Vec& hi) const;

  ClosedSet X_;
  int N_;
  double L_;
  int min_depth_, max_depth_;
  long unit_count_;
  std::vector<Node> nodes_;
  std::vector<Cube> cubes_;
  std::vector<char> top_far_;
  std::vector<double> cube_dist_;
  long inside_volume_ = 0, unresolved_volume_ = 0, unresolved_cells_ = 0;
  std::vector<std::string> warnings_;
};

WhitneyDecomposition whitney_decompose(const ClosedSet& X, double L, int min_depth, int max_depth);

// Product bump: 1 on the closed unit cube, support inside the 9/8 dilation.
double cube_bump(const Vec& t);

// Invariant regularized distance to X = Y u E that equals dist(., E) near E \ Y.
class RegularizedDistance {
 public:
  RegularizedDistance(ClosedSet Y, Mat E, std::optional<CyclicAction> A, double L, int max_depth = -1);

  struct Eval {
    double value = 0;
    bool in_x = false;
    bool clamped = false;
    double phi = 0;
    int stars = 0;
  };
  Eval eval_hat(const Vec& x) const;  // before group averaging
  double value(const Vec& x) const;
  Vec gradient(const Vec& x, double h = 1e-4) const;
  Mat hessian(const Vec& x, double h = 1e-4) const;

  double dist_x(const Vec& x) const { return X_.dist(x); }
  double dist_e(const Vec& x) const;
  double dist_y(const Vec& x) const { return Y_.dist(x); }
  bool in_coincidence_region(const Vec& x) const;
  const WhitneyDecomposition& decomposition() const { return *wd_; }
  int in_fu() const;
  int dim() const { return N_; }
  double half_width() const { return L_; }

 private:
  int N_;
  ClosedSet Y_, X_;
  Mat E_, PE_;
  std::optional<CyclicAction> A_;
  double L_;
  std::unique_ptr<WhitneyDecomposition> wd_;
  std::vector<char> fu_;
};

// Theoretical bounds for the pointwise comparison with dist(., X).
double lower_constant(int N);
double upper_constant(int N);

}  // namespace equimorse::regdist
