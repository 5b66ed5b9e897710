#pragma once

#include <optional>
#include <vector>

#include "equimorse/common.hpp"
#include "equimorse/hamflow.hpp"
#include "json.hpp"

namespace equimorse::spindex {

class SymplecticPath {
 public:
  SymplecticPath(int n, std::vector<double> t, std::vector<Mat> m);

  // Linearized flow of a germ on [0, T], `per_unit` samples per unit time.
  // Uses M(t + 1) = M(t) M(1). The germ is kept for refinement.
  static SymplecticPath from_germ(const hamflow::HamiltonianGerm& g, double T, int per_unit = 64);
  static SymplecticPath rotation(double alpha, double T, int per_unit = 64);
  static SymplecticPath constant(int n, double T);
  static SymplecticPath from_json(const nlohmann::json& j);

  int n() const { return n_; }
  double T() const { return t_.back(); }
  const std::vector<double>& times() const { return t_; }
  const std::vector<Mat>& mats() const { return m_; }
  const Mat& end() const { return m_.back(); }
  bool refinable() const { return source_.has_value() || alpha_.has_value(); }
  SymplecticPath refined() const;

  // Samples of this path followed by o (o(t) * this(T)).
  SymplecticPath concatenate(const SymplecticPath& o) const;
  SymplecticPath reversed() const;  // follows the loop backwards, M(T-t) M(T)^{-1}
  int per_unit() const { return per_unit_; }

 private:
  int n_;
  std::vector<double> t_;
  std::vector<Mat> m_;
  std::optional<hamflow::HamiltonianGerm> source_;
  std::optional<double> alpha_;
  int per_unit_ = 0;
};

// Symplectic direct sum in (x1, x2, y1, y2) ordering.
Mat symplectic_sum(const Mat& a, const Mat& b);
SymplecticPath direct_sum(const SymplecticPath& p, const SymplecticPath& q);

int cz_index(const SymplecticPath& p);
// Spectral-flow route; endpoint must be nondegenerate.
int cz_spectral(const SymplecticPath& p);
// Discrete-action route (index of the quadratic action minus nL).
int cz_action(const SymplecticPath& p);

struct MeanIndex {
  double delta = 0;
  int m_final = 0;
  double tolerance = 0;
  std::vector<std::pair<int, int>> trace;  // (m, CZ(m))
};
MeanIndex mean_index(const hamflow::HamiltonianGerm& g);

int nullity(const Mat& m);

struct IterationClass {
  int k = 1;
  bool admissible = true;
  bool good = true;
};
IterationClass classify_iteration(const Mat& m, int k);

int maslov_loop_index(const SymplecticPath& loop);

}  // namespace equimorse::spindex
