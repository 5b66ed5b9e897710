#pragma once

#include <gmpxx.h>

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace equimorse::exactalg {

using Q = mpq_class;
using Betti = std::map<int, int>;  // degree -> rank, zero entries omitted

Q parse_rational(const std::string& s);
std::string format_rational(const Q& q);

class QMatrix {
 public:
  QMatrix() = default;
  QMatrix(int rows, int cols) : rows_(rows), cols_(cols), a_(size_t(rows) * cols) {}
  static QMatrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Q& operator()(int i, int j) { return a_[size_t(i) * cols_ + j]; }
  const Q& operator()(int i, int j) const { return a_[size_t(i) * cols_ + j]; }

  QMatrix operator*(const QMatrix& o) const;
  QMatrix operator+(const QMatrix& o) const;
  QMatrix operator-() const;
  QMatrix scaled(const Q& s) const;
  bool operator==(const QMatrix& o) const;
  bool is_zero() const;
  bool is_signed_permutation() const;
  QMatrix columns(const std::vector<int>& idx) const;
  // [this | o]
  QMatrix hcat(const QMatrix& o) const;

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<Q> a_;
};

int rank(const QMatrix& m);
// Indices of pivot columns after row reduction (a basis of the column space).
std::vector<int> pivot_columns(const QMatrix& m);
// Basis of ker m as columns.
QMatrix kernel(const QMatrix& m);

// Graded chain complex over Q with an optional Z_k action by signed
// permutation matrices. Validated at construction.
class ChainComplex {
 public:
  using Gens = std::map<int, std::vector<std::string>>;

  ChainComplex() = default;
  // boundary[j] : C_j -> C_{j-1}, shape dim(j-1) x dim(j). Missing entries are zero.
  ChainComplex(Gens gens, std::map<int, QMatrix> boundary);
  ChainComplex(Gens gens, std::map<int, QMatrix> boundary, std::map<int, QMatrix> action, int k);

  std::vector<int> degrees() const;
  int dim(int j) const;
  const std::vector<std::string>& generators(int j) const;
  const Gens& all_generators() const { return gens_; }
  QMatrix boundary(int j) const;
  bool has_action() const { return has_action_; }
  int order() const { return k_; }
  QMatrix action(int j) const;

 private:
  void validate() const;
  Gens gens_;
  std::map<int, QMatrix> d_;
  std::map<int, QMatrix> t_;
  bool has_action_ = false;
  int k_ = 1;
};

Betti homology_betti(const ChainComplex& cx);
Betti invariant_homology_betti(const ChainComplex& cx);
long euler_characteristic(const Betti& b);
ChainComplex tensor_with_shift(const ChainComplex& cx, int mu, bool sign_flip);
Betti shift_betti(const Betti& b, int s);
int total_rank(const Betti& b);

ChainComplex complex_from_json(const nlohmann::json& j);
nlohmann::json complex_to_json(const ChainComplex& cx);
nlohmann::json betti_to_json(const Betti& b);
Betti betti_from_json(const nlohmann::json& j);

// Sparse cellular complexes (cubical grids) with a signed cell permutation.
struct SparseComplex {
  std::vector<int> dim;                                   // per cell
  std::vector<std::vector<std::pair<int, Q>>> boundary;   // per cell
  int size() const { return int(dim.size()); }
};

struct SignedPerm {
  std::vector<int> image;
  std::vector<int> sign;
};

// Betti numbers by pairwise elimination (reduction) over Q.
Betti sparse_betti(const SparseComplex& cx);
// Subcomplex spanned by orbit sums under the signed permutation of order k.
SparseComplex invariant_subcomplex(const SparseComplex& cx, const SignedPerm& act, int k);
// Dense conversion, for cross-checks on small complexes.
ChainComplex to_dense(const SparseComplex& cx, const SignedPerm* act = nullptr, int k = 1);

}  // namespace equimorse::exactalg
