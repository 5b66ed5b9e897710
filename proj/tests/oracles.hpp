#pragma once

// Floating-point reference computations used as independent checks.

#include <Eigen/Dense>
#include <cmath>
#include <map>

#include "equimorse/exactalg.hpp"

namespace oracle {

inline Eigen::MatrixXd to_double(const equimorse::exactalg::QMatrix& m) {
  Eigen::MatrixXd d(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) d(i, j) = m(i, j).get_d();
  return d;
}

inline int svd_rank(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const double tol = 1e-9 * std::max(1.0, svd.singularValues()(0));
  int r = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i) r += svd.singularValues()(i) > tol;
  return r;
}

// Orthonormal basis of the image of the averaging operator (1/k) sum T^i.
inline Eigen::MatrixXd invariant_basis(const Eigen::MatrixXd& T, int k) {
  const int n = int(T.rows());
  Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(n, n), p = Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < k; ++i) {
    avg += p;
    p = T * p;
  }
  avg /= k;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(avg, Eigen::ComputeFullU);
  const int r = svd_rank(avg);
  return svd.matrixU().leftCols(r);
}

// Betti numbers from SVD ranks; with `invariant`, of the complex restricted
// to invariant chains (orthonormal bases, differential projected).
inline std::map<int, int> betti(const equimorse::exactalg::ChainComplex& cx, bool invariant) {
  std::map<int, Eigen::MatrixXd> basis;
  for (int j : cx.degrees()) {
    const int n = cx.dim(j);
    basis[j] = invariant ? invariant_basis(to_double(cx.action(j)), cx.order()) : Eigen::MatrixXd::Identity(n, n);
  }
  auto restricted = [&](int j) -> Eigen::MatrixXd {
    if (!basis.count(j) || !basis.count(j - 1)) return Eigen::MatrixXd();
    if (cx.dim(j) == 0 || cx.dim(j - 1) == 0) return Eigen::MatrixXd();
    return basis[j - 1].transpose() * to_double(cx.boundary(j)) * basis[j];
  };
  std::map<int, int> out;
  for (int j : cx.degrees()) {
    const int c = int(basis[j].cols());
    const int b = c - svd_rank(restricted(j)) - svd_rank(restricted(j + 1));
    if (b) out[j] = b;
  }
  return out;
}

}  // namespace oracle
