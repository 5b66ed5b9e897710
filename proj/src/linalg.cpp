#include "equimorse/linalg.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace equimorse {

Inertia inertia(const Mat& s, double rel) {
  if (rel < 0) rel = tolerances().eig_rel;
  Inertia out;
  if (s.rows() == 0) return out;
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(s), Eigen::EigenvaluesOnly);
  const Vec& ev = es.eigenvalues();
  double rho = ev.cwiseAbs().maxCoeff();
  double thr = rel * std::max(1.0, rho);
  for (int i = 0; i < ev.size(); ++i) {
    double a = std::abs(ev[i]);
    if (a > thr && a < 10 * thr) {
      std::ostringstream os;
      os << "eigenvalue " << ev[i] << " lies between the zero threshold " << thr << " and 10x threshold";
      fail(ErrorKind::Ambiguity, os.str());
    }
    if (a <= thr) out.zero++;
    else if (ev[i] < 0) out.negative++;
    else out.positive++;
  }
  return out;
}

int kernel_dim(const Mat& a, double rel) {
  if (rel < 0) rel = tolerances().eig_rel;
  if (a.cols() == 0) return 0;
  if (a.rows() == 0) return int(a.cols());
  Eigen::JacobiSVD<Mat> svd(a);
  const Vec& sv = svd.singularValues();
  double thr = rel * std::max(1.0, sv.size() ? sv[0] : 0.0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > thr) rank++;
  return int(a.cols()) - rank;
}

Mat kernel_basis(const Mat& a, double rel) {
  if (rel < 0) rel = tolerances().eig_rel;
  const int c = int(a.cols());
  if (a.rows() == 0) return Mat::Identity(c, c);
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
  const Vec& sv = svd.singularValues();
  double thr = rel * std::max(1.0, sv.size() ? sv[0] : 0.0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > thr) rank++;
  return svd.matrixV().rightCols(c - rank);
}

Mat negative_eigenspace(const Mat& s) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(s));
  const Vec& ev = es.eigenvalues();
  double thr = tolerances().eig_rel * std::max(1.0, ev.size() ? ev.cwiseAbs().maxCoeff() : 0.0);
  int neg = 0;
  while (neg < ev.size() && ev[neg] < -thr) neg++;
  return es.eigenvectors().leftCols(neg);
}

double symplectic_residual(const Mat& m) {
  int n = int(m.rows()) / 2;
  Mat j = J0(n);
  return (m.transpose() * j * m - j).cwiseAbs().maxCoeff();
}

Mat symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

double smooth_step(double u) {
  if (u <= 0) return 0;
  if (u >= 1) return 1;
  double a = std::exp(-1 / u), b = std::exp(-1 / (1 - u));
  return a / (a + b);
}

long gcd_l(long a, long b) { return std::gcd(a, b); }
long lcm_l(long a, long b) { return std::lcm(a, b); }

std::vector<int> divisors(int n) {
  std::vector<int> d;
  for (int i = 1; i <= n; ++i)
    if (n % i == 0) d.push_back(i);
  return d;
}

int totient(int n) {
  int c = 0;
  for (int l = 1; l <= n; ++l)
    if (std::gcd(l, n) == 1) c++;
  return c;
}

}  // namespace equimorse
