#include "equimorse/dact.hpp"

#include <cmath>

#include "equimorse/linalg.hpp"

namespace equimorse::dact {

using hamflow::GeneratingFunction;
using hamflow::HamiltonianGerm;

Mat quadratic_action_hessian(int n, const std::vector<Mat>& d2s) {
  const int L = int(d2s.size());
  const int m = 2 * n * L;
  Mat h = Mat::Zero(m, m);
  auto X = [&](int i) { return 2 * n * (i % L); };
  auto Y = [&](int i) { return 2 * n * (i % L) + n; };
  for (int i = 0; i < L; ++i) {
    for (int j = 0; j < n; ++j) {
      int xi = X(i) + j, yn = Y(i + 1) + j, yi = Y(i) + j;
      h(xi, yn) += 1;
      h(yn, xi) += 1;
      h(xi, yi) -= 1;
      h(yi, xi) -= 1;
    }
    std::vector<int> idx;
    for (int j = 0; j < n; ++j) idx.push_back(X(i) + j);
    for (int j = 0; j < n; ++j) idx.push_back(Y(i + 1) + j);
    for (int p = 0; p < 2 * n; ++p)
      for (int q = 0; q < 2 * n; ++q) h(idx[p], idx[q]) += d2s[i](p, q);
  }
  return h;
}

Mat quadratic_action_hessian_from_steps(const std::vector<Mat>& steps) {
  if (steps.empty()) fail(ErrorKind::Validation, "need at least one step");
  const int n = int(steps[0].rows()) / 2;
  std::vector<Mat> d2s;
  for (auto& s : steps) d2s.push_back(hamflow::hessian_from_step(s));
  return quadratic_action_hessian(n, d2s);
}

IndexData quadratic_index(const Mat& hess) {
  Inertia in = inertia(hess);
  return {in.negative, in.zero};
}

DiscreteAction::DiscreteAction(HamiltonianGerm germ, int k, int N, double trust)
    : germ_(std::move(germ)), k_(k), N_(N) {
  if (k < 1 || N < 1) fail(ErrorKind::Validation, "k and N must be positive");
  if (!hamflow::adapted_N(germ_, N_))
    fail(ErrorKind::Configuration, "N = " + std::to_string(N_) + " is not adapted to the Hamiltonian");
  for (int i = 0; i < N_; ++i) gfs_.emplace_back(germ_, double(i) / N_, double(i + 1) / N_, trust);
  std::vector<Mat> d2s;
  for (int i = 0; i < sites(); ++i) d2s.push_back(gf(i).hessian_at_zero());
  hess0_ = quadratic_action_hessian(n(), d2s);
}

Vec DiscreteAction::x(const Vec& z, int i) const {
  i = ((i % sites()) + sites()) % sites();
  return z.segment(2 * n() * i, n());
}

Vec DiscreteAction::y(const Vec& z, int i) const {
  i = ((i % sites()) + sites()) % sites();
  return z.segment(2 * n() * i + n(), n());
}

double DiscreteAction::value(const Vec& z) const {
  if (z.size() != dim()) fail(ErrorKind::Shape, "discrete action argument has wrong dimension");
  double s = 0;
  for (int i = 0; i < sites(); ++i) {
    Vec xi = x(z, i), yn = y(z, i + 1);
    s += xi.dot(yn - y(z, i));
    if (!germ_.is_zero()) s += gf(i).eval(xi, yn, hamflow::SValueMethod::Trajectory).S;
  }
  return s;
}

Vec DiscreteAction::gradient(const Vec& z) const {
  if (z.size() != dim()) fail(ErrorKind::Shape, "discrete action argument has wrong dimension");
  const int nn = n(), L = sites();
  Vec g = Vec::Zero(dim());
  for (int i = 0; i < L; ++i) {
    Vec xi = x(z, i), yn = y(z, i + 1);
    int ip = (i + 1) % L;
    g.segment(2 * nn * i, nn) += yn - y(z, i);
    g.segment(2 * nn * ip + nn, nn) += xi;
    g.segment(2 * nn * i + nn, nn) -= xi;
    if (germ_.is_zero()) continue;
    auto e = gf(i).eval_gradient(xi, yn);
    g.segment(2 * nn * i, nn) += e.d1;
    g.segment(2 * nn * ip + nn, nn) += e.d2;
  }
  return g;
}

Mat DiscreteAction::hessian(const Vec& z) const {
  if (z.size() != dim()) fail(ErrorKind::Shape, "discrete action argument has wrong dimension");
  std::vector<Mat> d2s;
  for (int i = 0; i < sites(); ++i) {
    if (germ_.is_zero()) d2s.push_back(Mat::Zero(2 * n(), 2 * n()));
    else d2s.push_back(gf(i).hessian(x(z, i), y(z, i + 1)));
  }
  return quadratic_action_hessian(n(), d2s);
}

Mat DiscreteAction::hessian_at_zero() const { return hess0_; }

Mat site_shift_matrix(int n, int L, int by) {
  const int b = 2 * n;
  Mat p = Mat::Zero(b * L, b * L);
  for (int j = 0; j < L; ++j) {
    int src = ((j - by) % L + L) % L;
    p.block(b * j, b * src, b, b) = Mat::Identity(b, b);
  }
  return p;
}

Vec DiscreteAction::shift(const Vec& z) const {
  const int b = 2 * n(), L = sites();
  Vec out(z.size());
  for (int j = 0; j < L; ++j) {
    int src = ((j - N_) % L + L) % L;
    out.segment(b * j, b) = z.segment(b * src, b);
  }
  return out;
}

Mat DiscreteAction::shift_matrix() const { return site_shift_matrix(n(), sites(), N_); }

IndexData DiscreteAction::index_at_zero() const { return quadratic_index(hess0_); }

DiagonalSplit diagonal_split(const HamiltonianGerm& g, int m, int k, int steps) {
  if (m < 1 || k < 1 || steps < 1) fail(ErrorKind::Validation, "m, k and steps must be positive");
  DiscreteAction da(g, m * k, steps);
  const int n = g.n();
  const int block = 2 * n * m * steps;  // one copy of R^{2n m steps}
  const int D = block * k;
  Mat h = da.hessian_at_zero();
  DiagonalSplit out;
  out.ambient_dim = D;
  if (k == 1) return out;
  // Orthonormal bases of the diagonal and its complement.
  Mat qd = Mat::Zero(D, block);
  for (int c = 0; c < k; ++c) qd.block(block * c, 0, block, block) = Mat::Identity(block, block) / std::sqrt(double(k));
  Mat proj = Mat::Identity(D, D) - qd * qd.transpose();
  Eigen::SelfAdjointEigenSolver<Mat> es(proj);
  Mat qp = es.eigenvectors().rightCols(D - block);  // eigenvalue 1 part
  out.off_block_norm = (qd.transpose() * h * qp).norm();
  if (out.off_block_norm > 1e-8) fail(ErrorKind::Validation, "Hessian does not split along the diagonal");
  Mat bp = qp.transpose() * h * qp;
  Inertia in = inertia(bp);
  if (in.zero > 0) fail(ErrorKind::Degeneracy, "complement block is singular: k is not admissible");
  out.dim_e_minus = in.negative;
  Mat em = negative_eigenspace(bp);
  if (em.cols() == 0) return out;
  Mat tau = site_shift_matrix(n, m * k * steps, steps);
  Mat v = qp * em;
  double det = (v.transpose() * tau * v).determinant();
  out.orientation_preserved = det > 0;
  return out;
}

bool auxiliary_shift_preserves_orientation(int block, int k) {
  // Coordinates (xi_1..xi_k, zeta_1..zeta_k), each of size `block`.
  const int D = 2 * block * k;
  Mat q = Mat::Zero(D, D);
  for (int i = 0; i < block * k; ++i) {
    q(i, block * k + i) = 0.5;
    q(block * k + i, i) = 0.5;
  }
  Mat p = Mat::Zero(D, D);
  for (int c = 0; c < k; ++c) {
    int dst = (c + 1) % k;
    for (int half = 0; half < 2; ++half)
      p.block(half * block * k + dst * block, half * block * k + c * block, block, block) = Mat::Identity(block, block);
  }
  Mat v = negative_eigenspace(q);
  return (v.transpose() * p * v).determinant() > 0;
}

InflationShift inflation_index_shift(const HamiltonianGerm& g, int k, int N) {
  for (int m = N; m <= N + 2; ++m)
    if (!hamflow::adapted_N(g, m)) fail(ErrorKind::Configuration, "N = " + std::to_string(m) + " is not adapted");
  IndexData a = DiscreteAction(g, k, N).index_at_zero();
  IndexData b = DiscreteAction(g, k, N + 1).index_at_zero();
  IndexData c = DiscreteAction(g, k, N + 2).index_at_zero();
  InflationShift out;
  out.shift1 = b.index - a.index;
  out.shift2 = c.index - a.index;
  out.nullity_N = a.nullity;
  out.nullity_N1 = b.nullity;
  out.nullity_N2 = c.nullity;
  // The N+2 comparison adds xi^1 zeta^1 + xi^2 zeta^2 per copy: blocks of 2n.
  out.auxiliary_orientation_preserved = auxiliary_shift_preserves_orientation(2 * g.n(), k);
  return out;
}

PeriodicPoints find_periodic_points(const DiscreteAction& da, const std::vector<Vec>& seeds) {
  PeriodicPoints out;
  const int L = da.sites(), b = 2 * da.n();
  for (size_t s = 0; s < seeds.size(); ++s) {
    Vec z = seeds[s];
    if (z.size() != da.dim()) {
      out.failures.push_back({int(s), "seed has wrong dimension"});
      continue;
    }
    double res = 0;
    bool ok = false;
    std::string why = "no convergence in 50 iterations";
    try {
      for (int it = 0; it < 50; ++it) {
        Vec g = da.gradient(z);
        res = g.norm();
        if (res < 1e-10) {
          ok = true;
          break;
        }
        Mat h = da.hessian(z);
        Eigen::CompleteOrthogonalDecomposition<Mat> cod(h);
        cod.setThreshold(1e-10);
        z -= cod.solve(g);
      }
    } catch (const Error& e) {
      why = e.what();
      ok = false;
    }
    if (!ok) {
      out.failures.push_back({int(s), why});
      continue;
    }
    bool dup = false;
    for (auto& p : out.points) {
      Vec w = z;
      for (int j = 0; j < da.k(); ++j) {
        if ((w - p.z).norm() < 1e-6) dup = true;
        w = da.shift(w);
      }
      if (dup) break;
    }
    if (dup) continue;
    CriticalPoint cp;
    cp.z = z;
    cp.residual = res;
    for (int i = 0; i < L; ++i) cp.orbit.push_back(z.segment(b * i, b));
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(da.hessian(z)), Eigen::EigenvaluesOnly);
    const Vec& ev = es.eigenvalues();
    double thr = tolerances().eig_rel * std::max(1.0, ev.cwiseAbs().maxCoeff());
    for (int i = 0; i < ev.size(); ++i) {
      if (ev[i] < -thr) cp.morse_index++;
      else if (std::abs(ev[i]) <= thr) cp.nullity++;
    }
    Vec w = da.shift(z);
    cp.orbit_size = 1;
    while (cp.orbit_size < da.k() && (w - z).norm() >= 1e-6) {
      cp.orbit_size++;
      w = da.shift(w);
    }
    out.points.push_back(cp);
  }
  return out;
}

}  // namespace equimorse::dact
