#include <cmath>

#include "equimorse/linalg.hpp"
#include "equimorse/lochom.hpp"

namespace equimorse::lochom {

namespace {

// Orthonormal basis change U of the kernel making U^T K U a signed
// permutation; throws Unsupported otherwise.
Mat signed_permutation_frame(const Mat& K, Mat& rounded) {
  const int m = int(K.rows());
  Eigen::RealSchur<Mat> rs(K);
  Mat T = rs.matrixT();
  Mat U = rs.matrixU();
  rounded = Mat::Zero(m, m);
  for (int i = 0; i < m;) {
    bool block = i + 1 < m && std::abs(T(i + 1, i)) > 1e-8;
    if (!block) {
      if (std::abs(std::abs(T(i, i)) - 1) > 1e-8)
        fail(ErrorKind::Unsupported, "kernel action is not orthogonal with eigenvalues +-1");
      rounded(i, i) = T(i, i) > 0 ? 1 : -1;
      i += 1;
      continue;
    }
    Mat b = T.block(i, i, 2, 2);
    if (std::abs(b(0, 0)) > 1e-8 || std::abs(b(1, 1)) > 1e-8 || std::abs(std::abs(b(0, 1)) - 1) > 1e-8 ||
        std::abs(b(0, 1) + b(1, 0)) > 1e-8)
      fail(ErrorKind::Unsupported, "kernel action has a rotation block other than a quarter turn");
    rounded(i, i + 1) = b(0, 1) > 0 ? 1 : -1;
    rounded(i + 1, i) = -rounded(i, i + 1);
    i += 2;
  }
  if ((U.transpose() * K * U - rounded).norm() > 1e-8)
    fail(ErrorKind::Unsupported, "kernel action could not be brought to signed-permutation form");
  return U;
}

}  // namespace

LocalHomology local_homology(const FunctionSpec& f, const LocalHomologyOptions& opt) {
  const int d = f.dim();
  LocalHomology out;
  Mat H = symmetrize(f.f->hessian(Vec::Zero(d)));
  Inertia in = inertia(H, tolerances().eig_rel);
  out.kernel_dim = in.zero;
  if (in.zero > 3) fail(ErrorKind::Unsupported, "kernel dimension " + std::to_string(in.zero) + " exceeds 3");

  Eigen::SelfAdjointEigenSolver<Mat> es(H);
  const Vec& ev = es.eigenvalues();
  const double thr = tolerances().eig_rel * std::max(1.0, ev.cwiseAbs().maxCoeff());
  std::vector<int> ker, rest;
  for (int i = 0; i < d; ++i) (std::abs(ev[i]) <= thr ? ker : rest).push_back(i);
  const int m = int(ker.size());
  Mat Q1(d, m), Q2(d, d - m);
  for (int i = 0; i < m; ++i) Q1.col(i) = es.eigenvectors().col(ker[i]);
  for (int i = 0; i < d - m; ++i) Q2.col(i) = es.eigenvectors().col(rest[i]);

  Mat kernel_action;
  std::optional<CyclicAction> act;
  if (f.action) {
    const Mat& A = f.action->A;
    if (m > 0 && (Q2.transpose() * A * Q1).norm() > 1e-8)
      fail(ErrorKind::Validation, "action does not preserve the Hessian kernel");
    if (m > 0) Q1 = Q1 * signed_permutation_frame(Q1.transpose() * A * Q1, kernel_action);
  }
  Mat Q(d, d);
  Q << Q1, Q2;
  if (f.action) {
    CyclicAction ca;
    ca.k = f.action->k;
    ca.A = Q.transpose() * f.action->A * Q;
    if (m > 0) {
      ca.A.topLeftCorner(m, m) = kernel_action;
      ca.A.topRightCorner(m, d - m).setZero();
      ca.A.bottomLeftCorner(d - m, m).setZero();
    }
    act = ca;
  }

  auto base = f.f;
  auto F = std::make_shared<LambdaField>(
      d, [base, Q](const Vec& z) { return base->value(Q * z); },
      [base, Q](const Vec& z) { return Vec(Q.transpose() * base->gradient(Q * z)); },
      [base, Q](const Vec& z) { return Mat(Q.transpose() * base->hessian(Q * z) * Q); });
  FunctionSpec Fs{F, act};
  auto sp = std::make_shared<EquivariantSplit>(Fs, m, opt.radius);
  out.q = sp->negative();
  out.orientation_preserved = sp->orientation_preserved();
  out.reduced_dim = m;

  if (m == 0) {
    out.plain = {{out.q, 1}};
    if (f.action) out.invariant = out.orientation_preserved ? Betti{{out.q, 1}} : Betti{};
    return out;
  }

  const int n2 = d - m;
  auto G = std::make_shared<LambdaField>(
      m, [sp](const Vec& z1) { return sp->g(z1); },
      [F, sp, m](const Vec& z1) {
        Vec z(z1.size() + sp->n2());
        z << z1, sp->phi(z1);
        return Vec(F->gradient(z).head(m));
      },
      [F, sp, m, n2](const Vec& z1) {
        Vec z(z1.size() + n2);
        z << z1, sp->phi(z1);
        Mat h = F->hessian(z);
        if (n2 == 0) return h;
        Mat s = h.topLeftCorner(m, m) -
                h.topRightCorner(m, n2) * h.bottomRightCorner(n2, n2).fullPivLu().solve(h.bottomLeftCorner(n2, m));
        return symmetrize(s);
      });
  FunctionSpec gs{G, std::nullopt};
  if (f.action) gs.action = CyclicAction{kernel_action, f.action->k};

  GMParams gp;
  gp.radius = opt.radius;
  gp.h = opt.h > 0 ? opt.h : opt.radius / 8;
  gp.a = opt.a;
  gp.b = opt.b;
  gp.check_isolation = opt.check_isolation;
  CubicalPair pair = gromoll_meyer_pair(gs, gp);
  out.grid_h = pair.params.h;
  out.plain = exactalg::shift_betti(relative_homology(pair, false).betti, out.q);
  if (f.action) {
    pair.action->flip = out.orientation_preserved ? 1 : -1;
    out.invariant = exactalg::shift_betti(relative_homology(pair, true).betti, out.q);
  }

  if (opt.morse_cross_check && d == 2) {
    MorseOptions mo;
    mo.radius = opt.radius;
    MorseComplex2D mc = morse_complex_2d(f, mo);
    out.morse_cross_check = exactalg::homology_betti(mc.cx);
    if (*out.morse_cross_check != out.plain)
      fail(ErrorKind::Pipeline, "Morse complex and cubical pair disagree");
  }
  return out;
}

}  // namespace equimorse::lochom
