#include <boost/math/quadrature/gauss.hpp>
#include <cmath>

#include "equimorse/linalg.hpp"
#include "equimorse/lochom.hpp"

namespace equimorse::lochom {

namespace {

// Gauss-Legendre nodes and weights on [0, 1].
struct UnitRule {
  std::vector<double> x, w;
};

const UnitRule& unit_rule() {
  static const UnitRule r = [] {
    using G = boost::math::quadrature::gauss<double, 12>;
    UnitRule u;
    const auto& a = G::abscissa();
    const auto& w = G::weights();
    for (size_t i = 0; i < a.size(); ++i) {
      for (int s : {1, -1}) {
        if (a[i] == 0 && s < 0) continue;
        u.x.push_back(0.5 * (1 + s * a[i]));
        u.w.push_back(0.5 * w[i]);
      }
    }
    return u;
  }();
  return r;
}

Vec join(const Vec& a, const Vec& b) {
  Vec z(a.size() + b.size());
  z << a, b;
  return z;
}

}  // namespace

EquivariantSplit::EquivariantSplit(FunctionSpec f, int n1, double radius)
    : f_(std::move(f)), n1_(n1), n2_(f_.dim() - n1), radius_(radius) {
  if (n1_ < 0 || n2_ < 0) fail(ErrorKind::Shape, "split dimension out of range");
  const int d = f_.dim();
  Mat h = symmetrize(f_.f->hessian(Vec::Zero(d)));
  double off = h.block(0, n1_, n1_, n2_).norm();
  if (off > 1e-8) fail(ErrorKind::Validation, "Hessian at 0 does not block-split");
  d22_ = h.block(n1_, n1_, n2_, n2_);
  h0_ = 0.5 * d22_;
  if (n2_ > 0) {
    Inertia in = inertia(d22_);
    if (in.zero > 0) fail(ErrorKind::Degeneracy, "Hessian is degenerate on the normal factor");
    p_ = in.positive;
    q_ = in.negative;
  }
  if (f_.action) {
    const Mat& A = f_.action->A;
    if (A.block(0, n1_, n1_, n2_).norm() > 1e-12 || A.block(n1_, 0, n2_, n1_).norm() > 1e-12)
      fail(ErrorKind::Validation, "action does not preserve the splitting");
    if (q_ > 0) {
      Mat em = negative_eigenspace(d22_);
      Mat a2 = A.block(n1_, n1_, n2_, n2_);
      orient_ = (em.transpose() * a2 * em).determinant() > 0;
    }
  }
}

Vec EquivariantSplit::phi(const Vec& z1) const { return phi(z1, Vec::Zero(n2_)); }

Vec EquivariantSplit::phi(const Vec& z1, const Vec& guess) const {
  if (n2_ == 0) return Vec::Zero(0);
  Vec z2 = guess;
  for (int it = 0; it < 60; ++it) {
    Vec z = join(z1, z2);
    Vec g = f_.f->gradient(z).tail(n2_);
    if (g.norm() < 1e-15) return z2;
    Mat h = f_.f->hessian(z).bottomRightCorner(n2_, n2_);
    Eigen::FullPivLU<Mat> lu(h);
    if (!lu.isInvertible()) fail(ErrorKind::Radius, "normal Hessian singular; shrink the radius");
    Vec step = lu.solve(g);
    z2 -= step;
    if (step.norm() < 1e-16 * std::max(1.0, z2.norm())) return z2;
  }
  if (f_.f->gradient(join(z1, z2)).tail(n2_).norm() < 1e-11) return z2;
  fail(ErrorKind::Radius, "implicit solve for the normal coordinate did not converge");
}

double EquivariantSplit::g(const Vec& z1) const { return f_.f->value(join(z1, phi(z1))); }

Mat EquivariantSplit::remainder_hessian(const Vec& z1, const Vec& z2) const {
  const UnitRule& r = unit_rule();
  Vec ph = phi(z1);
  Mat h = Mat::Zero(n2_, n2_);
  for (size_t a = 0; a < r.x.size(); ++a) {
    double tau = r.x[a];
    for (size_t b = 0; b < r.x.size(); ++b) {
      Vec z = join(z1, ph + r.x[b] * tau * z2);
      h += r.w[a] * r.w[b] * tau * f_.f->hessian(z).bottomRightCorner(n2_, n2_);
    }
  }
  return symmetrize(h);
}

Mat EquivariantSplit::sqrt_series(const Mat& B) const {
  const int m = int(B.rows());
  Mat e = B - Mat::Identity(m, m);
  Eigen::EigenSolver<Mat> es(e, false);
  if (es.eigenvalues().cwiseAbs().maxCoeff() >= 1)
    fail(ErrorKind::Radius, "square-root series diverges (spectral radius of B - I >= 1)");
  Mat c = Mat::Identity(m, m), term = Mat::Identity(m, m);
  double coef = 1;
  for (int k = 1; k < 5000; ++k) {
    coef *= (0.5 - (k - 1)) / k;
    term = term * e;
    Mat t = coef * term;
    c += t;
    if (t.norm() < 1e-12) return c;
  }
  fail(ErrorKind::Radius, "square-root series did not converge");
}

Vec EquivariantSplit::psi(const Vec& z1, const Vec& w) const {
  if (n2_ == 0) return z1;
  Vec ph = phi(z1);
  Vec z2 = w;
  for (int it = 0; it < 200; ++it) {
    Mat h = remainder_hessian(z1, z2);
    Eigen::FullPivLU<Mat> lu(h);
    if (!lu.isInvertible()) fail(ErrorKind::Radius, "remainder Hessian singular; shrink the radius");
    Mat c = sqrt_series(lu.solve(h0_));
    Vec nz = c * w;
    double ch = (nz - z2).norm();
    z2 = nz;
    if (ch < 1e-15 * std::max(1.0, z2.norm())) break;
  }
  return join(z1, z2 + ph);
}

EquivariantSplit::Residuals EquivariantSplit::verify(int per_axis, double frac) const {
  Residuals r;
  const int d = n1_ + n2_;
  for (int shrink = 0; shrink < 4; ++shrink, frac *= 0.5) {
    r = Residuals{};
    try {
      long total = 1;
      for (int j = 0; j < d; ++j) total *= per_axis;
      const double s = frac * radius_;
      for (long idx = 0; idx < total; ++idx) {
        long t = idx;
        Vec z(d);
        for (int j = 0; j < d; ++j) {
          z[j] = per_axis == 1 ? 0 : -s + 2 * s * double(t % per_axis) / (per_axis - 1);
          t /= per_axis;
        }
        Vec z1 = z.head(n1_), w = z.tail(n2_);
        Vec p = psi(z1, w);
        double quad = 0.5 * w.dot(d22_ * w);
        r.splitting = std::max(r.splitting, std::abs(f_.f->value(p) - g(z1) - quad));
        if (f_.action) {
          const Mat& A = f_.action->A;
          Vec az = A * z;
          Vec pa = psi(az.head(n1_), az.tail(n2_));
          r.equivariance = std::max(r.equivariance, (pa - A * p).norm());
        }
        r.samples++;
      }
      return r;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Radius || shrink == 3) throw;
    }
  }
  return r;
}

}  // namespace equimorse::lochom
