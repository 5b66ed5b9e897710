#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cmath>

#include "equimorse/lochom.hpp"

namespace equimorse::lochom {

namespace odeint = boost::numeric::odeint;
using exactalg::Q;
using exactalg::QMatrix;

namespace {

constexpr double kShotOffset = 1e-4;
constexpr double kSaddleStop = 1e-6;
constexpr double kExtremumStop = 1e-4;

Vec canonical(Vec v) {
  v.normalize();
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > 1e-12) {
      if (v[i] < 0) v = -v;
      break;
    }
  }
  return v;
}

}  // namespace

std::vector<CriticalPoint2D> find_critical_points_2d(const Field& f, double radius, int per) {
  if (f.dim() != 2) fail(ErrorKind::Shape, "morse complex requires a function on R^2");
  std::vector<CriticalPoint2D> out;
  for (int a = 0; a < per; ++a) {
    for (int b = 0; b < per; ++b) {
      Vec z(2);
      z << -radius + 2 * radius * (a + 0.5) / per, -radius + 2 * radius * (b + 0.5) / per;
      if (z.norm() > radius) continue;
      bool ok = false;
      for (int it = 0; it < 60; ++it) {
        Vec g = f.gradient(z);
        if (g.norm() < 1e-12) {
          ok = true;
          break;
        }
        Eigen::FullPivLU<Mat> lu(f.hessian(z));
        if (!lu.isInvertible()) break;
        Vec step = lu.solve(g);
        if (step.norm() > 0.5 * radius) step *= 0.5 * radius / step.norm();
        z -= step;
        if (z.norm() > 1.5 * radius) break;
      }
      if (!ok && f.gradient(z).norm() < 1e-10) ok = true;
      if (!ok || z.norm() > radius) continue;
      bool dup = false;
      for (auto& c : out) dup = dup || (c.p - z).norm() < 1e-6;
      if (dup) continue;
      CriticalPoint2D c;
      c.p = z;
      c.value = f.value(z);
      Eigen::SelfAdjointEigenSolver<Mat> es(f.hessian(z));
      const Vec& ev = es.eigenvalues();
      if (ev.cwiseAbs().minCoeff() <= 1e-6)
        fail(ErrorKind::Validation, "critical point is not hyperbolic; the function is not Morse on U");
      c.index = int((ev.array() < 0).count());
      if (c.index == 1) {
        c.eu = canonical(es.eigenvectors().col(0));
        c.es = canonical(es.eigenvectors().col(1));
      }
      out.push_back(c);
    }
  }
  std::sort(out.begin(), out.end(), [](const CriticalPoint2D& x, const CriticalPoint2D& y) {
    if (x.index != y.index) return x.index < y.index;
    if (std::abs(x.p[0] - y.p[0]) > 1e-9) return x.p[0] < y.p[0];
    return x.p[1] < y.p[1];
  });
  int cnt[3] = {0, 0, 0};
  const char* kind[3] = {"min", "saddle", "max"};
  for (auto& c : out) c.name = std::string(kind[c.index]) + std::to_string(cnt[c.index]++);
  return out;
}

Shot shoot(const Field& f, const Vec& start, bool descend, const std::vector<CriticalPoint2D>& crit, double radius,
           int exclude) {
  using State = std::vector<double>;
  const double sgn = descend ? -1.0 : 1.0;
  auto sys = [&](const State& s, State& ds, double) {
    Vec z(2);
    z << s[0], s[1];
    Vec g = f.gradient(z);
    ds[0] = sgn * g[0];
    ds[1] = sgn * g[1];
  };
  auto stepper = odeint::make_controlled(1e-10, 1e-10, odeint::runge_kutta_dopri5<State>());
  State s = {start[0], start[1]};
  double t = 0, dt = 1e-3;
  Shot out;
  for (long step = 0; step < 2000000 && t < 1e5; ++step) {
    if (stepper.try_step(sys, s, t, dt) != odeint::success) continue;
    Vec z(2);
    z << s[0], s[1];
    out.last = z;
    if (!z.allFinite()) return out;
    if (z.norm() > radius) {
      out.end = ShotEnd::Escaped;
      return out;
    }
    for (int c = 0; c < int(crit.size()); ++c) {
      if (c == exclude) continue;
      double stop = crit[c].index == 1 ? kSaddleStop : kExtremumStop;
      if ((z - crit[c].p).norm() < stop) {
        out.end = ShotEnd::Critical;
        out.target = c;
        return out;
      }
    }
    dt = std::min(dt, 1.0);
  }
  return out;
}

MorseComplex2D morse_complex_2d(const FunctionSpec& f, const MorseOptions& opt) {
  MorseComplex2D out;
  out.crit = find_critical_points_2d(*f.f, opt.radius, opt.seeds_per_axis);
  const auto& cr = out.crit;
  std::vector<int> local(cr.size());
  int dims[3] = {0, 0, 0};
  for (size_t i = 0; i < cr.size(); ++i) local[i] = dims[cr[i].index]++;
  QMatrix d1(dims[0], dims[1]), d2(dims[1], dims[2]);

  auto check = [&](const Shot& s, int from) {
    if (s.end == ShotEnd::Stalled)
      fail(ErrorKind::Boundary, "trajectory from " + cr[from].name + " neither converged nor left U");
    if (s.end == ShotEnd::Critical && cr[s.target].index == 1)
      fail(ErrorKind::NonMorseSmale, "saddle-saddle connection " + cr[from].name + " -> " + cr[s.target].name);
    if (s.end == ShotEnd::Escaped) out.escaped_branches++;
  };

  for (size_t i = 0; i < cr.size(); ++i) {
    if (cr[i].index != 1) continue;
    const auto& c = cr[i];
    for (int sg : {1, -1}) {
      Shot s = shoot(*f.f, c.p + sg * kShotOffset * c.eu, true, cr, opt.radius, int(i));
      check(s, int(i));
      if (s.end == ShotEnd::Critical && cr[s.target].index == 0) d1(local[s.target], local[i]) += sg;
    }
    for (int sg : {1, -1}) {
      Vec w = sg * c.es;
      Shot s = shoot(*f.f, c.p + kShotOffset * w, false, cr, opt.radius, int(i));
      check(s, int(i));
      if (s.end == ShotEnd::Critical && cr[s.target].index == 2) {
        Mat m(2, 2);
        m.col(0) = -w;
        m.col(1) = c.eu;
        d2(local[i], local[s.target]) += m.determinant() > 0 ? 1 : -1;
      }
    }
  }

  exactalg::ChainComplex::Gens gens;
  for (auto& c : cr) gens[c.index].push_back(c.name);
  std::map<int, QMatrix> bd;
  if (dims[1] > 0) bd[1] = d1;
  if (dims[2] > 0) bd[2] = d2;
  if (!f.action) {
    out.cx = exactalg::ChainComplex(gens, bd);
    return out;
  }
  const Mat& A = f.action->A;
  std::map<int, QMatrix> act;
  for (int j = 0; j < 3; ++j)
    if (dims[j] > 0) act[j] = QMatrix(dims[j], dims[j]);
  for (size_t i = 0; i < cr.size(); ++i) {
    Vec ap = A * cr[i].p;
    int tgt = -1;
    for (size_t q = 0; q < cr.size(); ++q)
      if ((cr[q].p - ap).norm() < 1e-6) tgt = int(q);
    if (tgt < 0 || cr[tgt].index != cr[i].index)
      fail(ErrorKind::Validation, "action does not permute the critical points");
    int s = 1;
    if (cr[i].index == 2) s = A.determinant() > 0 ? 1 : -1;
    if (cr[i].index == 1) s = (A * cr[i].eu).dot(cr[tgt].eu) > 0 ? 1 : -1;
    act[cr[i].index](local[tgt], local[i]) = s;
  }
  out.cx = exactalg::ChainComplex(gens, bd, act, f.action->k);
  return out;
}

}  // namespace equimorse::lochom
