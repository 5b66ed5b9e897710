#include "equimorse/equiperturb.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "equimorse/linalg.hpp"
#include "equimorse/lochom.hpp"

namespace equimorse::equiperturb {

using regdist::ClosedSet;
using regdist::RegularizedDistance;

namespace {

std::string num(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", v);
  return b;
}

bool contained(const Stratum& a, const Stratum& b) {
  if (a.dim() == 0) return true;
  return ((Mat::Identity(b.P.rows(), b.P.cols()) - b.P) * a.basis).norm() < 1e-9;
}

class SumField : public Field {
 public:
  explicit SumField(std::vector<std::shared_ptr<const Field>> parts) : parts_(std::move(parts)) {}
  int dim() const override { return parts_[0]->dim(); }
  double value(const Vec& z) const override {
    double s = 0;
    for (auto& p : parts_) s += p->value(z);
    return s;
  }
  Vec gradient(const Vec& z) const override {
    Vec g = Vec::Zero(dim());
    for (auto& p : parts_) g += p->gradient(z);
    return g;
  }
  Mat hessian(const Vec& z) const override {
    Mat h = Mat::Zero(dim(), dim());
    for (auto& p : parts_) h += p->hessian(z);
    return symmetrize(h);
  }

 private:
  std::vector<std::shared_ptr<const Field>> parts_;
};

std::shared_ptr<const Field> normal_quadratic(const Mat& P, double c) {
  const int N = int(P.rows());
  Mat M = Mat::Identity(N, N) - P;
  return std::make_shared<LambdaField>(
      N, [M, c](const Vec& x) { return -0.5 * c * (M * x).squaredNorm(); },
      [M, c](const Vec& x) { return Vec(-c * (M * x)); }, [M, c](const Vec&) { return Mat(-c * M); });
}

struct RandomPoly {
  std::vector<std::vector<int>> exps;
  std::vector<double> coef;
};

RandomPoly draw_poly(int m, std::mt19937_64& rng) {
  RandomPoly p;
  std::normal_distribution<double> g(0, 1);
  for (int i = 0; i < m; ++i) {
    std::vector<int> e(m, 0);
    e[i] = 1;
    p.exps.push_back(e);
  }
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) {
      std::vector<int> e(m, 0);
      e[i]++;
      e[j]++;
      p.exps.push_back(e);
    }
  for (size_t t = 0; t < p.exps.size(); ++t) p.coef.push_back(g(rng));
  return p;
}

double eval_poly(const RandomPoly& p, const Vec& y) {
  double s = 0;
  for (size_t t = 0; t < p.exps.size(); ++t) {
    double m = p.coef[t];
    for (int i = 0; i < y.size(); ++i)
      for (int e = 0; e < p.exps[t][i]; ++e) m *= y[i];
    s += m;
  }
  return s;
}

// Restriction of f to a stratum, in its coordinates.
std::shared_ptr<const Field> restrict_to(std::shared_ptr<const Field> f, const Mat& B) {
  return std::make_shared<LambdaField>(
      int(B.cols()), [f, B](const Vec& y) { return f->value(B * y); },
      [f, B](const Vec& y) { return Vec(B.transpose() * f->gradient(B * y)); },
      [f, B](const Vec& y) { return Mat(B.transpose() * f->hessian(B * y) * B); });
}

double min_abs_eig(const Mat& h) {
  if (h.rows() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(h), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().minCoeff();
}

double op_norm(const Mat& h) {
  if (h.rows() == 0) return 0;
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(h), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

const Stratum& Stratification::F(int j) const {
  for (auto& s : strata)
    if (s.j == j) return s;
  fail(ErrorKind::Validation, std::to_string(j) + " does not divide the order");
}

double Stratification::dist(const Vec& x, int j) const { return (x - F(j).P * x).norm(); }

int Stratification::isotropy(const Vec& x, double tol) const {
  int best = -1;
  for (auto& s : strata) {
    if ((x - s.P * x).norm() >= tol) continue;
    if (best < 0 || s.dim() < F(best).dim()) best = s.j;
  }
  return best;
}

Stratification strata(const CyclicAction& a) {
  a.validate();
  Stratification s;
  s.N = int(a.A.rows());
  s.k = a.k;
  const Mat I = Mat::Identity(s.N, s.N);
  for (int j : divisors(a.k)) {
    Stratum st;
    st.j = j;
    st.basis = kernel_basis(a.power(j) - I, 1e-9);
    st.P = st.basis.cols() > 0 ? Mat(st.basis * st.basis.transpose()) : Mat::Zero(s.N, s.N);
    s.commute_residual = std::max(s.commute_residual, (st.P * a.A - a.A * st.P).norm());
    s.strata.push_back(st);
  }
  for (auto& si : s.strata) {
    for (auto& sj : s.strata) {
      const Stratum& g = s.F(int(gcd_l(si.j, sj.j)));
      Mat stack(2 * s.N, s.N);
      stack << I - si.P, I - sj.P;
      if (kernel_dim(stack, 1e-9) != g.dim() || !contained(g, si) || !contained(g, sj))
        fail(ErrorKind::Validation, "isotropy intersection identity fails for F_" + std::to_string(si.j) + ", F_" +
                                         std::to_string(sj.j));
      // H = complement of F_gcd inside F_i lies in the orthogonal of F_j.
      Mat h = si.P - g.P;
      s.orthogonality_residual = std::max(s.orthogonality_residual, (sj.P * h).norm());
    }
  }
  if (s.commute_residual > 1e-9 || s.orthogonality_residual > 1e-9)
    fail(ErrorKind::Validation, "stratification identities fail numerically");
  return s;
}

Extension normal_decreasing_extension(std::shared_ptr<const Field> f, const Stratification& s, int j, double radius) {
  const Stratum& st = s.F(j);
  if (f->dim() != st.dim()) fail(ErrorKind::Shape, "function dimension does not match the stratum");
  const int N = s.N;
  Mat B = st.basis, M = Mat::Identity(N, N) - st.P;
  Extension e;
  e.f = std::make_shared<LambdaField>(
      N, [f, B, M](const Vec& z) { return f->value(B.transpose() * z) - (M * z).squaredNorm(); },
      [f, B, M](const Vec& z) { return Vec(B * f->gradient(B.transpose() * z) - 2 * (M * z)); },
      [f, B, M](const Vec& z) { return Mat(B * f->hessian(B.transpose() * z) * B.transpose() - 2 * M); });
  (void)radius;
  return e;
}

std::vector<Vec> find_critical_points(const Field& f, double radius, int per, int scales) {
  const int N = f.dim();
  std::vector<Vec> out;
  if (N == 0) {
    out.push_back(Vec::Zero(0));
    return out;
  }
  long total = 1;
  for (int i = 0; i < N; ++i) total *= per;
  for (int sc = 0; sc < scales; ++sc) {
    double r = radius * std::pow(0.25, sc);
    for (long idx = 0; idx < total; ++idx) {
      long t = idx;
      Vec z(N);
      for (int i = 0; i < N; ++i) {
        z[i] = -r + 2 * r * (double(t % per) + 0.5) / per;
        t /= per;
      }
      if (z.norm() > radius) continue;
      bool ok = false;
      for (int it = 0; it < 60; ++it) {
        Vec g = f.gradient(z);
        if (!g.allFinite()) break;
        if (g.norm() < 1e-13) {
          ok = true;
          break;
        }
        Mat h = f.hessian(z);
        Eigen::FullPivLU<Mat> lu(h);
        Vec step = lu.isInvertible() ? Vec(lu.solve(g)) : Vec(h.completeOrthogonalDecomposition().solve(g));
        if (step.norm() > radius) step *= radius / step.norm();
        z -= step;
        if (z.norm() > 2 * radius) break;
        if (step.norm() < 1e-15) {
          ok = f.gradient(z).norm() < 1e-10;
          break;
        }
      }
      if (!ok) ok = z.allFinite() && z.norm() <= 2 * radius && f.gradient(z).norm() < 1e-10;
      if (!ok || z.norm() > radius) continue;
      bool dup = false;
      for (auto& p : out) dup = dup || (p - z).norm() < 1e-7;
      if (!dup) out.push_back(z);
    }
  }
  return out;
}

Certificate certify(const Field& fo, const Field& f, const Stratification& s, const CyclicAction& a,
                    const std::vector<double>& c, double eps, double radius) {
  Certificate cert;
  const int N = f.dim();
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> u(-1, 1);
  auto sample_ball = [&]() {
    Vec x(N);
    do {
      for (int i = 0; i < N; ++i) x[i] = u(rng);
    } while (x.norm() > 1);
    return Vec(radius * x);
  };
  for (int t = 0; t < 300; ++t) {
    Vec x = sample_ball();
    cert.invariance_residual = std::max(cert.invariance_residual, std::abs(fo.value(a.A * x) - fo.value(x)));
  }
  cert.invariance_ok = cert.invariance_residual < 1e-9;

  auto crit = find_critical_points(fo, radius);
  cert.morse_ok = true;
  cert.min_abs_eig = std::numeric_limits<double>::infinity();
  cert.nearest_off_stratum = std::numeric_limits<double>::infinity();
  cert.normal_margin = std::numeric_limits<double>::infinity();
  for (auto& p : crit) {
    CriticalInfo ci;
    ci.p = p;
    Mat h = symmetrize(fo.hessian(p));
    Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
    ci.index = int((es.eigenvalues().array() < 0).count());
    ci.min_abs_eig = es.eigenvalues().cwiseAbs().minCoeff();
    cert.min_abs_eig = std::min(cert.min_abs_eig, ci.min_abs_eig);
    if (ci.min_abs_eig <= 1e-10) cert.morse_ok = false;
    ci.stratum = s.isotropy(p);
    const Stratum& st = s.F(ci.stratum);
    for (size_t i = 0; i < s.strata.size(); ++i) {
      const Stratum& o = s.strata[i];
      double d = (p - o.P * p).norm();
      if (d >= 1e-6) cert.nearest_off_stratum = std::min(cert.nearest_off_stratum, d);
    }
    if (st.dim() < N) {
      Mat q = kernel_basis(st.P, 1e-10);
      Eigen::SelfAdjointEigenSolver<Mat> en(Mat(q.transpose() * h * q), Eigen::EigenvaluesOnly);
      ci.normal_max_eig = en.eigenvalues().maxCoeff();
      size_t si = 0;
      while (s.strata[si].j != ci.stratum) ++si;
      double cj = c[si];
      cert.normal_margin = std::min(cert.normal_margin, cj > 0 ? -ci.normal_max_eig / cj : -1.0);
    }
    cert.critical.push_back(ci);
  }
  cert.strata_ok = cert.nearest_off_stratum > 1e-4;
  cert.normal_ok = cert.normal_margin >= 0.9;

  for (int t = 0; t < 400; ++t) {
    Vec x = t == 0 ? Vec::Zero(N) : sample_ball();
    double dv = std::abs(fo.value(x) - f.value(x));
    double dg = (fo.gradient(x) - f.gradient(x)).norm();
    double dh = op_norm(fo.hessian(x) - f.hessian(x));
    cert.c2_distance = std::max({cert.c2_distance, dv, dg, dh});
  }
  cert.c2_ok = cert.c2_distance < eps;
  return cert;
}

PerturbResult perturb_invariant_morse(const FunctionSpec& fs, const PerturbOptions& opt) {
  const int N = fs.dim();
  if (N < 1 || N > 3) fail(ErrorKind::Unsupported, "perturbation pipeline supports dimensions 1 to 3");
  if (!(opt.eps > 0) || !(opt.radius > 0)) fail(ErrorKind::Validation, "eps and radius must be positive");
  fs.validate(opt.radius);
  CyclicAction act = fs.action ? *fs.action : CyclicAction::trivial(N);
  for (auto& p : find_critical_points(*fs.f, opt.radius))
    if (p.norm() > 0.05 * opt.radius)
      fail(ErrorKind::Isolation, "critical point other than 0 in U at distance " + std::to_string(p.norm()));
  Stratification S = strata(act);

  std::mt19937_64 rng(opt.seed);
  PerturbResult res;
  std::string last_fail;
  for (int draw = 0; draw < opt.draws; ++draw) {
    res.trace.push_back("draw " + std::to_string(draw));
    std::vector<std::shared_ptr<const Field>> parts{fs.f};
    auto current = [&]() { return std::shared_ptr<const Field>(std::make_shared<SumField>(parts)); };
    std::vector<int> done;
    std::vector<double> c(S.strata.size(), 0.0);
    double r_prev = 0;
    bool stage_failed = false;
    for (size_t si = 0; si < S.strata.size() && !stage_failed; ++si) {
      const Stratum& st = S.strata[si];
      bool skip = false;
      for (int q : done) skip = skip || contained(st, S.strata[q]);
      if (skip) {
        res.trace.push_back("F_" + std::to_string(st.j) + " lies in G_d'; skipped");
        continue;
      }
      const int m = st.dim();
      const bool top = m == N;
      const bool first = done.empty();
      double cd = opt.c_factor * opt.eps;
      // Morse perturbation of the restriction, supported off the tube around G_d'.
      if (m > 0) {
        RandomPoly p = draw_poly(m, rng);
        Mat B = st.basis, A = act.A;
        int k = act.k;
        std::vector<Mat> lower;
        for (int q : done) lower.push_back(Mat::Identity(N, N) - S.strata[q].P);
        double r = r_prev;
        auto shape = [p, B, A, k, lower, r](const Vec& x0) {
          Vec x = B * (B.transpose() * x0);
          double chi = 1;
          for (auto& M : lower) {
            double d2 = (M * x).squaredNorm();
            chi *= smooth_step((d2 - r * r) / (3 * r * r));
            if (chi == 0) return 0.0;
          }
          double s = 0;
          Vec y = x;
          for (int i = 0; i < k; ++i) {
            s += eval_poly(p, B.transpose() * y);
            y = A * y;
          }
          return chi * s / k;
        };
        bool found = false;
        double eta = 1e-3 * cd;
        // Keep the C2 size of alpha (cutoff derivatives included) well under eps.
        {
          LambdaField unit(N, shape);
          std::uniform_real_distribution<double> u(-1, 1);
          std::mt19937_64 srng(7);
          double m2 = 0;
          for (int t = 0; t < 300; ++t) {
            Vec x(N);
            for (int i = 0; i < N; ++i) x[i] = opt.radius * u(srng);
            if (x.norm() > opt.radius) continue;
            m2 = std::max({m2, std::abs(unit.value(x)), unit.gradient(x).norm(), op_norm(unit.hessian(x))});
          }
          if (m2 > 0) eta = std::min(eta, 0.05 * opt.eps / m2);
        }
        for (int t = 0; t < 8 && !found; ++t, eta *= 0.1) {
          auto alpha = std::make_shared<LambdaField>(N, [shape, eta](const Vec& x) { return eta * shape(x); });
          parts.push_back(alpha);
          auto cand = current();
          auto rc = restrict_to(cand, B);
          bool good = true;
          for (auto& y : find_critical_points(*rc, opt.radius)) {
            if (min_abs_eig(rc->hessian(y)) <= 1e-10) good = false;
            Vec x = B * y;
            bool off_v = true;
            for (auto& M : lower) off_v = off_v && (M * x).norm() > r;
            if (!top && first && off_v && op_norm(cand->hessian(x)) > 0.1 * cd) good = false;
            if (!good) break;
          }
          if (good) {
            found = true;
            res.trace.push_back("F_" + std::to_string(st.j) + ": alpha scale " + num(eta));
          } else {
            parts.pop_back();
          }
        }
        if (!found) {
          last_fail = "Morse perturbation on F_" + std::to_string(st.j);
          stage_failed = true;
          break;
        }
      }
      if (!top) {
        if (first) {
          c[si] = cd;
          parts.push_back(normal_quadratic(st.P, cd));
          res.trace.push_back("F_" + std::to_string(st.j) + ": normal term -c/2 |(I-P)x|^2, c = " + num(cd));
        } else {
          ClosedSet V(N);
          for (int q : done) V.add_tube(S.strata[q].basis, r_prev);
          const double L = 1.1 * opt.radius;
          // Finest cubes well below the tube radius.
          int depth = std::clamp(int(std::ceil(std::log2(32 * L / r_prev))), opt.regdist_depth, 14);
          auto d0 = std::make_shared<RegularizedDistance>(V, Mat(N, 0), act, L, depth);
          auto d1 = std::make_shared<RegularizedDistance>(V, st.basis, act, L, depth);
          // delta so that phi_delta(delta0^2) = 1 at stratum critical points off V.
          double dlt = r_prev * r_prev;
          auto rc = restrict_to(current(), st.basis);
          for (auto& y : find_critical_points(*rc, opt.radius)) {
            Vec x = st.basis * y;
            if (V.dist(x) <= 0) continue;
            try {
              dlt = std::min(dlt, std::pow(d0->value(x), 2));
            } catch (const Error& e) {
              if (e.kind() != ErrorKind::Resolution) throw;
            }
          }
          auto g = std::make_shared<LambdaField>(N, [d0, d1, dlt](const Vec& x) {
            double v0;
            try {
              v0 = d0->value(x);
            } catch (const Error& e) {
              // Below the finest cubes the regularized distance is at most a
              // small multiple of dist(x, X), so the cutoff already vanishes.
              if (e.kind() != ErrorKind::Resolution || 4 * d0->dist_x(x) >= 0.5 * std::sqrt(dlt))
                fail(e.kind(), std::string("distance to V: ") + e.what() + " (dist " + num(d0->dist_x(x)) +
                                   ", delta " + num(dlt) + ")");
              return 0.0;
            }
            double s0 = v0 * v0;
            double phi = smooth_step(2 * s0 / dlt - 0.5);
            if (phi == 0) return 0.0;
            double v1;
            try {
              v1 = d1->value(x);
            } catch (const Error& e) {
              fail(e.kind(), std::string("distance to V u F_d: ") + e.what());
            }
            return phi * v1 * v1;
          });
          // c_d from the sampled C2 size of g so the term stays within budget.
          double mg = 0;
          {
            std::uniform_real_distribution<double> u(-1, 1);
            std::mt19937_64 srng(11);
            for (int t = 0; t < 300; ++t) {
              Vec x(N);
              for (int i = 0; i < N; ++i) x[i] = opt.radius * u(srng);
              if (x.norm() > opt.radius) continue;
              mg = std::max({mg, std::abs(g->value(x)), g->gradient(x).norm(), op_norm(g->hessian(x))});
            }
          }
          if (mg > 0) cd = std::min(cd, 0.2 * opt.eps / mg);
          c[si] = cd;
          parts.push_back(std::make_shared<LambdaField>(N, [g, cd](const Vec& x) { return -0.5 * cd * g->value(x); }));
          res.trace.push_back("F_" + std::to_string(st.j) + ": normal term from regularized distances, delta = " +
                              num(dlt) + ", c = " + num(cd) + ", depth " + std::to_string(depth));
        }
      }
      done.push_back(int(si));
      // Tube radius for the next stage: a quarter of the distance from G_d to
      // the nearest critical point off it.
      if (!top) {
        double dmin = opt.radius;
        auto cur = current();
        for (auto& p : find_critical_points(*cur, opt.radius)) {
          double d = std::numeric_limits<double>::infinity();
          for (int q : done) d = std::min(d, (p - S.strata[q].P * p).norm());
          if (d > 1e-6) dmin = std::min(dmin, d);
        }
        r_prev = 0.25 * dmin;
      }
    }
    if (stage_failed) continue;
    res.f_out = current();
    res.cert = certify(*res.f_out, *fs.f, S, act, c, opt.eps, opt.radius);
    res.draws_used = draw + 1;
    if (res.cert.passed()) return res;
    const Certificate& ct = res.cert;
    last_fail = !ct.invariance_ok ? "invariance (i)"
                : !ct.strata_ok  ? "critical points on strata (ii)"
                : !ct.normal_ok  ? "normal Hessian margin (iii)"
                : !ct.c2_ok      ? "C2 distance (iv)"
                                 : "Morse condition";
  }
  fail(ErrorKind::Pipeline, "perturbation certificate failed after " + std::to_string(opt.draws) + " draws: " + last_fail);
}

MorseSmaleReport verify_morse_smale_2d(const FunctionSpec& f, double radius) {
  if (f.dim() != 2) fail(ErrorKind::Shape, "Morse-Smale verification is two-dimensional");
  MorseSmaleReport rep;
  auto crit = lochom::find_critical_points_2d(*f.f, radius);
  for (size_t i = 0; i < crit.size(); ++i) {
    if (crit[i].index != 1) continue;
    rep.saddles++;
    for (int sg : {1, -1}) {
      auto s = lochom::shoot(*f.f, crit[i].p + sg * 1e-4 * crit[i].eu, true, crit, radius, int(i));
      if (s.end == lochom::ShotEnd::Critical && crit[s.target].index == 1)
        rep.saddle_connections.push_back({crit[i].name, crit[s.target].name});
      else if (s.end != lochom::ShotEnd::Critical)
        rep.escaped++;
    }
  }
  if (f.action) {
    Stratification S = strata(*f.action);
    for (auto& st : S.strata) {
      if (st.dim() == 0 || st.dim() == 2) continue;
      Mat M = Mat::Identity(2, 2) - st.P;
      for (int t = -20; t <= 20; ++t) {
        Vec x = st.basis.col(0) * (radius * t / 20.0);
        rep.tangency_residual = std::max(rep.tangency_residual, (M * f.f->gradient(x)).norm());
      }
    }
  }
  rep.tangency_ok = rep.tangency_residual < 1e-9;
  return rep;
}

nlohmann::json certificate_to_json(const Certificate& c) {
  nlohmann::json crit = nlohmann::json::array();
  for (auto& p : c.critical) {
    crit.push_back({{"point", std::vector<double>(p.p.data(), p.p.data() + p.p.size())},
                    {"index", p.index},
                    {"stratum", p.stratum},
                    {"normal_max_eig", p.normal_max_eig},
                    {"min_abs_eig", p.min_abs_eig}});
  }
  auto fin = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  return {{"passed", c.passed()},
          {"invariance", {{"pass", c.invariance_ok}, {"residual", c.invariance_residual}}},
          {"strata", {{"pass", c.strata_ok}, {"nearest_off_stratum", fin(c.nearest_off_stratum)}}},
          {"normal_hessian", {{"pass", c.normal_ok}, {"margin_over_c", fin(c.normal_margin)}}},
          {"c2_distance", {{"pass", c.c2_ok}, {"value", c.c2_distance}}},
          {"morse", {{"pass", c.morse_ok}, {"min_abs_eig", fin(c.min_abs_eig)}}},
          {"critical_points", crit}};
}

}  // namespace equimorse::equiperturb
