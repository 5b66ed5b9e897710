#include "equimorse/hamflow.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <sstream>

#include "equimorse/linalg.hpp"

namespace equimorse::hamflow {

namespace odeint = boost::numeric::odeint;

namespace {

double time_factor(const HTerm& t, double time) {
  switch (t.mode) {
    case TimeMode::Const: return 1.0;
    case TimeMode::Cos: return std::cos(2 * M_PI * t.freq * time);
    case TimeMode::Sin: return std::sin(2 * M_PI * t.freq * time);
  }
  return 1.0;
}

double ipow(double x, int e) {
  double r = 1;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

int degree(const HTerm& t) {
  int s = 0;
  for (int e : t.m) s += e;
  return s;
}

}  // namespace

HamiltonianGerm::HamiltonianGerm(int n, std::vector<HTerm> terms, std::string label)
    : n_(n), terms_(std::move(terms)), label_(std::move(label)) {
  if (n_ < 1) fail(ErrorKind::Validation, "half-dimension must be positive");
  for (auto& t : terms_) {
    if (int(t.m.size()) != 2 * n_) fail(ErrorKind::Shape, "monomial length must be 2n");
    for (int e : t.m)
      if (e < 0) fail(ErrorKind::Validation, "negative exponent");
    if (degree(t) < 2) fail(ErrorKind::Validation, "every monomial must have total degree >= 2 so that dH(0) = 0");
  }
}

double HamiltonianGerm::value(double t, const Vec& z) const {
  double s = 0;
  for (auto& term : terms_) {
    double m = term.c * time_factor(term, t);
    for (int i = 0; i < 2 * n_; ++i) m *= ipow(z[i], term.m[i]);
    s += m;
  }
  return s;
}

Vec HamiltonianGerm::gradient(double t, const Vec& z) const {
  const int d = 2 * n_;
  Vec g = Vec::Zero(d);
  for (auto& term : terms_) {
    double c = term.c * time_factor(term, t);
    for (int i = 0; i < d; ++i) {
      if (term.m[i] == 0) continue;
      double m = c * term.m[i];
      for (int l = 0; l < d; ++l) m *= ipow(z[l], l == i ? term.m[l] - 1 : term.m[l]);
      g[i] += m;
    }
  }
  return g;
}

Mat HamiltonianGerm::hessian(double t, const Vec& z) const {
  const int d = 2 * n_;
  Mat h = Mat::Zero(d, d);
  for (auto& term : terms_) {
    double c = term.c * time_factor(term, t);
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        std::vector<int> e = term.m;
        if (e[i] == 0) continue;
        double m = c * e[i];
        e[i]--;
        if (e[j] == 0) continue;
        m *= e[j];
        e[j]--;
        for (int l = 0; l < d; ++l) m *= ipow(z[l], e[l]);
        h(i, j) += m;
        if (i != j) h(j, i) += m;
      }
  }
  return h;
}

HamiltonianGerm HamiltonianGerm::linearization() const {
  std::vector<HTerm> q;
  for (auto& t : terms_)
    if (degree(t) == 2) q.push_back(t);
  return HamiltonianGerm(n_, q, label_.empty() ? "" : label_ + "-linearized");
}

bool HamiltonianGerm::is_quadratic() const {
  for (auto& t : terms_)
    if (degree(t) != 2) return false;
  return true;
}

HamiltonianGerm HamiltonianGerm::from_json(const nlohmann::json& j) {
  if (!j.contains("n")) fail(ErrorKind::Validation, "Hamiltonian needs 'n'");
  int n = j.at("n").get<int>();
  std::vector<HTerm> terms;
  if (j.contains("terms"))
    for (auto& t : j.at("terms")) {
      HTerm h;
      h.c = t.at("c").get<double>();
      h.m = t.at("m").get<std::vector<int>>();
      if (t.contains("time")) {
        std::string mode = t.at("time").value("mode", "const");
        if (mode == "const") h.mode = TimeMode::Const;
        else if (mode == "cos") h.mode = TimeMode::Cos;
        else if (mode == "sin") h.mode = TimeMode::Sin;
        else fail(ErrorKind::Validation, "unknown time mode '" + mode + "'");
        h.freq = t.at("time").value("m", 0);
      }
      terms.push_back(h);
    }
  return HamiltonianGerm(n, terms, j.value("label", ""));
}

nlohmann::json HamiltonianGerm::to_json() const {
  nlohmann::json j;
  j["n"] = n_;
  if (!label_.empty()) j["label"] = label_;
  j["terms"] = nlohmann::json::array();
  for (auto& t : terms_) {
    const char* mode = t.mode == TimeMode::Const ? "const" : t.mode == TimeMode::Cos ? "cos" : "sin";
    nlohmann::json time = {{"mode", mode}};
    if (t.mode != TimeMode::Const) time["m"] = t.freq;
    j["terms"].push_back({{"c", t.c}, {"m", t.m}, {"time", time}});
  }
  return j;
}

HamiltonianGerm HamiltonianGerm::zero(int n) { return HamiltonianGerm(n, {}, "zero"); }

HamiltonianGerm HamiltonianGerm::rotation(double alpha) {
  double c = -M_PI * alpha;
  std::ostringstream os;
  os << "rotation(" << alpha << ")";
  return HamiltonianGerm(1, {{c, {2, 0}}, {c, {0, 2}}}, os.str());
}

HamiltonianGerm HamiltonianGerm::hyperbolic(double lambda) {
  std::ostringstream os;
  os << "hyperbolic(" << lambda << ")";
  return HamiltonianGerm(1, {{lambda, {1, 1}}}, os.str());
}

HamiltonianGerm HamiltonianGerm::quartic(double s) {
  double c = s / 4;
  std::ostringstream os;
  os << "quartic(" << s << ")";
  return HamiltonianGerm(1, {{c, {4, 0}}, {2 * c, {2, 2}}, {c, {0, 4}}}, os.str());
}

HamiltonianGerm HamiltonianGerm::operator+(const HamiltonianGerm& o) const {
  if (o.n_ != n_) fail(ErrorKind::Shape, "germ dimension mismatch");
  std::vector<HTerm> t = terms_;
  t.insert(t.end(), o.terms_.begin(), o.terms_.end());
  return HamiltonianGerm(n_, t, label_ + "+" + o.label_);
}

namespace {

using State = std::vector<double>;

struct System {
  const HamiltonianGerm& g;
  bool jac;
  int n;
  void operator()(const State& s, State& ds, double t) const {
    const int d = 2 * n;
    Eigen::Map<const Vec> z(s.data(), d);
    Vec grad = g.gradient(t, z);
    double h = g.value(t, z);
    // xdot = dH/dy, ydot = -dH/dx
    for (int i = 0; i < n; ++i) {
      ds[i] = grad[n + i];
      ds[n + i] = -grad[i];
    }
    double act = 0;
    for (int i = 0; i < n; ++i) act += z[n + i] * ds[i];
    ds[d] = act - h;
    if (!jac) return;
    Mat hs = g.hessian(t, z);
    Eigen::Map<const Mat> phi(s.data() + d + 1, d, d);
    Eigen::Map<Mat> dphi(ds.data() + d + 1, d, d);
    Mat hp = hs * phi;
    dphi.topRows(n) = hp.bottomRows(n);
    dphi.bottomRows(n) = -hp.topRows(n);
  }
};

}  // namespace

FlowResult integrate_flow(const HamiltonianGerm& g, double t0, double t1, const Vec& z, bool with_jac, double trust) {
  const int n = g.n(), d = 2 * n;
  if (z.size() != d) fail(ErrorKind::Shape, "flow start point has wrong dimension");
  if (trust < 0) trust = tolerances().trust_radius;
  if (z.norm() > trust * (1 + 1e-12)) fail(ErrorKind::Domain, "flow start point outside the trust radius");
  State s(d + 1 + (with_jac ? d * d : 0), 0.0);
  for (int i = 0; i < d; ++i) s[i] = z[i];
  if (with_jac)
    for (int i = 0; i < d; ++i) s[d + 1 + i * d + i] = 1.0;
  FlowResult r;
  if (t1 != t0 && !g.is_zero()) {
    System sys{g, with_jac, n};
    double tol = tolerances().ode;
    auto stepper = odeint::make_controlled(tol, tol, odeint::runge_kutta_fehlberg78<State>());
    double dt0 = (t1 - t0) / 8;
    bool escaped = false;
    auto obs = [&](const State& st, double) {
      double nz = 0;
      for (int i = 0; i < d; ++i) nz += st[i] * st[i];
      if (std::sqrt(nz) > 2 * trust) escaped = true;
    };
    try {
      odeint::integrate_adaptive(stepper, sys, s, t0, t1, dt0, obs);
    } catch (const std::exception& e) {
      fail(ErrorKind::Stiffness, std::string("flow integration failed: ") + e.what());
    }
    if (escaped) fail(ErrorKind::Domain, "trajectory left the trust region");
    for (double v : s)
      if (!std::isfinite(v)) fail(ErrorKind::Stiffness, "flow integration produced non-finite values");
  }
  r.z = Eigen::Map<Vec>(s.data(), d);
  r.action = s[d];
  if (with_jac) {
    r.jac = Eigen::Map<Mat>(s.data() + d + 1, d, d);
    if (symplectic_residual(r.jac) > tolerances().symplectic)
      fail(ErrorKind::Stiffness, "flow Jacobian lost symplecticity");
  }
  return r;
}

Mat linear_flow(const HamiltonianGerm& g, double t0, double t1) {
  return integrate_flow(g.linearization(), t0, t1, Vec::Zero(2 * g.n())).jac;
}

std::vector<Mat> linear_flow_samples(const HamiltonianGerm& g, double t0, double t1, int m) {
  HamiltonianGerm lin = g.linearization();
  std::vector<Mat> out;
  Mat cur = Mat::Identity(2 * g.n(), 2 * g.n());
  out.push_back(cur);
  for (int i = 0; i < m; ++i) {
    double a = t0 + (t1 - t0) * i / m, b = t0 + (t1 - t0) * (i + 1) / m;
    cur = integrate_flow(lin, a, b, Vec::Zero(2 * g.n())).jac * cur;
    out.push_back(cur);
  }
  return out;
}

double gen1_det(const Mat& dpsi) {
  const int n = int(dpsi.rows()) / 2;
  // [e-basis of R^n x 0 | dpsi (0 x R^n)] has determinant det(d).
  Mat m = Mat::Zero(2 * n, 2 * n);
  m.block(0, 0, n, n) = Mat::Identity(n, n);
  m.block(0, n, 2 * n, n) = dpsi.block(0, n, 2 * n, n);
  return m.determinant();
}

bool check_gen1(const Mat& dpsi) { return std::abs(gen1_det(dpsi)) > tolerances().gen1_det; }

bool adapted_N(const HamiltonianGerm& g, int N) {
  if (N < 1) fail(ErrorKind::Validation, "N must be positive");
  // Substeps of every length up to 1/(2N) from each grid start; the determinant
  // starts at 1, so a sign change between samples means Gen1 failed in between.
  const int grid = 4 * N, sub = 16;
  HamiltonianGerm lin = g.linearization();
  for (int i = 0; i < grid; ++i) {
    const double t0 = double(i) / grid;
    auto s = linear_flow_samples(lin, t0, t0 + 0.5 / N, sub);
    for (size_t j = 1; j < s.size(); ++j)
      if (!check_gen1(s[j]) || gen1_det(s[j]) < 0) return false;
  }
  return true;
}

bool step_homotopy_ok(const HamiltonianGerm& g, int N) {
  if (N < 1) fail(ErrorKind::Validation, "N must be positive");
  const int sub = 32;
  for (int i = 0; i < N; ++i) {
    auto s = linear_flow_samples(g, double(i) / N, double(i + 1) / N, sub);
    for (size_t j = 1; j < s.size(); ++j)
      if (gen1_det(s[j]) <= tolerances().gen1_det) return false;
  }
  return true;
}

Mat hessian_from_step(const Mat& dpsi) {
  const int n = int(dpsi.rows()) / 2;
  Mat a = dpsi.block(0, 0, n, n), b = dpsi.block(0, n, n, n);
  Mat c = dpsi.block(n, 0, n, n), d = dpsi.block(n, n, n, n);
  Eigen::FullPivLU<Mat> lu(d);
  if (!lu.isInvertible() || std::abs(d.determinant()) <= tolerances().gen1_det)
    fail(ErrorKind::Gen1, "step map violates Gen1");
  Mat di = lu.inverse();
  Mat I = Mat::Identity(n, n);
  Mat h(2 * n, 2 * n);
  h.block(0, 0, n, n) = -di * c;
  h.block(0, n, n, n) = di - I;
  h.block(n, 0, n, n) = a - b * di * c - I;
  h.block(n, n, n, n) = b * di;
  return symmetrize(h);
}

Mat lemma_hessian(const Mat& dpsi, double* asym_residual) {
  const int n = int(dpsi.rows()) / 2;
  Mat dT = Mat::Identity(2 * n, 2 * n);
  dT.block(n, 0, n, 2 * n) = dpsi.block(n, 0, n, 2 * n);
  if (std::abs(dT.determinant()) <= tolerances().gen1_det) fail(ErrorKind::Gen1, "dT(0) is singular");
  Mat j = J0(n);
  Mat h = -j.inverse() * (dpsi - Mat::Identity(2 * n, 2 * n)) * dT.inverse();
  if (asym_residual) *asym_residual = (h - h.transpose()).cwiseAbs().maxCoeff();
  return symmetrize(h);
}

GeneratingFunction::GeneratingFunction(HamiltonianGerm g, double t0, double t1, double trust)
    : g_(std::move(g)), t0_(t0), t1_(t1), trust_(trust < 0 ? tolerances().trust_radius : trust) {
  dpsi0_ = integrate_flow(g_, t0_, t1_, Vec::Zero(2 * g_.n())).jac;
  if (!check_gen1(dpsi0_)) fail(ErrorKind::Gen1, "step map violates Gen1 at the origin");
}

GeneratingFunction::Solve GeneratingFunction::solve(const Vec& x, const Vec& Y) const {
  const int n = g_.n();
  if (x.size() != n || Y.size() != n) fail(ErrorKind::Shape, "generating function argument has wrong dimension");
  Vec y = Y;
  double tol = tolerances().newton;
  for (int it = 0; it < 40; ++it) {
    Vec z(2 * n);
    z << x, y;
    if (z.norm() > trust_) fail(ErrorKind::TrustRegion, "Newton iterate left the trust region");
    FlowResult f = integrate_flow(g_, t0_, t1_, z, true, trust_);
    Vec res = f.z.tail(n) - Y;
    if (res.norm() < tol * std::max(1.0, Y.norm())) {
      return Solve{y, f.z.head(n), f.jac, f.action};
    }
    Mat d = f.jac.block(n, n, n, n);
    Eigen::FullPivLU<Mat> lu(d);
    if (!lu.isInvertible()) fail(ErrorKind::TrustRegion, "Newton Jacobian singular");
    y -= lu.solve(res);
    if (!y.allFinite()) fail(ErrorKind::TrustRegion, "Newton diverged");
  }
  fail(ErrorKind::TrustRegion, "Newton did not converge for the generating function");
}

double GeneratingFunction::value_quadrature(const Vec& x, const Vec& Y) const {
  auto integrand = [&](double s) {
    Vec xs = s * x, Ys = s * Y;
    Solve sv = solve(xs, Ys);
    return (sv.y - Ys).dot(x) + (sv.X - xs).dot(Y);
  };
  double err = 0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(integrand, 0.0, 1.0, 6, 1e-13, &err);
}

GeneratingFunction::Eval GeneratingFunction::eval(const Vec& x, const Vec& Y, SValueMethod m) const {
  Solve sv = solve(x, Y);
  Eval e;
  e.d1 = sv.y - Y;
  e.d2 = sv.X - x;
  if (m == SValueMethod::Quadrature) e.S = value_quadrature(x, Y);
  else e.S = (sv.X - x).dot(Y) - sv.action;
  return e;
}

GeneratingFunction::Eval GeneratingFunction::eval_gradient(const Vec& x, const Vec& Y) const {
  Solve sv = solve(x, Y);
  return Eval{0.0, sv.y - Y, sv.X - x};
}

Mat GeneratingFunction::hessian(const Vec& x, const Vec& Y) const { return hessian_from_step(solve(x, Y).dpsi); }

Mat GeneratingFunction::hessian_at_zero(double* asym_residual) const { return lemma_hessian(dpsi0_, asym_residual); }

double GeneratingFunction::gen2_residual(const Vec& x, const Vec& Y) const {
  const int n = g_.n();
  Eval e = eval_gradient(x, Y);
  Vec y = Y + e.d1;
  Vec z(2 * n);
  z << x, y;
  FlowResult f = integrate_flow(g_, t0_, t1_, z, false, trust_);
  Vec X = f.z.head(n), Yr = f.z.tail(n);
  return std::max((X - x - e.d2).cwiseAbs().maxCoeff(), (Yr - Y).cwiseAbs().maxCoeff());
}

}  // namespace equimorse::hamflow
