#include "equimorse/spindex.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <sstream>

#include "equimorse/dact.hpp"
#include "equimorse/linalg.hpp"

namespace equimorse::spindex {

using cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;

namespace {

double path_residual(const Mat& m) {
  double scale = std::max(1.0, m.squaredNorm() / m.rows());
  return symplectic_residual(m) / scale;
}

}  // namespace

SymplecticPath::SymplecticPath(int n, std::vector<double> t, std::vector<Mat> m)
    : n_(n), t_(std::move(t)), m_(std::move(m)) {
  if (n_ < 1) fail(ErrorKind::Validation, "half-dimension must be positive");
  if (t_.size() != m_.size() || t_.size() < 2) fail(ErrorKind::Validation, "path needs at least two samples");
  if (std::abs(t_[0]) > 1e-15) fail(ErrorKind::Validation, "path must start at t = 0");
  for (size_t i = 1; i < t_.size(); ++i)
    if (!(t_[i] > t_[i - 1])) fail(ErrorKind::Validation, "sample times must increase");
  for (auto& x : m_)
    if (x.rows() != 2 * n_ || x.cols() != 2 * n_) fail(ErrorKind::Shape, "path sample has wrong size");
  if ((m_[0] - Mat::Identity(2 * n_, 2 * n_)).cwiseAbs().maxCoeff() > 1e-12)
    fail(ErrorKind::Validation, "path must start at the identity");
  for (auto& x : m_)
    if (path_residual(x) > tolerances().path_symplectic) fail(ErrorKind::Validation, "path sample is not symplectic");
}

SymplecticPath SymplecticPath::from_germ(const hamflow::HamiltonianGerm& g, double T, int per_unit) {
  if (T <= 0) fail(ErrorKind::Validation, "path length must be positive");
  auto unit = hamflow::linear_flow_samples(g, 0.0, 1.0, per_unit);
  std::vector<double> t;
  std::vector<Mat> m;
  int total = int(std::ceil(T * per_unit - 1e-9));
  std::vector<Mat> powers{Mat::Identity(2 * g.n(), 2 * g.n())};
  for (int i = 0; i <= total; ++i) {
    double ti = std::min(T, double(i) / per_unit);
    int whole = i / per_unit, frac = i % per_unit;
    while (int(powers.size()) <= whole) powers.push_back(unit.back() * powers.back());
    // M(whole + frac/per_unit) = M(frac/per_unit) M(1)^whole
    t.push_back(ti);
    m.push_back(unit[frac] * powers[whole]);
  }
  if (t.back() < T - 1e-12) {
    // non-integer T: last partial sample from a direct flow
    t.push_back(T);
    Mat p = Mat::Identity(2 * g.n(), 2 * g.n());
    int whole = int(std::floor(T));
    for (int w = 0; w < whole; ++w) p = unit.back() * p;
    m.push_back(hamflow::linear_flow(g, 0.0, T - whole) * p);
  }
  SymplecticPath path(g.n(), t, m);
  path.source_ = g.linearization();
  path.per_unit_ = per_unit;
  return path;
}

SymplecticPath SymplecticPath::rotation(double alpha, double T, int per_unit) {
  int total = std::max(2, int(std::ceil(T * per_unit)));
  std::vector<double> t;
  std::vector<Mat> m;
  for (int i = 0; i <= total; ++i) {
    double ti = T * i / total;
    t.push_back(ti);
    m.push_back(rotation2(2 * M_PI * alpha * ti));
  }
  SymplecticPath p(1, t, m);
  p.alpha_ = alpha;
  p.per_unit_ = per_unit;
  return p;
}

SymplecticPath SymplecticPath::constant(int n, double T) {
  return SymplecticPath(n, {0.0, T}, {Mat::Identity(2 * n, 2 * n), Mat::Identity(2 * n, 2 * n)});
}

SymplecticPath SymplecticPath::from_json(const nlohmann::json& j) {
  if (j.contains("hamiltonian")) {
    auto g = hamflow::HamiltonianGerm::from_json(j.at("hamiltonian"));
    return from_germ(g, j.value("T", 1.0), j.value("per_unit", 64));
  }
  int n = j.at("n").get<int>();
  std::vector<double> t;
  std::vector<Mat> m;
  for (auto& s : j.at("samples")) {
    t.push_back(s.at("t").get<double>());
    auto rows = s.at("M");
    Mat x(2 * n, 2 * n);
    if (int(rows.size()) != 2 * n) fail(ErrorKind::Shape, "path sample has wrong size");
    for (int r = 0; r < 2 * n; ++r)
      for (int c = 0; c < 2 * n; ++c) x(r, c) = rows.at(r).at(c).get<double>();
    m.push_back(x);
  }
  return SymplecticPath(n, t, m);
}

SymplecticPath SymplecticPath::refined() const {
  if (source_) return from_germ(*source_, T(), per_unit_ * 2);
  if (alpha_) return rotation(*alpha_, T(), per_unit_ * 2);
  fail(ErrorKind::Resolution, "path samples too coarse and no generator available for refinement");
}

SymplecticPath SymplecticPath::concatenate(const SymplecticPath& o) const {
  if (o.n_ != n_) fail(ErrorKind::Shape, "concatenated paths differ in dimension");
  std::vector<double> t = t_;
  std::vector<Mat> m = m_;
  for (size_t i = 1; i < o.t_.size(); ++i) {
    t.push_back(T() + o.t_[i]);
    m.push_back(o.m_[i] * end());
  }
  return SymplecticPath(n_, t, m);
}

SymplecticPath SymplecticPath::reversed() const {
  std::vector<double> t;
  std::vector<Mat> m;
  Mat inv = end().inverse();
  for (size_t i = t_.size(); i-- > 0;) {
    t.push_back(T() - t_[i]);
    m.push_back(m_[i] * inv);
  }
  m[0] = Mat::Identity(2 * n_, 2 * n_);
  return SymplecticPath(n_, t, m);
}

Mat symplectic_sum(const Mat& a, const Mat& b) {
  const int p = int(a.rows()) / 2, q = int(b.rows()) / 2, n = p + q;
  Mat s = Mat::Zero(2 * n, 2 * n);
  // index maps: a's x -> [0,p), a's y -> [n, n+p); b's x -> [p,n), b's y -> [n+p, 2n)
  auto ia = [&](int i) { return i < p ? i : n + (i - p); };
  auto ib = [&](int i) { return i < q ? p + i : n + p + (i - q); };
  for (int i = 0; i < 2 * p; ++i)
    for (int j = 0; j < 2 * p; ++j) s(ia(i), ia(j)) = a(i, j);
  for (int i = 0; i < 2 * q; ++i)
    for (int j = 0; j < 2 * q; ++j) s(ib(i), ib(j)) = b(i, j);
  return s;
}

SymplecticPath direct_sum(const SymplecticPath& p, const SymplecticPath& q) {
  if (p.times().size() != q.times().size()) fail(ErrorKind::Shape, "direct sum needs a common sample grid");
  std::vector<Mat> m;
  for (size_t i = 0; i < p.times().size(); ++i) {
    if (std::abs(p.times()[i] - q.times()[i]) > 1e-12) fail(ErrorKind::Shape, "direct sum needs a common sample grid");
    m.push_back(symplectic_sum(p.mats()[i], q.mats()[i]));
  }
  return SymplecticPath(p.n() + q.n(), p.times(), m);
}

namespace {

// Unitary frame of the Lagrangian spanned by the columns of f (4n x 2n),
// rows ordered (x1, y1, x2, y2), complexified as X + iY with X = (x1; x2).
CMat lagrangian_unitary(const Mat& f, int n) {
  Eigen::HouseholderQR<Mat> qr(f);
  Mat q = qr.householderQ() * Mat::Identity(4 * n, 2 * n);
  CMat u(2 * n, 2 * n);
  for (int c = 0; c < 2 * n; ++c)
    for (int r = 0; r < n; ++r) {
      u(r, c) = cd(q(r, c), q(n + r, c));
      u(n + r, c) = cd(q(2 * n + r, c), q(3 * n + r, c));
    }
  return u;
}

struct GraphFrame {
  int n;
  Mat C;
  CMat vinv;
  explicit GraphFrame(int n_) : n(n_) {
    C = Mat::Identity(2 * n, 2 * n);
    C.bottomRightCorner(n, n) *= -1;
    Mat f(4 * n, 2 * n);
    f << C, Mat::Identity(2 * n, 2 * n);
    CMat v = lagrangian_unitary(f, n);
    vinv = (v * v.transpose()).inverse();
  }
  Eigen::VectorXcd eigen(const Mat& m) const {
    Mat f(4 * n, 2 * n);
    f << C, m;
    CMat u = lagrangian_unitary(f, n);
    CMat w = u * u.transpose() * vinv;
    Eigen::ComplexEigenSolver<CMat> es(w, false);
    return es.eigenvalues();
  }
};

// Continues the angle vector th to the new eigenvalues; returns max jump.
double continue_angles(std::vector<double>& th, const Eigen::VectorXcd& ev) {
  const int m = int(th.size());
  std::vector<double> ang(m);
  for (int i = 0; i < m; ++i) ang[i] = std::arg(ev[i]);
  auto wrap = [](double a) { return std::remainder(a, 2 * M_PI); };
  std::vector<int> perm(m), best;
  std::iota(perm.begin(), perm.end(), 0);
  double bestj = 1e300;
  if (m <= 6) {
    do {
      double j = 0;
      for (int i = 0; i < m; ++i) j = std::max(j, std::abs(wrap(ang[perm[i]] - th[i])));
      if (j < bestj) {
        bestj = j;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    std::vector<char> used(m, 0);
    best.assign(m, 0);
    bestj = 0;
    for (int i = 0; i < m; ++i) {
      int bi = -1;
      double bd = 1e300;
      for (int c = 0; c < m; ++c)
        if (!used[c] && std::abs(wrap(ang[c] - th[i])) < bd) {
          bd = std::abs(wrap(ang[c] - th[i]));
          bi = c;
        }
      used[bi] = 1;
      best[i] = bi;
      bestj = std::max(bestj, bd);
    }
  }
  for (int i = 0; i < m; ++i) th[i] += wrap(ang[best[i]] - th[i]);
  return bestj;
}

int spectral_once(const SymplecticPath& p, bool& too_coarse) {
  const int n = p.n();
  GraphFrame gf(n);
  std::vector<double> th(2 * n, 0.0);
  too_coarse = false;
  for (size_t i = 1; i < p.mats().size(); ++i) {
    double jump = continue_angles(th, gf.eigen(p.mats()[i]));
    if (jump > 0.5) {
      too_coarse = true;
      return 0;
    }
  }
  double s = 0;
  for (double t : th) {
    double r = t / (2 * M_PI);
    if (std::abs(r - std::round(r)) < 1e-9) fail(ErrorKind::Validation, "endpoint is degenerate");
    s += std::floor(r) + 0.5;
  }
  return int(std::lround(s));
}

}  // namespace

int cz_spectral(const SymplecticPath& p0) {
  SymplecticPath p = p0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    bool coarse = false;
    int v = spectral_once(p, coarse);
    if (!coarse) return v;
    if (!p.refinable())
      fail(ErrorKind::Resolution, "sample spacing too coarse for crossing detection; resample with at least twice the density");
    p = p.refined();
  }
  fail(ErrorKind::Resolution, "refinement budget exhausted in crossing detection");
}

int cz_action(const SymplecticPath& p0) {
  SymplecticPath p = p0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    const auto& ms = p.mats();
    const int dim = 2 * p.n();
    std::vector<Mat> steps;
    bool coarse = false;
    size_t s = 0;
    while (s + 1 < ms.size()) {
      Mat inv = ms[s].inverse();
      size_t j = s;
      while (j + 1 < ms.size() && (ms[j + 1] * inv - Mat::Identity(dim, dim)).norm() <= 0.5) j++;
      if (j == s) {
        coarse = true;
        break;
      }
      steps.push_back(ms[j] * inv);
      s = j;
    }
    if (!coarse) {
      Mat h = dact::quadratic_action_hessian_from_steps(steps);
      auto id = dact::quadratic_index(h);
      return id.index - p.n() * int(steps.size());
    }
    if (!p.refinable())
      fail(ErrorKind::Resolution, "consecutive samples too far apart for the discrete-action route; resample more densely");
    p = p.refined();
  }
  fail(ErrorKind::Resolution, "refinement budget exhausted in the discrete-action route");
}

int cz_index(const SymplecticPath& p) {
  if (nullity(p.end()) == 0) return cz_spectral(p);
  return cz_action(p);
}

MeanIndex mean_index(const hamflow::HamiltonianGerm& g) {
  MeanIndex out;
  const int n = g.n();
  double prev = 0;
  for (int m = 1; m <= 4096; m *= 2) {
    int cz = cz_index(SymplecticPath::from_germ(g, m, 64));
    out.trace.push_back({m, cz});
    double est = double(cz) / m;
    if (m >= 16 && std::abs(est - prev) < 2.0 * n / m) {
      out.delta = est;
      out.m_final = m;
      out.tolerance = 2.0 * n / m;
      return out;
    }
    prev = est;
  }
  fail(ErrorKind::Budget, "mean index did not converge within the iteration budget");
}

int nullity(const Mat& m) {
  const int d = int(m.rows());
  Eigen::JacobiSVD<Mat> svd(m - Mat::Identity(d, d));
  double norm = Eigen::JacobiSVD<Mat>(m).singularValues()[0];
  double thr = tolerances().eig_rel * std::max(norm, 1e-300);
  int z = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] <= thr) z++;
  return z;
}

IterationClass classify_iteration(const Mat& m, int k) {
  if (k < 1) fail(ErrorKind::Validation, "k must be positive");
  IterationClass c;
  c.k = k;
  if (k == 1) return c;
  Eigen::EigenSolver<Mat> es(m, false);
  const auto& ev = es.eigenvalues();
  const double tol = tolerances().root_of_unity, amb = tolerances().root_ambiguity;
  int neg = 0, negk = 0;
  for (int i = 0; i < ev.size(); ++i) {
    cd l = ev[i];
    // nearest k-th root of unity other than 1
    double best = 1e300;
    for (int r = 1; r < k; ++r) best = std::min(best, std::abs(l - std::polar(1.0, 2 * M_PI * r / k)));
    if (best <= tol) c.admissible = false;
    else if (best < amb) {
      std::ostringstream os;
      os << "eigenvalue " << l.real() << (l.imag() >= 0 ? "+" : "") << l.imag()
         << "i is within " << best << " of a nontrivial k-th root of unity";
      fail(ErrorKind::Ambiguity, os.str());
    }
    bool real = std::abs(l.imag()) < 1e-8;
    if (real && l.real() < 0 && l.real() > -1) neg++;
    cd lk = std::pow(l, k);
    bool realk = std::abs(lk.imag()) < 1e-8;
    if (realk && lk.real() < 0 && lk.real() > -1) negk++;
  }
  c.good = (neg % 2) == (negk % 2);
  return c;
}

int maslov_loop_index(const SymplecticPath& loop0) {
  SymplecticPath loop = loop0;
  const int n = loop.n(), d = 2 * n;
  if ((loop.end() - Mat::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-8)
    fail(ErrorKind::Domain, "loop endpoint is not the identity");
  for (int attempt = 0; attempt < 8; ++attempt) {
    double total = 0, prev = 0;
    bool coarse = false;
    for (size_t i = 0; i < loop.mats().size(); ++i) {
      Eigen::JacobiSVD<Mat> svd(loop.mats()[i], Eigen::ComputeFullU | Eigen::ComputeFullV);
      Mat o = svd.matrixU() * svd.matrixV().transpose();
      CMat u(n, n);
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) u(r, c) = cd(o(r, c), o(n + r, c));
      double a = std::arg(u.determinant());
      if (i > 0) {
        double step = std::remainder(a - prev, 2 * M_PI);
        if (std::abs(step) > M_PI / 2) coarse = true;
        total += step;
      }
      prev = a;
    }
    if (!coarse) return int(std::lround(total / (2 * M_PI)));
    if (!loop.refinable()) fail(ErrorKind::Resolution, "loop samples too coarse for winding count");
    loop = loop.refined();
  }
  fail(ErrorKind::Resolution, "refinement budget exhausted in winding count");
}

}  // namespace equimorse::spindex
