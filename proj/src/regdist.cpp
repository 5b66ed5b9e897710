#include "equimorse/regdist.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "equimorse/linalg.hpp"

namespace equimorse::regdist {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Profile edge, strictly inside the 9/16 half-width of the dilated cube.
constexpr double kBumpOuter = 0.5 + 0.95 / 16;

Mat complement_projector(const Mat& basis, int N) {
  Mat m = Mat::Identity(N, N);
  if (basis.cols() > 0) m -= basis * basis.transpose();
  return m;
}

Mat orthonormal(const Mat& b) {
  if (b.cols() == 0) return b;
  Eigen::HouseholderQR<Mat> qr(b);
  Mat q = qr.householderQ() * Mat::Identity(b.rows(), b.cols());
  if (kernel_dim(b) > 0) fail(ErrorKind::Validation, "subspace basis is rank deficient");
  return q;
}

}  // namespace

double Tube::dist(const Vec& x) const {
  Vec v = x - center;
  if (basis.cols() > 0) v -= basis * (basis.transpose() * v);
  return std::max(0.0, v.norm() - radius);
}

// min over the box of |M(x - c)|, M the complement projector. The minimum of
// a convex quadratic over a box is attained at the least-squares point of
// some face; enumerate the 3^N faces and keep feasible candidates.
double Tube::dist_box(const Vec& lo, const Vec& hi) const {
  const int N = int(lo.size());
  if (basis.cols() == 0) {
    Vec p = center.cwiseMax(lo).cwiseMin(hi);
    return std::max(0.0, (p - center).norm() - radius);
  }
  Mat M = complement_projector(basis, N);
  int faces = 1;
  for (int i = 0; i < N; ++i) faces *= 3;
  double best = kInf;
  for (int f = 0; f < faces; ++f) {
    int t = f;
    std::vector<int> kind(N), freev;
    Vec x = Vec::Zero(N);
    for (int i = 0; i < N; ++i) {
      kind[i] = t % 3;
      t /= 3;
      if (kind[i] == 0) freev.push_back(i);
      else x[i] = kind[i] == 1 ? lo[i] : hi[i];
    }
    if (!freev.empty()) {
      Mat mf(N, freev.size());
      for (size_t j = 0; j < freev.size(); ++j) mf.col(j) = M.col(freev[j]);
      Vec r = M * (x - center);
      Vec y = -mf.completeOrthogonalDecomposition().solve(r);
      bool ok = true;
      for (size_t j = 0; j < freev.size(); ++j) {
        int i = freev[j];
        if (y[j] < lo[i] - 1e-15 || y[j] > hi[i] + 1e-15) ok = false;
        x[i] = std::min(hi[i], std::max(lo[i], y[j]));
      }
      if (!ok) continue;
    }
    best = std::min(best, (M * (x - center)).norm());
  }
  return std::max(0.0, best - radius);
}

bool Tube::contains_box(const Vec& lo, const Vec& hi) const {
  const int N = int(lo.size());
  for (int v = 0; v < (1 << N); ++v) {
    Vec x(N);
    for (int i = 0; i < N; ++i) x[i] = (v >> i & 1) ? hi[i] : lo[i];
    if (dist(x) > 0) return false;
  }
  return true;
}

ClosedSet& ClosedSet::add(Tube t) {
  if (t.center.size() != N_ || t.basis.rows() != N_) fail(ErrorKind::Shape, "set component has wrong dimension");
  if (t.radius < 0) fail(ErrorKind::Validation, "negative radius");
  t.basis = orthonormal(t.basis);
  parts_.push_back(std::move(t));
  return *this;
}

ClosedSet& ClosedSet::add_point(const Vec& p) { return add({p, Mat(N_, 0), 0}); }
ClosedSet& ClosedSet::add_ball(const Vec& c, double r) { return add({c, Mat(N_, 0), r}); }
ClosedSet& ClosedSet::add_subspace(const Mat& b) { return add({Vec::Zero(N_), b, 0}); }
ClosedSet& ClosedSet::add_tube(const Mat& b, double r) { return add({Vec::Zero(N_), b, r}); }

ClosedSet ClosedSet::united(const ClosedSet& o) const {
  if (o.N_ != N_) fail(ErrorKind::Shape, "union of sets in different dimensions");
  ClosedSet u = *this;
  for (auto& p : o.parts_) u.parts_.push_back(p);
  return u;
}

double ClosedSet::dist(const Vec& x) const {
  double d = kInf;
  for (auto& p : parts_) d = std::min(d, p.dist(x));
  return d;
}

double ClosedSet::dist_box(const Vec& lo, const Vec& hi) const {
  double d = kInf;
  for (auto& p : parts_) d = std::min(d, p.dist_box(lo, hi));
  return d;
}

bool ClosedSet::contains_box(const Vec& lo, const Vec& hi) const {
  for (auto& p : parts_)
    if (p.contains_box(lo, hi)) return true;
  return false;
}

void ClosedSet::check_invariant(const CyclicAction& a, double radius, int samples, unsigned seed) const {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-radius, radius);
  for (int s = 0; s < samples; ++s) {
    Vec x(N_);
    for (int i = 0; i < N_; ++i) x[i] = u(rng);
    if (std::abs(dist(a.A * x) - dist(x)) > 1e-10) fail(ErrorKind::Validation, "closed set is not invariant under the action");
  }
}

ClosedSet ClosedSet::from_json(const nlohmann::json& j) {
  ClosedSet s(j.at("dim").get<int>());
  const int N = s.N_;
  auto vec = [&](const nlohmann::json& a) {
    auto v = a.get<std::vector<double>>();
    if (int(v.size()) != N) fail(ErrorKind::Shape, "vector has wrong dimension");
    return Vec(Eigen::Map<Vec>(v.data(), N));
  };
  auto basis = [&](const nlohmann::json& a) {
    Mat b(N, a.size());
    for (size_t c = 0; c < a.size(); ++c) b.col(c) = vec(a[c]);
    return b;
  };
  for (auto& p : j.value("parts", nlohmann::json::array())) {
    std::string t = p.at("type").get<std::string>();
    if (t == "point") s.add_point(vec(p.at("at")));
    else if (t == "ball") s.add_ball(vec(p.at("center")), p.at("radius").get<double>());
    else if (t == "subspace") s.add_subspace(basis(p.at("basis")));
    else if (t == "tube") s.add_tube(basis(p.at("basis")), p.at("radius").get<double>());
    else fail(ErrorKind::Validation, "unknown set component '" + t + "'");
  }
  return s;
}

// ---------------------------------------------------------------------------

WhitneyDecomposition::WhitneyDecomposition(const ClosedSet& X, double L, int min_depth, int max_depth)
    : X_(X), N_(X.dim()), L_(L), min_depth_(min_depth), max_depth_(max_depth) {
  if (N_ < 1 || N_ > 3) fail(ErrorKind::Unsupported, "Whitney decompositions are supported for N <= 3");
  if (!(L > 0)) fail(ErrorKind::Validation, "box half width must be positive");
  if (min_depth < 0 || max_depth < min_depth || max_depth > 20) fail(ErrorKind::Validation, "bad depth range");
  unit_count_ = 1L << max_depth_;
  build();
}

std::array<long, 3> WhitneyDecomposition::extent(const std::array<long, 3>& c, int depth, Vec& lo, Vec& hi) const {
  const long s = 1L << (max_depth_ - depth);
  const double u = 2 * L_ / double(unit_count_);
  lo.resize(N_);
  hi.resize(N_);
  for (int i = 0; i < N_; ++i) {
    lo[i] = -L_ + u * c[i];
    hi[i] = -L_ + u * (c[i] + s);
  }
  return {s, s, s};
}

double WhitneyDecomposition::side(const Cube& c) const { return 2 * L_ / double(1L << c.depth); }

Vec WhitneyDecomposition::lower(const Cube& c) const {
  Vec lo, hi;
  extent(c.corner, c.depth, lo, hi);
  return lo;
}

Vec WhitneyDecomposition::center(const Cube& c) const { return lower(c) + Vec::Constant(N_, side(c) / 2); }

void WhitneyDecomposition::build() {
  struct Item {
    int node;
    std::array<long, 3> corner;
    int depth;
  };
  nodes_.push_back({});
  std::vector<Item> stack{{0, {0, 0, 0}, 0}};
  const int nc = 1 << N_;
  while (!stack.empty()) {
    Item it = stack.back();
    stack.pop_back();
    Vec lo, hi;
    long s = extent(it.corner, it.depth, lo, hi)[0];
    long vol = 1;
    for (int i = 0; i < N_; ++i) vol *= s;
    if (X_.contains_box(lo, hi)) {
      nodes_[it.node].state = 2;
      inside_volume_ += vol;
      continue;
    }
    double dq = X_.dist_box(lo, hi);
    double diam = (hi[0] - lo[0]) * std::sqrt(double(N_));
    if (it.depth >= min_depth_ && dq >= diam) {
      nodes_[it.node].state = 1;
      nodes_[it.node].cube = int(cubes_.size());
      cubes_.push_back({it.corner, it.depth});
      cube_dist_.push_back(dq);
      top_far_.push_back(dq > 4 * diam && it.depth == min_depth_);
      continue;
    }
    if (it.depth == max_depth_) {
      nodes_[it.node].state = 3;
      unresolved_volume_ += vol;
      unresolved_cells_++;
      continue;
    }
    int first = int(nodes_.size());
    nodes_[it.node].child = first;
    nodes_.resize(nodes_.size() + nc);
    long h = s / 2;
    for (int c = 0; c < nc; ++c) {
      std::array<long, 3> cc = it.corner;
      for (int i = 0; i < N_; ++i)
        if (c >> i & 1) cc[i] += h;
      stack.push_back({first + c, cc, it.depth + 1});
    }
  }
  if (unresolved_cells_ > 0)
    warnings_.push_back("max depth reached next to X in " + std::to_string(unresolved_cells_) +
                        " cells (cubes accumulate at X)");
}

std::vector<int> WhitneyDecomposition::star_containing(const Vec& x) const {
  std::vector<int> out;
  struct Item {
    int node;
    std::array<long, 3> corner;
    int depth;
  };
  std::vector<Item> stack{{0, {0, 0, 0}, 0}};
  const int nc = 1 << N_;
  while (!stack.empty()) {
    Item it = stack.back();
    stack.pop_back();
    const Node& nd = nodes_[it.node];
    if (nd.state == 2 || nd.state == 3) continue;
    Vec lo, hi;
    long s = extent(it.corner, it.depth, lo, hi)[0];
    double side = hi[0] - lo[0];
    double pad = side / 16;
    bool in = true;
    for (int i = 0; i < N_; ++i) in = in && x[i] > lo[i] - pad && x[i] < hi[i] + pad;
    if (!in) continue;
    if (nd.state == 1) {
      out.push_back(nd.cube);
      continue;
    }
    long h = s / 2;
    for (int c = 0; c < nc; ++c) {
      std::array<long, 3> cc = it.corner;
      for (int i = 0; i < N_; ++i)
        if (c >> i & 1) cc[i] += h;
      stack.push_back({nd.child + c, cc, it.depth + 1});
    }
  }
  return out;
}

std::vector<int> WhitneyDecomposition::touching(int ci) const {
  const Cube& q = cubes_[ci];
  const long qs = 1L << (max_depth_ - q.depth);
  std::vector<int> out;
  struct Item {
    int node;
    std::array<long, 3> corner;
    int depth;
  };
  std::vector<Item> stack{{0, {0, 0, 0}, 0}};
  const int nc = 1 << N_;
  while (!stack.empty()) {
    Item it = stack.back();
    stack.pop_back();
    const Node& nd = nodes_[it.node];
    if (nd.state == 2 || nd.state == 3) continue;
    long s = 1L << (max_depth_ - it.depth);
    bool meet = true;
    for (int i = 0; i < N_; ++i) meet = meet && it.corner[i] <= q.corner[i] + qs && q.corner[i] <= it.corner[i] + s;
    if (!meet) continue;
    if (nd.state == 1) {
      if (nd.cube != ci) out.push_back(nd.cube);
      continue;
    }
    long h = s / 2;
    for (int c = 0; c < nc; ++c) {
      std::array<long, 3> cc = it.corner;
      for (int i = 0; i < N_; ++i)
        if (c >> i & 1) cc[i] += h;
      stack.push_back({nd.child + c, cc, it.depth + 1});
    }
  }
  return out;
}

WhitneyReport WhitneyDecomposition::check() const {
  WhitneyReport r;
  r.cubes = long(cubes_.size());
  r.unresolved_cells = unresolved_cells_;
  long total = 1, vol = inside_volume_ + unresolved_volume_;
  for (int i = 0; i < N_; ++i) total *= unit_count_;
  r.min_ratio = kInf;
  r.max_ratio = 0;
  long bound = 1;
  for (int i = 0; i < N_; ++i) bound *= 12;
  for (size_t c = 0; c < cubes_.size(); ++c) {
    const Cube& q = cubes_[c];
    long s = 1L << (max_depth_ - q.depth), v = 1;
    for (int i = 0; i < N_; ++i) v *= s;
    vol += v;
    double ratio = cube_dist_[c] / diam(q);
    if (top_far_[c]) {
      r.top_level_far++;
    } else {
      r.min_ratio = std::min(r.min_ratio, ratio);
      r.max_ratio = std::max(r.max_ratio, ratio);
      if (ratio < 1 - 1e-12 || ratio > 4 + 1e-12) r.ratio_violations++;
    }
    auto t = touching(int(c));
    r.max_touching = std::max(r.max_touching, int(t.size()));
    for (int o : t) {
      const Cube& p = cubes_[o];
      long ps = 1L << (max_depth_ - p.depth);
      bool overlap = true;
      for (int i = 0; i < N_; ++i) overlap = overlap && p.corner[i] < q.corner[i] + s && q.corner[i] < p.corner[i] + ps;
      if (overlap) r.overlaps++;
      double ratio2 = double(ps) / double(s);
      if (ratio2 < 0.25 || ratio2 > 4) r.neighbour_violations++;
    }
  }
  if (cubes_.empty()) r.min_ratio = 0;
  r.coverage = vol == total;
  r.touching_ok = r.max_touching <= bound;
  return r;
}

WhitneyDecomposition whitney_decompose(const ClosedSet& X, double L, int min_depth, int max_depth) {
  return WhitneyDecomposition(X, L, min_depth, max_depth);
}

double cube_bump(const Vec& t) {
  double p = 1;
  for (int i = 0; i < t.size(); ++i) {
    p *= smooth_step((kBumpOuter - std::abs(t[i])) / (kBumpOuter - 0.5));
    if (p == 0) return 0;
  }
  return p;
}

double lower_constant(int N) { return 1.0 / (6 * std::pow(12.0, N)); }
double upper_constant(int N) { return 4.0 / 3 * std::pow(12.0, N); }

// ---------------------------------------------------------------------------

RegularizedDistance::RegularizedDistance(ClosedSet Y, Mat E, std::optional<CyclicAction> A, double L, int max_depth)
    : N_(Y.dim()), Y_(std::move(Y)), X_(N_), A_(std::move(A)), L_(L) {
  if (E.rows() != N_) fail(ErrorKind::Shape, "subspace basis has wrong dimension");
  E_ = orthonormal(E);
  PE_ = E_.cols() > 0 ? Mat(E_ * E_.transpose()) : Mat::Zero(N_, N_);
  if (E_.cols() > 0) X_.add_subspace(E_);
  else X_.add_point(Vec::Zero(N_));
  X_ = Y_.united(X_);
  if (A_) {
    A_->validate();
    if (A_->A.rows() != N_) fail(ErrorKind::Shape, "action has wrong dimension");
    Y_.check_invariant(*A_, L_);
    if (E_.cols() > 0 && ((Mat::Identity(N_, N_) - PE_) * A_->A * E_).norm() > 1e-10)
      fail(ErrorKind::Validation, "subspace is not invariant under the action");
  }
  if (max_depth < 0) max_depth = N_ <= 2 ? 14 : 10;
  wd_ = std::make_unique<WhitneyDecomposition>(X_, L_, 0, max_depth);
  const auto& cubes = wd_->cubes();
  fu_.resize(cubes.size());
  for (size_t c = 0; c < cubes.size(); ++c) {
    // Conservative test for Q* in U: sup over Q* of dist(., E) below dist(Q*, Y).
    double s = wd_->side(cubes[c]);
    Vec ctr = wd_->center(cubes[c]);
    Vec lo = ctr - Vec::Constant(N_, 9 * s / 16), hi = ctr + Vec::Constant(N_, 9 * s / 16);
    double sup_e = 0;
    for (int v = 0; v < (1 << N_); ++v) {
      Vec x(N_);
      for (int i = 0; i < N_; ++i) x[i] = (v >> i & 1) ? hi[i] : lo[i];
      sup_e = std::max(sup_e, dist_e(x));
    }
    fu_[c] = sup_e < Y_.dist_box(lo, hi);
  }
}

double RegularizedDistance::dist_e(const Vec& x) const { return (x - PE_ * x).norm(); }

bool RegularizedDistance::in_coincidence_region(const Vec& x) const { return 4 * dist_e(x) < dist_y(x); }

int RegularizedDistance::in_fu() const {
  int c = 0;
  for (char f : fu_) c += f;
  return c;
}

RegularizedDistance::Eval RegularizedDistance::eval_hat(const Vec& x) const {
  Eval e;
  if (x.size() != N_) fail(ErrorKind::Shape, "query has wrong dimension");
  if (x.cwiseAbs().maxCoeff() > L_) fail(ErrorKind::Domain, "query outside the decomposition box");
  if (X_.contains(x)) {
    e.in_x = true;
    return e;
  }
  const auto& cubes = wd_->cubes();
  auto stars = wd_->star_containing(x);
  e.stars = int(stars.size());
  double phi = 0, delta = 0, de = dist_e(x);
  for (int c : stars) {
    double s = wd_->side(cubes[c]);
    double b = cube_bump((x - wd_->center(cubes[c])) / s);
    phi += b;
    delta += (fu_[c] ? de : wd_->diam(cubes[c])) * b;
  }
  e.phi = phi;
  if (phi > 0) {
    e.value = delta / phi;
    return e;
  }
  if (in_coincidence_region(x)) {
    e.value = de;
    e.clamped = true;
    return e;
  }
  fail(ErrorKind::Resolution, "query lies below the decomposition depth; increase max_depth");
}

double RegularizedDistance::value(const Vec& x) const {
  if (!A_) return eval_hat(x).value;
  double s = 0;
  Vec y = x;
  for (int i = 0; i < A_->k; ++i) {
    s += eval_hat(y).value;
    y = A_->A * y;
  }
  return s / A_->k;
}

Vec RegularizedDistance::gradient(const Vec& x, double h) const {
  Vec g(N_);
  for (int i = 0; i < N_; ++i) {
    Vec a = x, b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = (value(a) - value(b)) / (2 * h);
  }
  return g;
}

Mat RegularizedDistance::hessian(const Vec& x, double h) const {
  Mat H(N_, N_);
  double f0 = value(x);
  for (int i = 0; i < N_; ++i) {
    for (int j = i; j < N_; ++j) {
      if (i == j) {
        Vec a = x, b = x;
        a[i] += h;
        b[i] -= h;
        H(i, i) = (value(a) - 2 * f0 + value(b)) / (h * h);
        continue;
      }
      Vec pp = x, pm = x, mp = x, mm = x;
      pp[i] += h; pp[j] += h;
      pm[i] += h; pm[j] -= h;
      mp[i] -= h; mp[j] += h;
      mm[i] -= h; mm[j] -= h;
      H(i, j) = H(j, i) = (value(pp) - value(pm) - value(mp) + value(mm)) / (4 * h * h);
    }
  }
  return H;
}

}  // namespace equimorse::regdist
