#include "equimorse/iterthy.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include "equimorse/dact.hpp"
#include "equimorse/linalg.hpp"

namespace equimorse::iterthy {

using hamflow::HamiltonianGerm;

int choose_N(const HamiltonianGerm& g, int k, int max_N) {
  if (k < 1) fail(ErrorKind::Validation, "period must be positive");
  // Even step counts keep the shift orientation-compatible on the normal bundle of the diagonal.
  for (int N = 2; N <= max_N; N += 2)
    if (hamflow::adapted_N(g, N) && hamflow::step_homotopy_ok(g, N)) return N;
  fail(ErrorKind::Configuration, "no adapted step count N <= " + std::to_string(max_N));
}

FloerHomology local_floer_homology(const HamiltonianGerm& g, int k, const FloerOptions& opt) {
  FloerHomology out;
  out.k = k;
  out.N = choose_N(g, k, opt.max_N);
  auto da = std::make_shared<dact::DiscreteAction>(g, k, out.N);
  FunctionSpec fs{da, std::nullopt};
  if (k > 1) fs.action = CyclicAction{da->shift_matrix(), k};
  lochom::LocalHomologyOptions lo;
  lo.radius = opt.radius;
  auto lh = lochom::local_homology(fs, lo);
  out.shift = g.n() * k * out.N;
  out.plain = exactalg::shift_betti(lh.plain, -out.shift);
  out.invariant = lh.invariant ? exactalg::shift_betti(*lh.invariant, -out.shift) : out.plain;
  out.kernel_dim = lh.kernel_dim;
  out.orientation_preserved = lh.orientation_preserved;
  return out;
}

int cz(const HamiltonianGerm& g, int k) { return spindex::cz_index(spindex::SymplecticPath::from_germ(g, k)); }

PersistenceReport persistence_check(const HamiltonianGerm& g, int m, int k, const FloerOptions& opt) {
  if (m < 1 || k < 1) fail(ErrorKind::Validation, "m and k must be positive");
  PersistenceReport r;
  r.m = m;
  r.k = k;
  r.cls = spindex::classify_iteration(hamflow::linear_flow(g, 0, m), k);
  if (!r.cls.admissible) {
    r.skipped = "k = " + std::to_string(k) + " is not admissible for the time-" + std::to_string(m) + " map";
    return r;
  }
  r.cz_m = cz(g, m);
  r.cz_km = cz(g, k * m);
  r.shift = r.cz_km - r.cz_m;
  r.at_m = local_floer_homology(g, m, opt);
  r.at_km = local_floer_homology(g, k * m, opt);
  r.plain_checked = true;
  r.plain_match = r.at_km.plain == exactalg::shift_betti(r.at_m.plain, r.shift);
  if (r.cls.good) {
    r.invariant_checked = true;
    r.invariant_match = r.at_km.invariant == exactalg::shift_betti(r.at_m.invariant, r.shift);
  } else {
    r.skipped = "k is bad; invariant comparison skipped";
  }
  return r;
}

std::vector<FixedPoint> fixed_points(const HamiltonianGerm& g, int d, double radius, const Vec& v, double eps) {
  const int dim = 2 * g.n();
  const int per = dim == 2 ? 9 : dim == 4 ? 5 : 3;
  long total = 1;
  for (int i = 0; i < dim; ++i) total *= per;
  const Mat I = Mat::Identity(dim, dim);
  std::vector<FixedPoint> out;
  for (int sc = 0; sc < 4; ++sc) {
    double r = radius * std::pow(0.25, sc);
    for (long idx = 0; idx < total; ++idx) {
      long t = idx;
      Vec z(dim);
      for (int i = 0; i < dim; ++i) {
        z[i] = -r + 2 * r * (double(t % per) + 0.5) / per;
        t /= per;
      }
      if (z.norm() > radius) continue;
      bool ok = false;
      try {
        for (int it = 0; it < 40; ++it) {
          auto fr = hamflow::integrate_flow(g, 0, d, z, true);
          Vec G = z - fr.z - eps * v;
          Eigen::FullPivLU<Mat> lu(I - fr.jac);
          if (!lu.isInvertible()) break;
          Vec step = lu.solve(G);
          if (step.norm() > radius) step *= radius / step.norm();
          z -= step;
          if (z.norm() > 1.5 * radius) break;
          if (step.norm() < 1e-13) {
            ok = (z - hamflow::integrate_flow(g, 0, d, z, false).z - eps * v).norm() < 1e-3 * eps + 1e-13;
            break;
          }
        }
      } catch (const Error&) {
        ok = false;
      }
      if (!ok || z.norm() > radius) continue;
      bool dup = false;
      for (auto& p : out) dup = dup || (p.z - z).norm() < 1e-8;
      if (dup) continue;
      auto fr = hamflow::integrate_flow(g, 0, d, z, true);
      double det = (I - fr.jac).determinant();
      out.push_back({z, det > 0 ? 1 : det < 0 ? -1 : 0});
    }
  }
  return out;
}

IndexReport fixed_point_index(const HamiltonianGerm& g, int d, double radius, unsigned seed) {
  if (d < 1) fail(ErrorKind::Validation, "iterate must be positive");
  const int dim = 2 * g.n();
  IndexReport r;
  Mat M = hamflow::linear_flow(g, 0, d);
  double det = (Mat::Identity(dim, dim) - M).determinant();
  if (std::abs(det) > 1e-8) {
    r.index = det > 0 ? 1 : -1;
    return r;
  }
  r.degenerate = true;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0, 1);
  // Smallest displacement on the sphere bounds the admissible perturbation.
  double mmin = std::numeric_limits<double>::infinity();
  for (int s = 0; s < 256; ++s) {
    Vec u(dim);
    if (dim == 2) {
      u << std::cos(2 * M_PI * s / 256), std::sin(2 * M_PI * s / 256);
    } else {
      for (int i = 0; i < dim; ++i) u[i] = nd(rng);
      u.normalize();
    }
    Vec z = radius * u;
    mmin = std::min(mmin, (z - hamflow::integrate_flow(g, 0, d, z, false).z).norm());
  }
  if (!(mmin > 1e-10)) fail(ErrorKind::Isolation, "fixed points reach the sphere of radius " + std::to_string(radius));
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = nd(rng);
  v.normalize();
  r.eps = 0.1 * mmin;
  auto count = [&](double eps) {
    int c = 0;
    for (auto& p : fixed_points(g, d, radius, v, eps)) c += p.sign;
    return c;
  };
  r.count_eps = count(r.eps);
  r.count_half = count(0.5 * r.eps);
  if (r.count_eps != r.count_half)
    fail(ErrorKind::Instability, "perturbed fixed point count changes between eps and eps/2 (" +
                                     std::to_string(r.count_eps) + " vs " + std::to_string(r.count_half) + ")");
  r.index = r.count_eps;
  return r;
}

long totient(long n) {
  if (n < 1) fail(ErrorKind::Validation, "totient of a non-positive integer");
  long r = n;
  for (long p = 2; p * p <= n; ++p) {
    if (n % p) continue;
    while (n % p == 0) n /= p;
    r -= r / p;
  }
  if (n > 1) r -= r / n;
  return r;
}

EulerReport euler_lefschetz(const HamiltonianGerm& g, int j, const FloerOptions& opt) {
  if (j < 1) fail(ErrorKind::Validation, "period must be positive");
  EulerReport r;
  r.j = j;
  r.sigma = g.n() % 2 ? -1 : 1;
  mpq_class s = 0;
  for (int d : divisors(j)) {
    int i = fixed_point_index(g, d).index;
    r.indices.push_back({d, i});
    s += totient(j / d) * i;
  }
  r.chi_formula = s / j;
  r.chi_formula.canonicalize();
  auto h = local_floer_homology(g, j, opt);
  r.invariant = h.invariant;
  r.chi_direct = exactalg::euler_characteristic(h.invariant);
  r.match = r.chi_formula == mpq_class(r.sigma * r.chi_direct);
  return r;
}

SubordinationReport subordination_structure(const HamiltonianGerm& g, int j_max, const FloerOptions& opt) {
  if (j_max < 1) fail(ErrorKind::Validation, "j_max must be positive");
  SubordinationReport r;
  std::vector<int> nu(j_max + 1, 0);
  for (int j = 1; j <= j_max; ++j) nu[j] = spindex::nullity(hamflow::linear_flow(g, 0, j));
  for (int j = 1; j <= j_max; ++j) {
    bool jump = true;
    for (int d : divisors(j))
      if (d < j) jump = jump && nu[j] > nu[d];
    if (jump) r.J.push_back(j);
  }
  auto inJ = [&](int j) { return std::find(r.J.begin(), r.J.end(), j) != r.J.end(); };
  for (int a : r.J)
    for (int b : r.J) {
      int l = std::lcm(a, b);
      if (l <= j_max && !inJ(l)) r.lcm_closed = false;
    }
  for (int j = 1; j <= j_max; ++j) {
    int q = 1;
    for (int d : divisors(j))
      if (inJ(d)) q = std::max(q, d);
    r.q.push_back(q);
    try {
      r.iota.push_back(exactalg::total_rank(local_floer_homology(g, j, opt).invariant));
    } catch (const Error& e) {
      r.iota.push_back(-1);
      r.failures.push_back("j = " + std::to_string(j) + ": " + error_kind_name(e.kind()) + ": " + e.what());
    }
  }
  for (int j = 1; j <= j_max; ++j) {
    int a = r.iota[j - 1], b = r.iota[r.q[j - 1] - 1];
    if (a >= 0 && b >= 0 && a != b) r.check = false;
  }
  return r;
}

nlohmann::json to_json(const FloerHomology& h) {
  return {{"k", h.k},
          {"N", h.N},
          {"shift", h.shift},
          {"betti", exactalg::betti_to_json(h.plain)},
          {"invariant_betti", exactalg::betti_to_json(h.invariant)},
          {"kernel_dim", h.kernel_dim},
          {"orientation_preserved", h.orientation_preserved}};
}

nlohmann::json to_json(const PersistenceReport& r) {
  nlohmann::json j = {{"m", r.m},
                      {"k", r.k},
                      {"admissible", r.cls.admissible},
                      {"good", r.cls.good},
                      {"ok", r.ok()}};
  if (!r.skipped.empty()) j["skipped"] = r.skipped;
  if (!r.plain_checked) return j;
  j["cz_m"] = r.cz_m;
  j["cz_km"] = r.cz_km;
  j["shift"] = r.shift;
  j["at_m"] = to_json(r.at_m);
  j["at_km"] = to_json(r.at_km);
  j["plain_match"] = r.plain_match;
  if (r.invariant_checked) j["invariant_match"] = r.invariant_match;
  return j;
}

nlohmann::json to_json(const IndexReport& r) {
  nlohmann::json j = {{"index", r.index}, {"degenerate", r.degenerate}};
  if (r.degenerate) {
    j["eps"] = r.eps;
    j["count_eps"] = r.count_eps;
    j["count_half_eps"] = r.count_half;
  }
  return j;
}

nlohmann::json to_json(const EulerReport& r) {
  nlohmann::json idx = nlohmann::json::object();
  for (auto [d, i] : r.indices) idx[std::to_string(d)] = i;
  return {{"j", r.j},
          {"chi_formula", r.chi_formula.get_str()},
          {"chi_direct", r.chi_direct},
          {"sigma", r.sigma},
          {"match", r.match},
          {"fixed_point_indices", idx},
          {"invariant_betti", exactalg::betti_to_json(r.invariant)}};
}

nlohmann::json to_json(const SubordinationReport& r) {
  nlohmann::json iota = nlohmann::json::object();
  for (size_t j = 0; j < r.iota.size(); ++j)
    iota[std::to_string(j + 1)] = r.iota[j] >= 0 ? nlohmann::json(r.iota[j]) : nlohmann::json(nullptr);
  nlohmann::json q = nlohmann::json::object();
  for (size_t j = 0; j < r.q.size(); ++j) q[std::to_string(j + 1)] = r.q[j];
  return {{"J", r.J}, {"iota", iota}, {"q", q}, {"lcm_closed", r.lcm_closed}, {"check", r.check},
          {"failures", r.failures}};
}

}  // namespace equimorse::iterthy
