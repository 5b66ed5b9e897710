#include "equimorse/prodsdm.hpp"

#include <cmath>
#include <complex>
#include <random>

#include "equimorse/linalg.hpp"
#include "equimorse/spindex.hpp"

namespace equimorse::prodsdm {

GradedClass product_degree(const std::vector<GradedClass>& classes, int n) {
  if (classes.size() < 2) fail(ErrorKind::Validation, "a product needs at least two classes");
  GradedClass out;
  out.degree = -(int(classes.size()) - 1) * n;
  out.period = 0;
  out.label = "prod(";
  for (size_t i = 0; i < classes.size(); ++i) {
    if (classes[i].period < 1) fail(ErrorKind::Validation, "class period must be positive");
    out.degree += classes[i].degree;
    out.period += classes[i].period;
    out.label += (i ? "," : "") + (classes[i].label.empty() ? std::string("a") + std::to_string(i + 1) : classes[i].label);
  }
  out.label += ")";
  return out;
}

int supercommutativity_sign(int a, int b) { return (a % 2 != 0 && b % 2 != 0) ? -1 : 1; }

std::optional<int> vanishing_threshold(int degree, double delta, int n, int r_max) {
  for (int r = 1; r <= r_max; ++r) {
    double d = double(r) * degree - double(r - 1) * n;
    if (d < r * delta - n - 1e-9 || d > r * delta + n + 1e-9) return r;
  }
  return std::nullopt;
}

const char* condition_name(Condition c) {
  switch (c) {
    case Condition::A: return "a";
    case Condition::B: return "b";
    case Condition::C: return "c";
    default: return "none";
  }
}

SpecialProduct special_case_product(const Field& S, int k, double radius) {
  if (k < 1) fail(ErrorKind::Validation, "k must be positive");
  if (S.dim() % 2) fail(ErrorKind::Shape, "generating function must live on R^{2n}");
  SpecialProduct p;
  const int n = S.dim() / 2;
  p.k = k;
  p.n = n;
  p.degree_hm = n + k * n;
  p.degree = n;
  if (k == 1) {
    p.nonzero = true;
    p.reason = "single factor, no product taken";
    return p;
  }
  auto indeterminate = [&](Condition c, std::string why) {
    p.indeterminate = true;
    p.failing = c;
    p.reason = std::move(why);
    return p;
  };

  // (a) C2-small with a strict local maximum at 0.
  const Vec zero = Vec::Zero(2 * n);
  Mat h0 = symmetrize(S.hessian(zero));
  p.hessian_norm = h0.norm();
  if (S.gradient(zero).norm() > 1e-9) return indeterminate(Condition::A, "0 is not a critical point of S");
  if (!(p.hessian_norm < 0.1)) return indeterminate(Condition::A, "D^2 S(0) is not small");
  const double s0 = S.value(zero);
  std::mt19937_64 rng(0);
  std::normal_distribution<double> nd(0, 1);
  p.max_drop = -std::numeric_limits<double>::infinity();
  for (double r : {radius, 0.5 * radius, 0.25 * radius}) {
    for (int s = 0; s < 64; ++s) {
      Vec u(2 * n);
      if (n == 1) {
        u << std::cos(2 * M_PI * s / 64), std::sin(2 * M_PI * s / 64);
      } else {
        for (int i = 0; i < 2 * n; ++i) u[i] = nd(rng);
        u.normalize();
      }
      p.max_drop = std::max(p.max_drop, S.value(r * u) - s0);
    }
  }
  if (!(p.max_drop < 0)) return indeterminate(Condition::A, "0 is not a strict local maximum of S");

  // (c) Hessian of sum |x_i|^2 + S(x_i, y_{i+1}) on L, parametrized by y
  // with y_1 + ... + y_k = 0 and x_i = y_{i+1} - y_i.
  const int m = n * k;
  Mat H = Mat::Zero(m, m);
  for (int i = 0; i < k; ++i) {
    Mat X = Mat::Zero(n, m), Y = Mat::Zero(n, m);
    int nx = (i + 1) % k;
    X.block(0, n * nx, n, n) += Mat::Identity(n, n);
    X.block(0, n * i, n, n) -= Mat::Identity(n, n);
    Y.block(0, n * nx, n, n) = Mat::Identity(n, n);
    Mat P(2 * n, m);
    P << X, Y;
    H += 2 * X.transpose() * X + P.transpose() * h0 * P;
  }
  Mat sum(n, m);
  for (int i = 0; i < k; ++i) sum.block(0, n * i, n, n) = Mat::Identity(n, n);
  Mat B = kernel_basis(sum);
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(Mat(B.transpose() * H * B)), Eigen::EigenvaluesOnly);
  p.min_eig_L = es.eigenvalues().minCoeff();
  if (!(p.min_eig_L > 1e-10)) return indeterminate(Condition::C, "restricted action on L is not positive definite");
  p.nonzero = true;
  p.reason = "conditions (a), (b), (c) hold";
  return p;
}

SpecialProduct special_case_product(const hamflow::HamiltonianGerm& K, int k, double radius) {
  auto gf = std::make_shared<hamflow::GeneratingFunction>(K, 0.0, 1.0);
  const int n = K.n();
  LambdaField S(
      2 * n,
      [gf, n](const Vec& z) { return gf->eval(z.head(n), z.tail(n), hamflow::SValueMethod::Trajectory).S; },
      [gf, n](const Vec& z) {
        auto e = gf->eval_gradient(z.head(n), z.tail(n));
        Vec g(2 * n);
        g << e.d1, e.d2;
        return g;
      },
      [gf, n](const Vec& z) { return gf->hessian(z.head(n), z.tail(n)); });
  return special_case_product(S, k, radius);
}

SdmReport check_sdm(const hamflow::HamiltonianGerm& g, const iterthy::FloerOptions& opt) {
  SdmReport r;
  const int n = g.n();
  for (auto& p : iterthy::fixed_points(g, 1, 0.1, Vec::Zero(2 * n), 0.0))
    if (p.z.norm() > 1e-6)
      fail(ErrorKind::Isolation, "time-one map has a fixed point at distance " + std::to_string(p.z.norm()));
  auto mi = spindex::mean_index(g);
  r.delta = mi.delta;
  r.tolerance = mi.tolerance;
  r.delta_zero = std::abs(mi.delta) <= mi.tolerance;
  Eigen::EigenSolver<Mat> es(hamflow::linear_flow(g, 0, 1), false);
  r.totally_degenerate = true;
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    r.totally_degenerate = r.totally_degenerate && std::abs(es.eigenvalues()[i] - 1.0) <= 1e-6;
  r.homology = iterthy::local_floer_homology(g, 1, opt);
  auto it = r.homology.plain.find(n);
  r.hn_nonzero = it != r.homology.plain.end() && it->second > 0;
  r.sdm = r.delta_zero && r.hn_nonzero;
  return r;
}

nlohmann::json to_json(const GradedClass& c) {
  return {{"degree", c.degree}, {"label", c.label}, {"period", c.period}};
}

nlohmann::json to_json(const SpecialProduct& p) {
  nlohmann::json j = {{"k", p.k},
                      {"n", p.n},
                      {"nonzero", p.nonzero},
                      {"indeterminate", p.indeterminate},
                      {"reason", p.reason},
                      {"degree", p.degree},
                      {"degree_morse", p.degree_hm}};
  if (p.k > 1) {
    j["hessian_norm"] = p.hessian_norm;
    j["max_drop"] = std::isfinite(p.max_drop) ? nlohmann::json(p.max_drop) : nlohmann::json(nullptr);
    j["min_eig_L"] = p.min_eig_L;
  }
  if (p.indeterminate) j["failing_condition"] = condition_name(p.failing);
  return j;
}

nlohmann::json to_json(const SdmReport& r) {
  return {{"sdm", r.sdm},
          {"delta", r.delta},
          {"delta_tolerance", r.tolerance},
          {"delta_zero", r.delta_zero},
          {"totally_degenerate", r.totally_degenerate},
          {"hn_nonzero", r.hn_nonzero},
          {"homology", iterthy::to_json(r.homology)}};
}

}  // namespace equimorse::prodsdm
