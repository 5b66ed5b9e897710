#include "equimorse/field.hpp"

#include <cmath>
#include <random>

#include "equimorse/exactalg.hpp"

namespace equimorse {

Vec Field::gradient(const Vec& z) const {
  const int d = dim();
  Vec g(d);
  for (int i = 0; i < d; ++i) {
    double h = 1e-6 * std::max(1.0, std::abs(z[i]));
    Vec a = z, b = z;
    a[i] += h;
    b[i] -= h;
    g[i] = (value(a) - value(b)) / (2 * h);
  }
  return g;
}

Mat Field::hessian(const Vec& z) const {
  const int d = dim();
  Mat h(d, d);
  for (int i = 0; i < d; ++i) {
    double s = 1e-5 * std::max(1.0, std::abs(z[i]));
    Vec a = z, b = z;
    a[i] += s;
    b[i] -= s;
    h.col(i) = (gradient(a) - gradient(b)) / (2 * s);
  }
  return 0.5 * (h + h.transpose());
}

Polynomial::Polynomial(int d, std::vector<Term> terms) : d_(d), terms_(std::move(terms)) {
  for (auto& t : terms_)
    if (int(t.e.size()) != d_) fail(ErrorKind::Shape, "monomial exponent length does not match dimension");
}

namespace {

double ipow(double x, int e) {
  double r = 1;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

}  // namespace

double Polynomial::value(const Vec& z) const {
  double s = 0;
  for (auto& t : terms_) {
    double m = t.c;
    for (int i = 0; i < d_; ++i) m *= ipow(z[i], t.e[i]);
    s += m;
  }
  return s;
}

Vec Polynomial::gradient(const Vec& z) const {
  Vec g = Vec::Zero(d_);
  for (auto& t : terms_)
    for (int i = 0; i < d_; ++i) {
      if (t.e[i] == 0) continue;
      double m = t.c * t.e[i];
      for (int l = 0; l < d_; ++l) m *= ipow(z[l], l == i ? t.e[l] - 1 : t.e[l]);
      g[i] += m;
    }
  return g;
}

Mat Polynomial::hessian(const Vec& z) const {
  Mat h = Mat::Zero(d_, d_);
  for (auto& t : terms_)
    for (int i = 0; i < d_; ++i)
      for (int j = i; j < d_; ++j) {
        std::vector<int> e = t.e;
        double m = t.c;
        if (e[i] == 0) continue;
        m *= e[i];
        e[i]--;
        if (e[j] == 0) continue;
        m *= e[j];
        e[j]--;
        for (int l = 0; l < d_; ++l) m *= ipow(z[l], e[l]);
        h(i, j) += m;
        if (i != j) h(j, i) += m;
      }
  return h;
}

int Polynomial::min_degree() const {
  int m = 1 << 20;
  for (auto& t : terms_) {
    int s = 0;
    for (int x : t.e) s += x;
    if (t.c != 0) m = std::min(m, s);
  }
  return m;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  if (o.d_ != d_ && !terms_.empty() && !o.terms_.empty()) fail(ErrorKind::Shape, "polynomial dimension mismatch");
  Polynomial r = *this;
  if (r.d_ == 0) r.d_ = o.d_;
  r.terms_.insert(r.terms_.end(), o.terms_.begin(), o.terms_.end());
  return r;
}

Polynomial Polynomial::scaled(double s) const {
  Polynomial r = *this;
  for (auto& t : r.terms_) t.c *= s;
  return r;
}

Polynomial Polynomial::from_json(const nlohmann::json& j) {
  if (!j.contains("d") || !j.contains("terms")) fail(ErrorKind::Validation, "polynomial needs 'd' and 'terms'");
  int d = j.at("d").get<int>();
  if (d < 1) fail(ErrorKind::Validation, "polynomial dimension must be positive");
  std::vector<Term> terms;
  for (auto& t : j.at("terms")) {
    Term term;
    const auto& c = t.at("c");
    if (c.is_string()) term.c = exactalg::parse_rational(c.get<std::string>()).get_d();
    else term.c = c.get<double>();
    term.e = t.at("m").get<std::vector<int>>();
    for (int x : term.e)
      if (x < 0) fail(ErrorKind::Validation, "negative exponent");
    terms.push_back(term);
  }
  return Polynomial(d, terms);
}

nlohmann::json Polynomial::to_json() const {
  nlohmann::json j;
  j["d"] = d_;
  j["terms"] = nlohmann::json::array();
  for (auto& t : terms_) j["terms"].push_back({{"c", t.c}, {"m", t.e}});
  return j;
}

void CyclicAction::validate() const {
  if (k < 1) fail(ErrorKind::Validation, "action order must be positive");
  if (A.rows() != A.cols()) fail(ErrorKind::Shape, "action matrix must be square");
  const int d = int(A.rows());
  if ((A.transpose() * A - Mat::Identity(d, d)).norm() > 1e-10) fail(ErrorKind::Validation, "action matrix is not orthogonal");
  if ((power(k) - Mat::Identity(d, d)).norm() > 1e-10) fail(ErrorKind::Validation, "action matrix does not satisfy A^k = I");
}

Mat CyclicAction::power(int j) const {
  Mat p = Mat::Identity(A.rows(), A.cols());
  for (int i = 0; i < j; ++i) p = p * A;
  return p;
}

bool CyclicAction::is_signed_permutation(double tol) const {
  for (int i = 0; i < A.rows(); ++i) {
    int nz = 0;
    for (int j = 0; j < A.cols(); ++j) {
      double a = std::abs(A(i, j));
      if (a > tol) {
        if (std::abs(a - 1) > tol) return false;
        nz++;
      }
    }
    if (nz != 1) return false;
  }
  return true;
}

CyclicAction CyclicAction::from_json(const nlohmann::json& j) {
  CyclicAction a;
  a.k = j.value("k", 1);
  auto rows = j.at("matrix");
  const int d = int(rows.size());
  a.A = Mat::Zero(d, d);
  for (int r = 0; r < d; ++r) {
    if (int(rows[r].size()) != d) fail(ErrorKind::Shape, "action matrix must be square");
    for (int c = 0; c < d; ++c) {
      const auto& v = rows[r][c];
      a.A(r, c) = v.is_string() ? exactalg::parse_rational(v.get<std::string>()).get_d() : v.get<double>();
    }
  }
  a.validate();
  return a;
}

nlohmann::json CyclicAction::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < A.rows(); ++r) {
    std::vector<double> row(A.cols());
    for (int c = 0; c < A.cols(); ++c) row[c] = A(r, c);
    rows.push_back(row);
  }
  return {{"k", k}, {"matrix", rows}};
}

void FunctionSpec::validate(double radius, int samples, unsigned seed) const {
  if (!f) fail(ErrorKind::Validation, "function missing");
  const int d = dim();
  Vec g0 = f->gradient(Vec::Zero(d));
  if (g0.norm() > 1e-10) fail(ErrorKind::Validation, "0 is not a critical point");
  if (!action) return;
  if (action->A.rows() != d) fail(ErrorKind::Shape, "action dimension does not match function");
  action->validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-radius, radius);
  for (int s = 0; s < samples; ++s) {
    Vec z(d);
    for (int i = 0; i < d; ++i) z[i] = u(rng);
    if (std::abs(f->value(action->A * z) - f->value(z)) > 1e-10) fail(ErrorKind::Validation, "function is not invariant under the action");
  }
}

FunctionSpec FunctionSpec::from_json(const nlohmann::json& j) {
  FunctionSpec s;
  s.f = std::make_shared<Polynomial>(Polynomial::from_json(j));
  if (j.contains("action")) s.action = CyclicAction::from_json(j.at("action"));
  s.validate();
  return s;
}

Mat rotation2(double angle) {
  Mat r(2, 2);
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

}  // namespace equimorse
