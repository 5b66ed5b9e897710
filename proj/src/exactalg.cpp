#include "equimorse/exactalg.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include "equimorse/common.hpp"

namespace equimorse::exactalg {

Q parse_rational(const std::string& s) {
  std::string t;
  for (char c : s)
    if (c != ' ') t.push_back(c);
  if (t.empty()) fail(ErrorKind::Validation, "empty rational");
  if (t[0] == '+') t.erase(0, 1);
  auto slash = t.find('/');
  auto is_int = [](const std::string& x) {
    size_t i = (!x.empty() && x[0] == '-') ? 1 : 0;
    if (i >= x.size()) return false;
    for (; i < x.size(); ++i)
      if (x[i] < '0' || x[i] > '9') return false;
    return true;
  };
  std::string num = slash == std::string::npos ? t : t.substr(0, slash);
  std::string den = slash == std::string::npos ? "1" : t.substr(slash + 1);
  if (!is_int(num) || !is_int(den)) fail(ErrorKind::Validation, "malformed rational '" + s + "'");
  mpz_class p(num, 10), q(den, 10);
  if (q == 0) fail(ErrorKind::Validation, "zero denominator in '" + s + "'");
  Q r(p, q);
  r.canonicalize();
  return r;
}

std::string format_rational(const Q& q) {
  Q c = q;
  c.canonicalize();
  if (c.get_den() == 1) return c.get_num().get_str();
  return c.get_num().get_str() + "/" + c.get_den().get_str();
}

QMatrix QMatrix::identity(int n) {
  QMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

QMatrix QMatrix::operator*(const QMatrix& o) const {
  if (cols_ != o.rows_) fail(ErrorKind::Shape, "matrix product shape mismatch");
  QMatrix r(rows_, o.cols_);
  for (int i = 0; i < rows_; ++i)
    for (int l = 0; l < cols_; ++l) {
      const Q& a = (*this)(i, l);
      if (a == 0) continue;
      for (int j = 0; j < o.cols_; ++j)
        if (o(l, j) != 0) r(i, j) += a * o(l, j);
    }
  return r;
}

QMatrix QMatrix::operator+(const QMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) fail(ErrorKind::Shape, "matrix sum shape mismatch");
  QMatrix r = *this;
  for (size_t i = 0; i < a_.size(); ++i) r.a_[i] += o.a_[i];
  return r;
}

QMatrix QMatrix::operator-() const { return scaled(-1); }

QMatrix QMatrix::scaled(const Q& s) const {
  QMatrix r = *this;
  for (auto& x : r.a_) x *= s;
  return r;
}

bool QMatrix::operator==(const QMatrix& o) const {
  return rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_;
}

bool QMatrix::is_zero() const {
  return std::all_of(a_.begin(), a_.end(), [](const Q& x) { return x == 0; });
}

bool QMatrix::is_signed_permutation() const {
  if (rows_ != cols_) return false;
  std::vector<int> colcount(cols_, 0);
  for (int i = 0; i < rows_; ++i) {
    int nz = 0;
    for (int j = 0; j < cols_; ++j) {
      const Q& x = (*this)(i, j);
      if (x == 0) continue;
      if (x != 1 && x != -1) return false;
      nz++;
      colcount[j]++;
    }
    if (nz != 1) return false;
  }
  return std::all_of(colcount.begin(), colcount.end(), [](int c) { return c == 1; });
}

QMatrix QMatrix::columns(const std::vector<int>& idx) const {
  QMatrix r(rows_, int(idx.size()));
  for (int i = 0; i < rows_; ++i)
    for (size_t j = 0; j < idx.size(); ++j) r(i, int(j)) = (*this)(i, idx[j]);
  return r;
}

QMatrix QMatrix::hcat(const QMatrix& o) const {
  if (rows_ != o.rows_) fail(ErrorKind::Shape, "hcat row mismatch");
  QMatrix r(rows_, cols_ + o.cols_);
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) r(i, j) = (*this)(i, j);
    for (int j = 0; j < o.cols_; ++j) r(i, cols_ + j) = o(i, j);
  }
  return r;
}

namespace {

// In-place reduced row echelon form; returns pivot columns.
std::vector<int> rref(QMatrix& m) {
  std::vector<int> piv;
  int r = 0;
  for (int c = 0; c < m.cols() && r < m.rows(); ++c) {
    int p = -1;
    for (int i = r; i < m.rows(); ++i)
      if (m(i, c) != 0) {
        p = i;
        break;
      }
    if (p < 0) continue;
    if (p != r)
      for (int j = 0; j < m.cols(); ++j) std::swap(m(p, j), m(r, j));
    Q inv = 1 / m(r, c);
    for (int j = c; j < m.cols(); ++j) m(r, j) *= inv;
    for (int i = 0; i < m.rows(); ++i) {
      if (i == r || m(i, c) == 0) continue;
      Q f = m(i, c);
      for (int j = c; j < m.cols(); ++j)
        if (m(r, j) != 0) m(i, j) -= f * m(r, j);
    }
    piv.push_back(c);
    r++;
  }
  return piv;
}

}  // namespace

int rank(const QMatrix& m) {
  QMatrix c = m;
  return int(rref(c).size());
}

std::vector<int> pivot_columns(const QMatrix& m) {
  QMatrix c = m;
  return rref(c);
}

QMatrix kernel(const QMatrix& m) {
  QMatrix r = m;
  auto piv = rref(r);
  std::vector<char> is_piv(m.cols(), 0);
  for (int p : piv) is_piv[p] = 1;
  std::vector<int> free;
  for (int j = 0; j < m.cols(); ++j)
    if (!is_piv[j]) free.push_back(j);
  QMatrix k(m.cols(), int(free.size()));
  for (size_t f = 0; f < free.size(); ++f) {
    k(free[f], int(f)) = 1;
    for (size_t i = 0; i < piv.size(); ++i) k(piv[i], int(f)) = -r(int(i), free[f]);
  }
  return k;
}

ChainComplex::ChainComplex(Gens gens, std::map<int, QMatrix> boundary)
    : gens_(std::move(gens)), d_(std::move(boundary)) {
  validate();
}

ChainComplex::ChainComplex(Gens gens, std::map<int, QMatrix> boundary, std::map<int, QMatrix> action, int k)
    : gens_(std::move(gens)), d_(std::move(boundary)), t_(std::move(action)), has_action_(true), k_(k) {
  validate();
}

std::vector<int> ChainComplex::degrees() const {
  std::vector<int> d;
  for (auto& [j, g] : gens_)
    if (!g.empty()) d.push_back(j);
  return d;
}

int ChainComplex::dim(int j) const {
  auto it = gens_.find(j);
  return it == gens_.end() ? 0 : int(it->second.size());
}

const std::vector<std::string>& ChainComplex::generators(int j) const {
  static const std::vector<std::string> empty;
  auto it = gens_.find(j);
  return it == gens_.end() ? empty : it->second;
}

QMatrix ChainComplex::boundary(int j) const {
  auto it = d_.find(j);
  if (it == d_.end()) return QMatrix(dim(j - 1), dim(j));
  return it->second;
}

QMatrix ChainComplex::action(int j) const {
  if (!has_action_) fail(ErrorKind::Configuration, "complex carries no group action");
  auto it = t_.find(j);
  if (it == t_.end()) return QMatrix::identity(dim(j));
  return it->second;
}

void ChainComplex::validate() const {
  if (k_ < 1) fail(ErrorKind::Validation, "group order must be positive");
  for (auto& [j, m] : d_) {
    if (m.rows() != dim(j - 1) || m.cols() != dim(j))
      fail(ErrorKind::Shape, "differential in degree " + std::to_string(j) + " has wrong shape");
  }
  std::set<int> degs;
  for (auto& [j, g] : gens_) degs.insert(j);
  for (auto& [j, m] : d_) degs.insert(j);
  for (int j : degs) {
    if (dim(j) == 0 || dim(j - 1) == 0 || dim(j - 2) == 0) continue;
    if (!(boundary(j - 1) * boundary(j)).is_zero())
      fail(ErrorKind::Validation, "boundary squared is nonzero in degree " + std::to_string(j));
  }
  if (!has_action_) return;
  for (auto& [j, m] : t_) {
    if (m.rows() != dim(j) || m.cols() != dim(j))
      fail(ErrorKind::Shape, "action in degree " + std::to_string(j) + " has wrong shape");
    if (!m.is_signed_permutation())
      fail(ErrorKind::Validation, "action in degree " + std::to_string(j) + " is not a signed permutation");
  }
  for (auto& [j, g] : gens_) {
    if (g.empty()) continue;
    QMatrix t = action(j), p = QMatrix::identity(dim(j));
    for (int i = 0; i < k_; ++i) p = p * t;
    if (!(p == QMatrix::identity(dim(j))))
      fail(ErrorKind::Validation, "action does not have order dividing k in degree " + std::to_string(j));
    if (dim(j - 1) > 0) {
      QMatrix d = boundary(j);
      if (!(action(j - 1) * d == d * t))
        fail(ErrorKind::Validation, "action does not commute with the differential in degree " + std::to_string(j));
    }
  }
}

Betti homology_betti(const ChainComplex& cx) {
  Betti b;
  for (int j : cx.degrees()) {
    int z = cx.dim(j) - rank(cx.boundary(j));
    int bnd = cx.dim(j + 1) ? rank(cx.boundary(j + 1)) : 0;
    if (z - bnd) b[j] = z - bnd;
  }
  return b;
}

namespace {

QMatrix averaging(const ChainComplex& cx, int j) {
  int n = cx.dim(j);
  QMatrix t = cx.action(j), p = QMatrix::identity(n), s(n, n);
  for (int i = 0; i < cx.order(); ++i) {
    s = s + p;
    p = p * t;
  }
  return s.scaled(Q(1, cx.order()));
}

}  // namespace

Betti invariant_homology_betti(const ChainComplex& cx) {
  if (!cx.has_action()) fail(ErrorKind::Configuration, "invariant homology requires a group action");
  std::map<int, QMatrix> basis, avg;
  std::set<int> degs;
  for (int j : cx.degrees()) {
    degs.insert(j);
    degs.insert(j - 1);
    degs.insert(j + 1);
  }
  for (int j : degs) {
    if (cx.dim(j) == 0) {
      basis[j] = QMatrix(0, 0);
      continue;
    }
    avg[j] = averaging(cx, j);
    if (!(avg[j] * avg[j] == avg[j])) fail(ErrorKind::Validation, "averaging operator is not idempotent");
    basis[j] = avg[j].columns(pivot_columns(avg[j]));
  }
  auto drank = [&](int j) {
    if (cx.dim(j) == 0 || cx.dim(j - 1) == 0 || basis[j].cols() == 0) return 0;
    return rank(cx.boundary(j) * basis[j]);
  };
  Betti b;
  for (int j : cx.degrees()) {
    int v = basis[j].cols() - drank(j) - drank(j + 1);
    // Cross-check against the rank of the averaging operator on homology.
    QMatrix kj = kernel(cx.boundary(j));
    int rd = cx.dim(j + 1) ? rank(cx.boundary(j + 1)) : 0;
    int on_h = kj.cols() == 0 ? 0
               : cx.dim(j + 1) ? rank((avg[j] * kj).hcat(cx.boundary(j + 1))) - rd
                               : rank(avg[j] * kj);
    if (on_h != v) fail(ErrorKind::Validation, "invariant subcomplex homology disagrees with averaging on homology");
    if (v) b[j] = v;
  }
  return b;
}

long euler_characteristic(const Betti& b) {
  long s = 0;
  for (auto& [j, r] : b) s += ((j % 2 == 0) ? 1 : -1) * long(r);
  return s;
}

ChainComplex tensor_with_shift(const ChainComplex& cx, int mu, bool sign_flip) {
  ChainComplex::Gens g;
  std::map<int, QMatrix> d, t;
  for (auto& [j, names] : cx.all_generators()) g[j + mu] = names;
  for (auto& [j, names] : cx.all_generators()) {
    if (cx.dim(j) && cx.dim(j - 1)) d[j + mu] = cx.boundary(j);
    if (cx.has_action()) t[j + mu] = sign_flip ? -cx.action(j) : cx.action(j);
  }
  if (cx.has_action()) return ChainComplex(g, d, t, cx.order());
  return ChainComplex(g, d);
}

Betti shift_betti(const Betti& b, int s) {
  Betti r;
  for (auto& [j, v] : b) r[j + s] = v;
  return r;
}

int total_rank(const Betti& b) {
  int s = 0;
  for (auto& [j, v] : b) s += v;
  return s;
}

namespace {

Q coeff_of(const nlohmann::json& e) {
  if (!e.contains("coeff")) return Q(1);
  const auto& c = e.at("coeff");
  if (c.is_string()) return parse_rational(c.get<std::string>());
  if (c.is_number_integer()) return Q(c.get<long>());
  fail(ErrorKind::Validation, "coefficients must be integers or \"p/q\" strings");
}

}  // namespace

ChainComplex complex_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("generators")) fail(ErrorKind::Validation, "chain complex needs 'generators'");
  ChainComplex::Gens gens;
  std::map<std::string, std::pair<int, int>> where;  // name -> (deg, index)
  for (auto& [deg, names] : j.at("generators").items()) {
    int dg;
    try {
      dg = std::stoi(deg);
    } catch (...) {
      fail(ErrorKind::Validation, "degree key '" + deg + "' is not an integer");
    }
    if (!names.is_array()) fail(ErrorKind::Validation, "generator list must be an array");
    for (auto& nm : names) {
      std::string s = nm.get<std::string>();
      if (where.count(s)) fail(ErrorKind::Validation, "duplicate generator '" + s + "'");
      where[s] = {dg, int(gens[dg].size())};
      gens[dg].push_back(s);
    }
  }
  auto lookup = [&](const nlohmann::json& e, const char* key) {
    std::string s = e.at(key).get<std::string>();
    auto it = where.find(s);
    if (it == where.end()) fail(ErrorKind::Validation, "unknown generator '" + s + "'");
    return it->second;
  };
  auto dimof = [&](int dg) { return gens.count(dg) ? int(gens[dg].size()) : 0; };
  std::map<int, QMatrix> d, t;
  if (j.contains("differential")) {
    for (auto& e : j.at("differential")) {
      auto [df, i_from] = lookup(e, "from");
      auto [dt, i_to] = lookup(e, "to");
      if (dt != df - 1) fail(ErrorKind::Shape, "differential entry must lower degree by one");
      if (!d.count(df)) d[df] = QMatrix(dimof(df - 1), dimof(df));
      d[df](i_to, i_from) += coeff_of(e);
    }
  }
  int k = j.value("k", 1);
  if (j.contains("action")) {
    for (auto& [dg, names] : gens) t[dg] = QMatrix(int(names.size()), int(names.size()));
    for (auto& e : j.at("action")) {
      auto [df, i_from] = lookup(e, "from");
      auto [dt, i_to] = lookup(e, "to");
      if (dt != df) fail(ErrorKind::Shape, "action entry must preserve degree");
      t[df](i_to, i_from) += coeff_of(e);
    }
    return ChainComplex(gens, d, t, k);
  }
  return ChainComplex(gens, d);
}

nlohmann::json complex_to_json(const ChainComplex& cx) {
  nlohmann::json j;
  j["k"] = cx.order();
  j["generators"] = nlohmann::json::object();
  j["differential"] = nlohmann::json::array();
  for (auto& [dg, names] : cx.all_generators()) {
    j["generators"][std::to_string(dg)] = names;
    if (cx.dim(dg - 1) == 0 || names.empty()) continue;
    QMatrix d = cx.boundary(dg);
    for (int c = 0; c < d.cols(); ++c)
      for (int r = 0; r < d.rows(); ++r)
        if (d(r, c) != 0)
          j["differential"].push_back(
              {{"from", names[c]}, {"to", cx.generators(dg - 1)[r]}, {"coeff", format_rational(d(r, c))}});
  }
  if (cx.has_action()) {
    j["action"] = nlohmann::json::array();
    for (auto& [dg, names] : cx.all_generators()) {
      if (names.empty()) continue;
      QMatrix t = cx.action(dg);
      for (int c = 0; c < t.cols(); ++c)
        for (int r = 0; r < t.rows(); ++r)
          if (t(r, c) != 0)
            j["action"].push_back({{"from", names[c]}, {"to", names[r]}, {"coeff", format_rational(t(r, c))}});
    }
  }
  return j;
}

nlohmann::json betti_to_json(const Betti& b) {
  nlohmann::json j = nlohmann::json::object();
  for (auto& [dg, r] : b)
    if (r) j[std::to_string(dg)] = r;
  return j;
}

Betti betti_from_json(const nlohmann::json& j) {
  Betti b;
  for (auto& [k, v] : j.items())
    if (v.get<int>()) b[std::stoi(k)] = v.get<int>();
  return b;
}

Betti sparse_betti(const SparseComplex& cx) {
  const int n = cx.size();
  std::vector<std::unordered_map<int, Q>> bd(n), cob(n);
  for (int c = 0; c < n; ++c) {
    for (auto& [f, q] : cx.boundary[c]) {
      if (f < 0 || f >= n || cx.dim[f] != cx.dim[c] - 1) fail(ErrorKind::Shape, "sparse boundary references a bad face");
      bd[c][f] += q;
    }
    for (auto it = bd[c].begin(); it != bd[c].end();) {
      if (it->second == 0) it = bd[c].erase(it);
      else {
        cob[it->first][c] = it->second;
        ++it;
      }
    }
  }
  std::vector<char> alive(n, 1);
  std::vector<int> queue;
  for (int c = 0; c < n; ++c)
    if (cob[c].size() == 1) queue.push_back(c);

  auto eliminate = [&](int s, int t) {
    Q c = bd[s].at(t);
    std::vector<std::pair<int, Q>> others;
    for (auto& [r, a] : cob[t])
      if (r != s) others.emplace_back(r, a);
    std::vector<std::pair<int, Q>> sb(bd[s].begin(), bd[s].end());
    for (auto& [r, a] : others) {
      Q f = a / c;
      for (auto& [phi, b] : sb) {
        Q nv = -f * b;
        auto it = bd[r].find(phi);
        if (it != bd[r].end()) nv += it->second;
        if (nv == 0) {
          bd[r].erase(phi);
          cob[phi].erase(r);
        } else {
          bd[r][phi] = nv;
          cob[phi][r] = nv;
        }
      }
    }
    for (auto& [phi, b] : sb) cob[phi].erase(s);
    for (auto& [psi, b] : cob[s]) bd[psi].erase(s);
    for (auto& [phi, b] : bd[t]) cob[phi].erase(t);
    for (auto& [phi, b] : sb)
      if (cob[phi].size() == 1) queue.push_back(phi);
    for (auto& [phi, b] : bd[t])
      if (cob[phi].size() == 1) queue.push_back(phi);
    bd[s].clear();
    cob[s].clear();
    bd[t].clear();
    cob[t].clear();
    alive[s] = alive[t] = 0;
  };
  auto drain = [&]() {
    while (!queue.empty()) {
      int t = queue.back();
      queue.pop_back();
      if (!alive[t] || cob[t].size() != 1) continue;
      eliminate(cob[t].begin()->first, t);
    }
  };
  drain();
  bool changed = true;
  while (changed) {
    changed = false;
    for (int t = 0; t < n; ++t) {
      if (!alive[t] || cob[t].empty()) continue;
      int best = -1;
      size_t bs = 0;
      for (auto& [s, a] : cob[t])
        if (best < 0 || bd[s].size() < bs || (bd[s].size() == bs && s < best)) {
          best = s;
          bs = bd[s].size();
        }
      eliminate(best, t);
      drain();
      changed = true;
    }
  }
  Betti b;
  for (int c = 0; c < n; ++c)
    if (alive[c]) b[cx.dim[c]]++;
  return b;
}

SparseComplex invariant_subcomplex(const SparseComplex& cx, const SignedPerm& act, int k) {
  const int n = cx.size();
  if (int(act.image.size()) != n || int(act.sign.size()) != n) fail(ErrorKind::Shape, "cell action size mismatch");
  std::vector<int> orbit(n, -2);
  std::vector<int> rep;
  std::vector<std::vector<std::pair<int, Q>>> members;  // cell, coefficient in the orbit sum
  for (int c0 = 0; c0 < n; ++c0) {
    if (orbit[c0] != -2) continue;
    std::map<int, Q> coef;
    int c = c0, s = 1;
    for (int i = 0; i < k; ++i) {
      coef[c] += s;
      if (cx.dim[act.image[c]] != cx.dim[c]) fail(ErrorKind::Validation, "cell action changes dimension");
      s *= act.sign[c];
      c = act.image[c];
    }
    if (c != c0 || s != 1) fail(ErrorKind::Validation, "cell action does not have order dividing k");
    bool zero = coef.at(c0) == 0;
    int id = zero ? -1 : int(rep.size());
    for (auto& [cell, q] : coef) orbit[cell] = id;
    if (zero) continue;
    rep.push_back(c0);
    members.emplace_back(coef.begin(), coef.end());
  }
  SparseComplex out;
  const int m = int(rep.size());
  out.dim.resize(m);
  out.boundary.resize(m);
  std::vector<Q> rep_coef(m);
  for (int o = 0; o < m; ++o) {
    out.dim[o] = cx.dim[rep[o]];
    for (auto& [cell, q] : members[o])
      if (cell == rep[o]) rep_coef[o] = q;
  }
  for (int o = 0; o < m; ++o) {
    std::unordered_map<int, Q> img;
    for (auto& [cell, q] : members[o])
      for (auto& [f, b] : cx.boundary[cell]) img[f] += q * b;
    for (auto& [f, v] : img) {
      if (v == 0) continue;
      int of = orbit[f];
      if (of < 0) fail(ErrorKind::Validation, "boundary of an invariant chain is not invariant");
      if (rep[of] == f) out.boundary[o].emplace_back(of, v / rep_coef[of]);
    }
  }
  return out;
}

ChainComplex to_dense(const SparseComplex& cx, const SignedPerm* act, int k) {
  ChainComplex::Gens g;
  std::vector<int> idx(cx.size());
  for (int c = 0; c < cx.size(); ++c) {
    idx[c] = int(g[cx.dim[c]].size());
    g[cx.dim[c]].push_back("c" + std::to_string(c));
  }
  std::map<int, QMatrix> d, t;
  for (auto& [dg, names] : g) {
    if (g.count(dg - 1)) d[dg] = QMatrix(int(g[dg - 1].size()), int(names.size()));
    if (act) t[dg] = QMatrix(int(names.size()), int(names.size()));
  }
  for (int c = 0; c < cx.size(); ++c) {
    for (auto& [f, q] : cx.boundary[c]) d[cx.dim[c]](idx[f], idx[c]) += q;
    if (act) t[cx.dim[c]](idx[act->image[c]], idx[c]) += act->sign[c];
  }
  if (act) return ChainComplex(g, d, t, k);
  return ChainComplex(g, d);
}

}  // namespace equimorse::exactalg
