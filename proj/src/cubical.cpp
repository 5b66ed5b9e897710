#include <cmath>
#include <unordered_map>

#include "equimorse/linalg.hpp"
#include "equimorse/lochom.hpp"

namespace equimorse::lochom {

using exactalg::Q;
using exactalg::SignedPerm;
using exactalg::SparseComplex;

std::optional<AxisAction> axis_action(const Mat& A, int k) {
  const int d = int(A.rows());
  AxisAction a;
  a.k = k;
  a.perm.assign(d, -1);
  a.sign.assign(d, 0);
  std::vector<char> used(d, 0);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) {
      double v = A(i, j);
      if (std::abs(v) < 1e-12) continue;
      if (std::abs(std::abs(v) - 1) > 1e-12 || a.perm[j] >= 0 || used[i]) return std::nullopt;
      a.perm[j] = i;
      a.sign[j] = v > 0 ? 1 : -1;
      used[i] = 1;
    }
    if (a.perm[j] < 0) return std::nullopt;
  }
  return a;
}

namespace {

double beta0(double r, double R) {
  return smooth_step((r - 0.5 * R) / (0.4 * R));
}

struct Grid {
  int d, M, c;
  double h;
  long nv;
  std::vector<int> idx(long v) const {
    std::vector<int> i(d);
    for (int j = 0; j < d; ++j) {
      i[j] = int(v % M);
      v /= M;
    }
    return i;
  }
  long lin(const std::vector<int>& i) const {
    long v = 0;
    for (int j = d - 1; j >= 0; --j) v = v * M + i[j];
    return v;
  }
  Vec point(const std::vector<int>& i) const {
    Vec x(d);
    for (int j = 0; j < d; ++j) x[j] = (i[j] - c) * h;
    return x;
  }
  long r2(const std::vector<int>& i) const {
    long s = 0;
    for (int j = 0; j < d; ++j) s += long(i[j] - c) * (i[j] - c);
    return s;
  }
  std::vector<int> act_vertex(const AxisAction& a, const std::vector<int>& i) const {
    std::vector<int> o(d);
    for (int j = 0; j < d; ++j) o[a.perm[j]] = c + a.sign[j] * (i[j] - c);
    return o;
  }
};

void check_isolation(const Field& f, double R) {
  const int d = f.dim();
  const int per = d == 1 ? 41 : d == 2 ? 13 : 7;
  long total = 1;
  for (int j = 0; j < d; ++j) total *= per;
  for (long s = 0; s < total; ++s) {
    long t = s;
    Vec z(d);
    for (int j = 0; j < d; ++j) {
      z[j] = -R + 2 * R * (double(t % per) + 0.5) / per;
      t /= per;
    }
    if (z.norm() > R) continue;
    for (int it = 0; it < 40; ++it) {
      Vec g = f.gradient(z);
      if (g.norm() < 1e-12) break;
      Eigen::CompleteOrthogonalDecomposition<Mat> cod(f.hessian(z));
      z -= cod.solve(g);
      if (!z.allFinite() || z.norm() > 1.5 * R) break;
    }
    if (!z.allFinite() || z.norm() > R) continue;
    Vec g = f.gradient(z);
    if (g.norm() < 1e-10 && z.norm() > 0.05 * R) {
      fail(ErrorKind::Isolation, "critical point other than 0 found in U at distance " + std::to_string(z.norm()));
    }
  }
}

}  // namespace

CubicalPair gromoll_meyer_pair(const FunctionSpec& f, const GMParams& p0) {
  CubicalPair pair;
  pair.f = f;
  pair.params = p0;
  GMParams& p = pair.params;
  const int d = f.dim();
  if (d < 1 || d > 3) fail(ErrorKind::Unsupported, "cubical pairs are supported in dimensions 1 to 3");
  if (!(p.radius > 0)) fail(ErrorKind::Parameter, "radius must be positive");
  if (p.h <= 0) p.h = p.radius / 16;
  if (f.action) {
    pair.action = axis_action(f.action->A, f.action->k);
    if (!pair.action)
      fail(ErrorKind::Unsupported, "cell-level action requires a signed coordinate permutation");
  }
  if (p.check_isolation) check_isolation(*f.f, p.radius);

  Grid g;
  g.d = d;
  g.h = p.h;
  g.c = int(std::ceil(p.radius / p.h - 1e-9));
  g.M = 2 * g.c + 1;
  g.nv = 1;
  for (int j = 0; j < d; ++j) g.nv *= g.M;
  pair.d = d;
  pair.M = g.M;
  const double rr = p.radius / p.h;
  const long r2max = long(std::floor(rr * rr + 1e-9));

  std::vector<double> val(g.nv, 0.0);
  std::vector<char> inball(g.nv, 0), done(g.nv, 0);
  for (long v = 0; v < g.nv; ++v) {
    auto i = g.idx(v);
    inball[v] = g.r2(i) <= r2max;
  }
  double sup = 0;
  for (long v = 0; v < g.nv; ++v) {
    if (!inball[v] || done[v]) continue;
    auto i = g.idx(v);
    double fv = f.f->value(g.point(i));
    if (!std::isfinite(fv)) fail(ErrorKind::Domain, "function not finite on U");
    val[v] = fv;
    done[v] = 1;
    if (pair.action) {
      auto w = g.act_vertex(*pair.action, i);
      while (g.lin(w) != v) {
        long lw = g.lin(w);
        val[lw] = fv;
        done[lw] = 1;
        w = g.act_vertex(*pair.action, w);
      }
    }
    sup = std::max(sup, std::abs(fv));
  }
  pair.sup_abs = sup;
  if (p.a < 0) p.a = 0.05 * sup;
  if (p.b < 0) p.b = 0.05 * sup;
  if (!(p.a > 0) || !(p.b > 0)) fail(ErrorKind::Parameter, "a and b must be positive (f may vanish on U)");
  if (p.a >= sup && p.b >= sup) fail(ErrorKind::Parameter, "a and b exceed sup|f| on U; the pair is trivial");
  pair.in_w.assign(g.nv, 0);
  pair.in_wm.assign(g.nv, 0);
  for (long v = 0; v < g.nv; ++v) {
    if (!inball[v]) continue;
    double r = std::sqrt(double(g.r2(g.idx(v)))) * g.h;
    pair.in_w[v] = val[v] <= p.a;
    pair.in_wm[v] = val[v] - (p.a + p.b) * beta0(r, p.radius) <= -p.b;
  }
  return pair;
}

Betti pair_homology(const CubicalPair& pair, bool invariant) {
  const int d = pair.d, nm = 1 << d;
  Grid g;
  g.d = d;
  g.M = pair.M;
  g.c = (pair.M - 1) / 2;
  g.h = pair.params.h;
  g.nv = long(pair.in_w.size());
  if (invariant && !pair.action) fail(ErrorKind::Configuration, "invariant homology requires an attached cell action");

  auto cell_in = [&](const std::vector<char>& set, const std::vector<int>& base, int mask) {
    for (int sub = 0; sub < nm; ++sub) {
      if ((sub & mask) != sub) continue;
      std::vector<int> v = base;
      for (int j = 0; j < d; ++j)
        if (sub >> j & 1) {
          if (++v[j] >= g.M) return false;
        }
      if (!set[g.lin(v)]) return false;
    }
    return true;
  };
  std::unordered_map<long, int> id;
  std::vector<std::pair<long, int>> cells;  // (base vertex, mask)
  for (long v = 0; v < g.nv; ++v) {
    if (!pair.in_w[v]) continue;
    auto base = g.idx(v);
    for (int mask = 0; mask < nm; ++mask) {
      if (!cell_in(pair.in_w, base, mask) || cell_in(pair.in_wm, base, mask)) continue;
      id[v * nm + mask] = int(cells.size());
      cells.push_back({v, mask});
    }
  }
  SparseComplex cx;
  cx.dim.resize(cells.size());
  cx.boundary.resize(cells.size());
  for (size_t c = 0; c < cells.size(); ++c) {
    auto [v, mask] = cells[c];
    cx.dim[c] = __builtin_popcount(unsigned(mask));
    auto base = g.idx(v);
    int r = 0;
    for (int j = 0; j < d; ++j) {
      if (!(mask >> j & 1)) continue;
      int fm = mask & ~(1 << j);
      int sgn = (r % 2 == 0) ? 1 : -1;
      std::vector<int> up = base;
      up[j]++;
      auto add = [&](const std::vector<int>& b, int s) {
        auto it = id.find(g.lin(b) * nm + fm);
        if (it != id.end()) cx.boundary[c].emplace_back(it->second, Q(s));
      };
      add(up, sgn);
      add(base, -sgn);
      r++;
    }
  }
  if (!invariant) return exactalg::sparse_betti(cx);

  const AxisAction& a = *pair.action;
  SignedPerm sp;
  sp.image.resize(cells.size());
  sp.sign.resize(cells.size());
  for (size_t c = 0; c < cells.size(); ++c) {
    auto [v, mask] = cells[c];
    auto base = g.idx(v);
    std::vector<int> nb(d);
    int nmask = 0, s = a.flip;
    std::vector<int> ext;
    for (int j = 0; j < d; ++j) {
      int pj = a.perm[j];
      if (mask >> j & 1) {
        nmask |= 1 << pj;
        s *= a.sign[j];
        ext.push_back(pj);
        nb[pj] = a.sign[j] > 0 ? base[j] : 2 * g.c - base[j] - 1;
      } else {
        nb[pj] = g.c + a.sign[j] * (base[j] - g.c);
      }
    }
    // sign of the permutation sorting ext
    for (size_t x = 0; x < ext.size(); ++x)
      for (size_t y = x + 1; y < ext.size(); ++y)
        if (ext[x] > ext[y]) s = -s;
    auto it = id.find(g.lin(nb) * nm + nmask);
    if (it == id.end()) fail(ErrorKind::Validation, "cubical pair is not invariant under the action");
    sp.image[c] = it->second;
    sp.sign[c] = s;
  }
  return exactalg::sparse_betti(exactalg::invariant_subcomplex(cx, sp, a.k));
}

RelativeHomology relative_homology(const CubicalPair& pair, bool invariant) {
  RelativeHomology out;
  out.h = pair.params.h;
  Betti b1 = pair_homology(pair, invariant);
  GMParams fine = pair.params;
  fine.h = pair.params.h / 2;
  fine.check_isolation = false;
  CubicalPair p2 = gromoll_meyer_pair(pair.f, fine);
  if (pair.action && p2.action) p2.action->flip = pair.action->flip;
  Betti b2 = pair_homology(p2, invariant);
  if (b1 != b2) {
    fail(ErrorKind::Resolution, "relative homology changes between h and h/2; refine the grid");
  }
  out.betti = b1;
  long cnt = 0;
  for (size_t v = 0; v < pair.in_w.size(); ++v) cnt += pair.in_w[v] && !pair.in_wm[v];
  out.relative_cells = int(cnt);
  return out;
}

}  // namespace equimorse::lochom
