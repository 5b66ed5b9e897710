#include "equimorse/commands.hpp"

#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "equimorse/catalog.hpp"
#include "equimorse/dact.hpp"
#include "equimorse/equiperturb.hpp"
#include "equimorse/exactalg.hpp"
#include "equimorse/iterthy.hpp"
#include "equimorse/json_io.hpp"
#include "equimorse/lochom.hpp"
#include "equimorse/prodsdm.hpp"
#include "equimorse/regdist.hpp"
#include "equimorse/spindex.hpp"

namespace equimorse::cli {

using nlohmann::json;
using hamflow::HamiltonianGerm;

namespace {

struct Globals {
  std::string format = "json";
  unsigned seed = 0;
};

std::string emit(const json& j, const Globals& g) { return g.format == "table" ? io::to_table(j) : j.dump() + "\n"; }

// Input file, optionally wrapped as {"kind", "payload", "options"}. Tolerance
// overrides in options.tolerances are applied before the payload is used.
json load(const std::string& path, const std::string& kind) {
  json doc = io::read_json_file(path);
  json opt = io::options(doc);
  if (opt.contains("tolerances")) apply_tolerance_overrides(opt.at("tolerances").dump());
  return io::payload(doc, kind);
}

struct GermFlags {
  std::string input;
  double rotation = 0, hyperbolic = 0, quartic = 0;
  CLI::Option *o_in = nullptr, *o_rot = nullptr, *o_hyp = nullptr, *o_q = nullptr;

  void add(CLI::App* sub) {
    o_in = sub->add_option("--input", input, "Hamiltonian JSON file");
    o_rot = sub->add_option("--rotation", rotation, "H = -pi a |z|^2, rotation by a turns per unit time");
    o_hyp = sub->add_option("--hyperbolic", hyperbolic, "H = l x y");
    o_q = sub->add_option("--quartic", quartic, "H = s |z|^4 / 4");
    o_rot->excludes(o_in);
    o_hyp->excludes(o_in)->excludes(o_rot);
    o_q->excludes(o_in)->excludes(o_rot)->excludes(o_hyp);
  }
  HamiltonianGerm get() const {
    if (o_rot->count()) return HamiltonianGerm::rotation(rotation);
    if (o_hyp->count()) return HamiltonianGerm::hyperbolic(hyperbolic);
    if (o_q->count()) return HamiltonianGerm::quartic(quartic);
    if (o_in->count()) return io::germ_from_json(load(input, "hamiltonian"));
    fail(ErrorKind::Usage, "one of --input, --rotation, --hyperbolic, --quartic is required");
  }
};

// Polynomial with optional action; the origin check is skipped for
// functions whose critical points sit elsewhere.
FunctionSpec function_from_json(const json& j, bool check_origin) {
  if (check_origin) return FunctionSpec::from_json(j);
  FunctionSpec s;
  s.f = std::make_shared<Polynomial>(Polynomial::from_json(j));
  if (j.contains("action")) {
    s.action = CyclicAction::from_json(j.at("action"));
    s.action->validate();
  }
  return s;
}

int smallest_adapted_N(const HamiltonianGerm& g) {
  for (int N = 1; N <= 64; ++N)
    if (hamflow::adapted_N(g, N)) return N;
  fail(ErrorKind::Configuration, "no adapted step count N <= 64");
}

json cert_report(const equiperturb::PerturbResult& r) {
  json j = equiperturb::certificate_to_json(r.cert);
  j["draws_used"] = r.draws_used;
  j["trace"] = r.trace;
  return j;
}

std::vector<Vec> random_points(int count, int dim, double radius, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-radius, radius);
  std::vector<Vec> pts;
  for (int i = 0; i < count; ++i) {
    Vec p(dim);
    for (int c = 0; c < dim; ++c) p(c) = u(rng);
    pts.push_back(p);
  }
  return pts;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

Outcome run(const std::vector<std::string>& args) {
  Outcome res;
  Globals G;
  CLI::App app{"Invariant local Morse homology and discrete symplectic action toolkit", "equimorse"};
  app.add_option("--format", G.format, "Output format")->check(CLI::IsMember({"json", "table"}));
  app.add_option("--seed", G.seed, "Seed for every random draw");
  app.fallthrough();
  app.require_subcommand(1);

  // Each subcommand registers its flags and an action run after parsing.
  std::vector<std::pair<CLI::App*, std::function<void()>>> actions;
  auto sub = [&](const std::string& name, const std::string& desc) {
    auto* s = app.add_subcommand(name, desc);
    s->fallthrough();
    return s;
  };
  auto out = [&](const json& j) { res.out += emit(j, G); };
  std::vector<std::unique_ptr<GermFlags>> germs;
  auto germ_flags = [&](CLI::App* s) -> GermFlags& {
    germs.push_back(std::make_unique<GermFlags>());
    germs.back()->add(s);
    return *germs.back();
  };

  // homology
  std::string h_input;
  bool h_inv = false;
  {
    auto* s = sub("homology", "Betti numbers of a chain complex with cyclic action");
    s->add_option("--input", h_input, "chain complex JSON")->required();
    s->add_flag("--invariant", h_inv, "also report the invariant subcomplex");
    actions.push_back({s, [&] {
      auto cx = exactalg::complex_from_json(load(h_input, "chain_complex"));
      json j{{"betti", exactalg::betti_to_json(exactalg::homology_betti(cx))}};
      if (h_inv) j["invariant_betti"] = exactalg::betti_to_json(exactalg::invariant_homology_betti(cx));
      out(j);
    }});
  }

  // local-homology
  std::string lh_input;
  lochom::LocalHomologyOptions lh_opt;
  bool lh_no_iso = false;
  {
    auto* s = sub("local-homology", "Local (invariant) Morse homology of an isolated critical point at 0");
    s->add_option("--input", lh_input, "function JSON")->required();
    s->add_option("--radius", lh_opt.radius, "ball radius in the kernel coordinates");
    s->add_option("--grid-step", lh_opt.h, "grid spacing");
    s->add_option("--a", lh_opt.a, "upper sublevel offset");
    s->add_option("--b", lh_opt.b, "lower sublevel offset");
    s->add_flag("--no-isolation-check", lh_no_iso);
    s->add_flag("--morse-check", lh_opt.morse_cross_check, "cross-check with the 2D Morse complex");
    actions.push_back({s, [&] {
      lh_opt.check_isolation = !lh_no_iso;
      auto fs = FunctionSpec::from_json(load(lh_input, "function"));
      auto lh = lochom::local_homology(fs, lh_opt);
      json j{{"betti", exactalg::betti_to_json(lh.plain)},
             {"q", lh.q},
             {"orientation_preserved", lh.orientation_preserved},
             {"kernel_dim", lh.kernel_dim},
             {"reduced_dim", lh.reduced_dim},
             {"grid_h", lh.grid_h}};
      if (lh.invariant) j["invariant_betti"] = exactalg::betti_to_json(*lh.invariant);
      if (lh.morse_cross_check) j["morse_cross_check"] = exactalg::betti_to_json(*lh.morse_cross_check);
      out(j);
    }});
  }

  // cz
  std::string cz_path;
  int cz_iter = 1;
  {
    auto* s = sub("cz", "Conley-Zehnder index of a germ iterate or a sampled path");
    auto* cz_germ = &germ_flags(s);
    auto* p = s->add_option("--path", cz_path, "symplectic path JSON");
    p->excludes(cz_germ->o_in)->excludes(cz_germ->o_rot)->excludes(cz_germ->o_hyp)->excludes(cz_germ->o_q);
    s->add_option("--iterate", cz_iter, "period k")->check(CLI::PositiveNumber);
    actions.push_back({s, [&, cz_germ] {
      if (!cz_path.empty()) {
        out({{"cz", spindex::cz_index(spindex::SymplecticPath::from_json(load(cz_path, "path")))}});
        return;
      }
      out({{"cz", iterthy::cz(cz_germ->get(), cz_iter)}});
    }});
  }

  // action and orbits
  std::string a_op = "index", a_point;
  int a_k = 1, a_N = 0, a_diag = 0, a_seeds = 40;
  double a_radius = 0.2;
  auto orbit_report = [&](const dact::DiscreteAction& da) {
    auto pts = dact::find_periodic_points(da, random_points(a_seeds, da.dim(), a_radius, G.seed));
    json cps = json::array();
    for (auto& c : pts.points)
      cps.push_back({{"z", io::vec_to_json(c.z)},
                     {"residual", c.residual},
                     {"morse_index", c.morse_index},
                     {"nullity", c.nullity},
                     {"orbit_size", c.orbit_size}});
    json fails = json::array();
    for (auto& f : pts.failures) fails.push_back({{"seed", f.seed}, {"reason", f.reason}});
    return json{{"critical_points", cps}, {"seed_failures", fails.size()}};
  };
  auto add_action_flags = [&](CLI::App* s) -> GermFlags& {
    auto& gf = germ_flags(s);
    s->add_option("--k", a_k, "period")->check(CLI::PositiveNumber);
    s->add_option("--N", a_N, "steps per unit time (default: smallest adapted)");
    s->add_option("--seeds", a_seeds, "random Newton seeds for orbits");
    s->add_option("--radius", a_radius, "seed box half width");
    return gf;
  };
  {
    auto* s = sub("action", "Discrete action functional A_{H,k,N}");
    s->add_option("op", a_op, "build | grad | hessian | index | orbits")
        ->check(CLI::IsMember({"build", "grad", "hessian", "index", "orbits"}));
    auto* a_germ = &add_action_flags(s);
    s->add_option("--point", a_point, "JSON number list for grad / hessian (default 0)");
    s->add_option("--diagonal", a_diag, "m: also split A_{H,k,N} along the k/m-fold diagonal");
    actions.push_back({s, [&, a_germ] {
      auto g = a_germ->get();
      const int N = a_N > 0 ? a_N : smallest_adapted_N(g);
      dact::DiscreteAction da(g, a_k, N);
      json j{{"k", a_k}, {"N", N}, {"dim", da.dim()}};
      Vec z = Vec::Zero(da.dim());
      if (!a_point.empty()) {
        z = io::vec_from_json(io::parse_json(a_point));
        if (z.size() != da.dim()) fail(ErrorKind::Shape, "point has dimension " + std::to_string(z.size()));
      }
      if (a_op == "grad") {
        j["value"] = da.value(z);
        j["gradient"] = io::vec_to_json(da.gradient(z));
      } else if (a_op == "hessian") {
        Mat h = da.hessian(z);
        json rows = json::array();
        for (int r = 0; r < h.rows(); ++r) rows.push_back(io::vec_to_json(h.row(r).transpose()));
        j["hessian"] = rows;
      } else if (a_op == "index") {
        auto id = da.index_at_zero();
        j["index"] = id.index;
        j["nullity"] = id.nullity;
        j["cz"] = iterthy::cz(g, a_k);
        j["cz_plus_nkN"] = iterthy::cz(g, a_k) + g.n() * a_k * N;
        if (a_diag > 0) {
          if (a_k % a_diag) fail(ErrorKind::Validation, "--diagonal must divide --k");
          auto ds = dact::diagonal_split(g, a_diag, a_k / a_diag, N);
          j["dimEminus"] = ds.dim_e_minus;
          j["orientation_preserved"] = ds.orientation_preserved;
          j["off_block_norm"] = ds.off_block_norm;
        }
      } else if (a_op == "orbits") {
        j.update(orbit_report(da));
      }
      out(j);
    }});
  }
  {
    auto* s = sub("orbits", "k-periodic points of the germ as critical points of the discrete action");
    auto* a_germ = &add_action_flags(s);
    actions.push_back({s, [&, a_germ] {
      auto g = a_germ->get();
      const int N = a_N > 0 ? a_N : smallest_adapted_N(g);
      dact::DiscreteAction da(g, a_k, N);
      json j{{"k", a_k}, {"N", N}};
      j.update(orbit_report(da));
      out(j);
    }});
  }

  // iterthy
  iterthy::FloerOptions it_opt;
  int it_m = 1, it_k = 2, it_j = 1, it_jmax = 4;
  auto add_floer = [&](CLI::App* s) -> GermFlags& {
    s->add_option("--radius", it_opt.radius, "kernel ball radius");
    s->add_option("--max-N", it_opt.max_N, "largest step count tried");
    return germ_flags(s);
  };
  {
    auto* s = sub("iterate-check", "Persistence of local homology from period m to km");
    auto* it_germ = &add_floer(s);
    s->add_option("--m", it_m)->check(CLI::PositiveNumber);
    s->add_option("--k", it_k)->check(CLI::PositiveNumber);
    actions.push_back({s, [&, it_germ] { out(iterthy::to_json(iterthy::persistence_check(it_germ->get(), it_m, it_k, it_opt))); }});
  }
  {
    auto* s = sub("euler", "Lefschetz-type Euler characteristic versus the invariant homology");
    auto* it_germ = &add_floer(s);
    s->add_option("--j", it_j)->check(CLI::PositiveNumber);
    actions.push_back({s, [&, it_germ] { out(iterthy::to_json(iterthy::euler_lefschetz(it_germ->get(), it_j, it_opt))); }});
  }
  {
    auto* s = sub("subordination", "Invariant dimensions iota_j and the jump set");
    auto* it_germ = &add_floer(s);
    s->add_option("--jmax", it_jmax)->check(CLI::PositiveNumber);
    actions.push_back(
        {s, [&, it_germ] { out(iterthy::to_json(iterthy::subordination_structure(it_germ->get(), it_jmax, it_opt))); }});
  }

  // sdm
  int sdm_k = 0;
  double sdm_radius = 0.05;
  {
    auto* s = sub("sdm", "Symplectically degenerate maximum test");
    auto* sdm_germ = &add_floer(s);
    s->add_option("--special-k", sdm_k, "also evaluate the special-case k-fold product");
    s->add_option("--sphere-radius", sdm_radius, "test radius for the strict maximum of S");
    actions.push_back({s, [&, sdm_germ] {
      auto g = sdm_germ->get();
      json j = prodsdm::to_json(prodsdm::check_sdm(g, it_opt));
      if (sdm_k > 0) j["special_product"] = prodsdm::to_json(prodsdm::special_case_product(g, sdm_k, sdm_radius));
      out(j);
    }});
  }

  // product-degree
  std::vector<std::string> pd_classes;
  int pd_n = 1;
  double pd_delta = 0;
  CLI::Option* pd_delta_opt = nullptr;
  {
    auto* s = sub("product-degree", "Degree and period of a product of local classes");
    s->add_option("--n", pd_n, "half dimension")->check(CLI::PositiveNumber);
    s->add_option("--class", pd_classes, "degree[:period[:label]], repeatable")->required();
    pd_delta_opt = s->add_option("--delta", pd_delta, "mean index: report when the r-th power leaves the support");
    actions.push_back({s, [&] {
      std::vector<prodsdm::GradedClass> cls;
      for (auto& t : pd_classes) {
        prodsdm::GradedClass c;
        std::stringstream ss(t);
        std::string part;
        try {
          std::getline(ss, part, ':');
          c.degree = std::stoi(part);
          if (std::getline(ss, part, ':')) c.period = std::stoi(part);
        } catch (const std::exception&) {
          fail(ErrorKind::Validation, "bad class '" + t + "'");
        }
        if (std::getline(ss, part)) c.label = part;
        cls.push_back(c);
      }
      json j = prodsdm::to_json(prodsdm::product_degree(cls, pd_n));
      if (cls.size() == 2) j["supercommutativity_sign"] = prodsdm::supercommutativity_sign(cls[0].degree, cls[1].degree);
      if (pd_delta_opt->count()) {
        auto r = prodsdm::vanishing_threshold(cls[0].degree, pd_delta, pd_n);
        j["vanishing_power"] = r ? json(*r) : json(nullptr);
      }
      out(j);
    }});
  }

  // split
  std::string sp_input;
  int sp_n1 = 1;
  double sp_radius = 0.3;
  {
    auto* s = sub("split", "Equivariant splitting lemma on R^{n1} x R^{n2}");
    s->add_option("--input", sp_input, "function JSON")->required();
    s->add_option("--n1", sp_n1, "kernel dimension (leading coordinates)")->required();
    s->add_option("--radius", sp_radius);
    actions.push_back({s, [&] {
      lochom::EquivariantSplit es(FunctionSpec::from_json(load(sp_input, "function")), sp_n1, sp_radius);
      auto r = es.verify();
      out({{"n1", es.n1()},
           {"n2", es.n2()},
           {"positive", es.positive()},
           {"negative", es.negative()},
           {"orientation_preserved", es.orientation_preserved()},
           {"residuals", {{"splitting", r.splitting}, {"equivariance", r.equivariance}, {"samples", r.samples}}}});
    }});
  }

  // regdist
  std::string rd_input;
  int rd_random = 0;
  {
    auto* s = sub("regdist", "Invariant regularized distance: CSV of point, delta, |grad delta|, bound check");
    s->add_option("--input", rd_input,
                  "set JSON {\"Y\": set, \"E\": [basis], \"action\", \"L\", \"depth\", \"points\"}")
        ->required();
    s->add_option("--random", rd_random, "additional random query points in [-L/2, L/2]^N");
    actions.push_back({s, [&] {
      json j = load(rd_input, "set_spec");
      auto Y = regdist::ClosedSet::from_json(j.at("Y"));
      const int N = Y.dim();
      Mat E = j.contains("E") ? io::basis_from_json(j.at("E"), N) : Mat(N, 0);
      std::optional<CyclicAction> A;
      if (j.contains("action")) A = CyclicAction::from_json(j.at("action"));
      const double L = j.value("L", 1.0);
      regdist::RegularizedDistance rd(Y, E, A, L, j.value("depth", -1));
      std::vector<Vec> pts;
      for (auto& p : j.value("points", json::array())) pts.push_back(io::vec_from_json(p));
      for (auto& p : random_points(rd_random, N, L / 2, G.seed)) pts.push_back(p);
      const double c1 = regdist::lower_constant(N), c2 = regdist::upper_constant(N);
      json rows = json::array();
      for (auto& p : pts) {
        if (p.size() != N) fail(ErrorKind::Shape, "query point has wrong dimension");
        const double d = rd.dist_x(p), v = rd.value(p);
        const double gn = d > 0 ? rd.gradient(p).norm() : 0.0;
        const bool ok = v >= c1 * d - 1e-12 && v <= c2 * d + 1e-12;
        rows.push_back({{"point", io::vec_to_json(p)}, {"delta", v}, {"grad_norm", gn}, {"dist", d}, {"bound_ok", ok}});
      }
      if (G.format == "json" && !j.value("csv", true)) {
        out({{"rows", rows}});
        return;
      }
      std::string csv;
      for (int c = 0; c < N; ++c) csv += "x" + std::to_string(c) + ",";
      csv += "delta,grad_norm,dist,bound_ok\n";
      for (auto& r : rows) {
        for (auto& x : r["point"]) csv += fmt(x.get<double>()) + ",";
        csv += fmt(r["delta"].get<double>()) + "," + fmt(r["grad_norm"].get<double>()) + "," +
               fmt(r["dist"].get<double>()) + "," + (r["bound_ok"].get<bool>() ? "1" : "0") + "\n";
      }
      res.out += csv;
    }});
  }

  // perturb
  std::string pt_input;
  equiperturb::PerturbOptions pt_opt;
  bool pt_ms = false;
  double pt_ms_radius = 1.5;
  {
    auto* s = sub("perturb", "Invariant Morse perturbation with certificate");
    s->add_option("--input", pt_input, "function JSON with action")->required();
    s->add_option("--eps", pt_opt.eps, "C2 budget");
    s->add_option("--radius", pt_opt.radius, "ball radius");
    s->add_option("--draws", pt_opt.draws, "random draws before giving up");
    s->add_flag("--morse-smale", pt_ms, "2D: report saddle connections of the input instead");
    s->add_option("--ms-radius", pt_ms_radius, "search radius for --morse-smale");
    actions.push_back({s, [&] {
      auto fs = function_from_json(load(pt_input, "function"), !pt_ms);
      if (pt_ms) {
        auto r = equiperturb::verify_morse_smale_2d(fs, pt_ms_radius);
        json conns = json::array();
        for (auto& [a, b] : r.saddle_connections) conns.push_back({a, b});
        out({{"saddles", r.saddles},
             {"saddle_connections", conns},
             {"escaped", r.escaped},
             {"tangency_residual", r.tangency_residual},
             {"tangency_ok", r.tangency_ok},
             {"morse_smale", r.clean()}});
        return;
      }
      pt_opt.seed = G.seed;
      out(cert_report(equiperturb::perturb_invariant_morse(fs, pt_opt)));
    }});
  }

  // catalog
  bool cat_list = false;
  std::string cat_run, cat_export;
  {
    auto* s = sub("catalog", "Built-in examples with expected results");
    auto* l = s->add_flag("--list", cat_list);
    auto* r = s->add_option("--run", cat_run, "fixture name or 'all'");
    auto* e = s->add_option("--export", cat_export, "print the input document of a fixture");
    l->excludes(r)->excludes(e);
    r->excludes(e);
    actions.push_back({s, [&] {
      using namespace catalog;
      if (!cat_export.empty()) {
        auto& f = fixture(cat_export);
        out({{"kind", f.kind}, {"payload", f.input}});
        return;
      }
      if (cat_run.empty()) {
        json rows = json::array();
        for (auto& f : fixtures())
          rows.push_back({{"name", f.name}, {"kind", f.kind}, {"description", f.description},
                          {"expected_from", f.expected_from}, {"expected", f.expected}});
        out({{"fixtures", rows}});
        return;
      }
      std::vector<const Fixture*> sel;
      if (cat_run == "all")
        for (auto& f : fixtures()) sel.push_back(&f);
      else
        sel.push_back(&fixture(cat_run));
      // Fixed seeds inside each fixture; run in order for a deterministic report.
      json rows = json::array();
      int passed = 0;
      for (auto* f : sel) {
        auto r = run_fixture(*f);
        passed += r.pass;
        json row{{"name", r.name}, {"pass", r.pass}, {"seconds", r.seconds}};
        if (!r.error.empty()) row["error"] = r.error;
        if (!r.pass) {
          row["expected"] = f->expected;
          row["got"] = r.got;
        }
        rows.push_back(row);
      }
      out({{"fixtures", rows}, {"passed", passed}, {"failed", int(sel.size()) - passed}});
      if (passed != int(sel.size())) res.exit_code = 1;
    }});
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    const int code = app.exit(e, o, er);
    res.out = o.str();
    res.err = er.str();
    res.exit_code = code == 0 ? 0 : 64;
    return res;
  }

  try {
    reload_tolerances();
    for (auto& [s, act] : actions)
      if (s->parsed()) act();
  } catch (const Error& e) {
    res.out.clear();
    res.err = std::string(error_kind_name(e.kind())) + ": " + e.what() + "\n";
    res.exit_code = e.kind() == ErrorKind::Usage ? 64 : is_numerical(e.kind()) ? 3 : 2;
  } catch (const nlohmann::json::exception& e) {
    res.out.clear();
    res.err = std::string("validation: ") + e.what() + "\n";
    res.exit_code = 2;
  }
  return res;
}

}  // namespace equimorse::cli
