// korn-lab: command-line front end to the korn library.
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "korn/io.hpp"
#include "korn/korn_lab.hpp"

using namespace korn;
using Json = nlohmann::ordered_json;

namespace {

struct Globals {
  std::uint64_t seed = 1;
  int threads = 1;
  std::size_t max_cells = 20000;
};

void emit_json(const Json& j, const std::string& out) {
  const std::string text = j.dump(2) + "\n";
  if (out.empty())
    std::cout << text;
  else
    write_text(out, text);
}

// Non-finite values become strings so the JSON stays valid and readable.
Json jnum(double x) {
  if (std::isfinite(x)) return x;
  return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

Json skew_json(const Skew& A) {
  Json j = Json::object();
  const auto pairs = skew_pairs(A.dim);
  for (std::size_t k = 0; k < pairs.size(); ++k)
    j["a" + std::to_string(pairs[k].first) + std::to_string(pairs[k].second)] = jnum(A.coeffs[static_cast<Eigen::Index>(k)]);
  return j;
}

GridDomain load_domain(const std::string& domain_path, const std::string& spec_path) {
  if (!domain_path.empty()) return read_domain(domain_path);
  if (!spec_path.empty()) return build_domain(read_domain_spec(spec_path));
  throw Error("need --domain or --spec");
}

Field load_field(const GridDomain& d, const std::string& name, const std::string& csv) {
  if (!csv.empty()) return read_field_csv(csv, d);
  return make_field(d, name);
}

std::vector<int> parse_region(const std::string& region, const GridDomain& d, const std::string& cubes_path) {
  if (region == "all") return {};
  if (region.rfind("cube:", 0) == 0) {
    if (cubes_path.empty()) throw Error("--region cube:ID needs --cubes");
    const WhitneyDecomposition dec = read_cubes_csv(cubes_path);
    const int id = std::stoi(region.substr(5));
    if (id < 0 || static_cast<std::size_t>(id) >= dec.size()) throw Error("cube id out of range");
    const auto cells = cells_in(d, smooth_cube(dec.cubes[static_cast<std::size_t>(id)], d.dim(), choose_N(d.dim())));
    if (cells.size() < 2) throw Error("smoothened cube " + std::to_string(id) + " holds fewer than 2 cells");
    return cells;
  }
  throw Error("region must be 'all' or 'cube:ID'");
}

Json hardy_json(const RootedTree& tree, const TreeWeights& w, double p, const std::vector<double>& grid,
                bool inclusive, std::optional<HardyOptions> ho) {
  const HardyBound hb = hardy_bound(tree, w, p, grid, inclusive);
  Json j;
  j["c_tree"] = jnum(hb.c_tree);
  j["best_theta"] = hb.theta;
  j["bound"] = jnum(hb.bound);
  j["argmax_node"] = hb.argmax;
  if (ho) {
    const HardyEstimate he = hardy_best_constant(tree, w, p, *ho);
    j["hardy_estimate"] = jnum(he.value);
    j["converged"] = he.converged;
    j["iterations"] = he.iterations;
  } else {
    j["hardy_estimate"] = nullptr;
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical lab for fractional Korn inequalities"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Base seed for random generators")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads for pair sums")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--max-cells", g.max_cells, "Cap on cells for full O(M^2) pair sums")->capture_default_str();

  // domain
  auto* dom = app.add_subcommand("domain", "Rasterize a domain and dump it");
  std::string dom_spec, dom_out, dom_pbm, dom_cells, dom_kind;
  int dom_res = 32, dom_depth = 0;
  dom->add_option("--spec", dom_spec, "Domain spec JSON file");
  dom->add_option("--kind", dom_kind, "Domain kind, instead of --spec");
  dom->add_option("--resolution", dom_res, "Cells per unit length (with --kind)");
  dom->add_option("--depth", dom_depth, "Koch depth (with --kind)");
  dom->add_option("--out", dom_out, "Binary domain file")->required();
  dom->add_option("--pbm", dom_pbm, "Bitmap grid (default: <out>.pbm)");
  dom->add_option("--cells", dom_cells, "Cell table CSV (default: <out>.cells.csv)");

  // whitney
  auto* wh = app.add_subcommand("whitney", "Whitney decomposition");
  std::string wh_domain, wh_out, wh_edges, wh_report;
  double wh_min_cells = WhitneyOptions{}.min_cells;
  wh->add_option("--domain", wh_domain, "Binary domain file")->required();
  wh->add_option("--out", wh_out, "Cube CSV")->required();
  wh->add_option("--edges", wh_edges, "Neighbor edge CSV (default: <out stem>_edges.csv)");
  wh->add_option("--min-cells", wh_min_cells, "Smallest cube side in cells")->capture_default_str();
  wh->add_option("--report", wh_report, "Validation JSON (default: stdout)");

  // tree
  auto* tr = app.add_subcommand("tree", "Spanning tree over Whitney cubes");
  std::string tr_cubes, tr_out, tr_report, tr_strategy = "bfs";
  tr->add_option("--cubes", tr_cubes, "Cube CSV")->required();
  tr->add_option("--strategy", tr_strategy, "bfs or dfs")->capture_default_str();
  tr->add_option("--out", tr_out, "Tree CSV")->required();
  tr->add_option("--report", tr_report, "Shadow statistics JSON (default: stdout)");

  // ctree / hardy share their options
  std::string ct_tree, ct_cubes, ct_out;
  double ct_gamma = 0.5, ct_p = 2.0;
  int ct_dim = 2, hd_trials = 8;
  bool ct_inclusive = false;
  std::vector<double> ct_grid = default_theta_grid();
  auto* ct = app.add_subcommand("ctree", "Sufficient-condition constant C_tree");
  auto* hd = app.add_subcommand("hardy", "Best Hardy constant and its C_tree bound");
  for (auto* sc : {ct, hd}) {
    sc->add_option("--tree", ct_tree, "Tree CSV")->required();
    sc->add_option("--cubes", ct_cubes, "Cube CSV for exact sides (else 2^-level)");
    sc->add_option("--dim", ct_dim, "Dimension when no cube file is given")->capture_default_str();
    sc->add_option("--gamma", ct_gamma, "Weight exponent: l^(n + p gamma)")->capture_default_str();
    sc->add_option("--p", ct_p, "Exponent p")->capture_default_str();
    sc->add_option("--theta-grid", ct_grid, "theta values (> 1)");
    sc->add_flag("--inclusive", ct_inclusive, "Partial sums include the node itself");
    sc->add_option("--out", ct_out, "Output JSON (default: stdout)");
  }
  hd->add_option("--trials", hd_trials, "Random starts for p != 2")->capture_default_str();

  // seminorm / project / minrm share field options
  std::string fd_domain, fd_spec, fd_field = "random-smooth(1)", fd_csv, fd_out;
  double fd_s = 0.5, fd_p = 2.0;
  std::optional<double> fd_tau, fd_beta;
  auto* sn = app.add_subcommand("seminorm", "Evaluate a seminorm");
  auto* pj = app.add_subcommand("project", "Projection onto skew fields");
  auto* mr = app.add_subcommand("minrm", "Minimize over rigid motions");
  for (auto* sc : {sn, pj, mr}) {
    sc->add_option("--domain", fd_domain, "Binary domain file");
    sc->add_option("--spec", fd_spec, "Domain spec JSON (instead of --domain)");
    sc->add_option("--field", fd_field, "Field generator name")->capture_default_str();
    sc->add_option("--field-csv", fd_csv, "Field CSV (cell, v1..vn)");
    sc->add_option("--s", fd_s, "Smoothness s")->capture_default_str();
    sc->add_option("--out", fd_out, "Output JSON (default: stdout)");
  }
  for (auto* sc : {sn, mr}) {
    sc->add_option("--p", fd_p, "Exponent p")->capture_default_str();
    sc->add_option("--tau", fd_tau, "Truncation tau");
    sc->add_option("--beta", fd_beta, "Weight exponent beta");
  }
  std::string sn_kind = "gagliardo";
  bool sn_sym = false;
  sn->add_option("--kind", sn_kind, "gagliardo or x")->capture_default_str();
  sn->add_flag("--symmetrize", sn_sym, "Truncate by tau min(delta_i, delta_j)");
  std::string pj_region = "all", pj_cubes;
  pj->add_option("--region", pj_region, "all or cube:ID")->capture_default_str();
  pj->add_option("--cubes", pj_cubes, "Cube CSV for cube regions");
  std::string mr_kind = "full", mr_solver = "newton";
  mr->add_option("--kind", mr_kind, "full, truncated or weighted")->capture_default_str();
  mr->add_option("--solver", mr_solver, "newton or coordinate")->capture_default_str();

  // korn / report
  std::string kn_config, kn_out;
  auto* kn = app.add_subcommand("korn", "Korn quotients over a field battery");
  kn->add_option("--config", kn_config, "Experiment config JSON")->required();
  kn->add_option("--out", kn_out, "Output JSON (default: stdout)");
  std::string rp_config, rp_out = "report";
  auto* rp = app.add_subcommand("report", "Full pipeline with tables and plots");
  rp->add_option("--config", rp_config, "Experiment config JSON (default config when omitted)");
  rp->add_option("--out", rp_out, "Output directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  set_num_threads(g.threads);

  try {
    if (*dom) {
      DomainSpec spec;
      if (!dom_spec.empty()) {
        spec = read_domain_spec(dom_spec);
      } else if (!dom_kind.empty()) {
        spec.kind = domain_kind_from_string(dom_kind);
        spec.resolution = dom_res;
        spec.depth = dom_depth;
      } else {
        throw Error("domain: need --spec or --kind");
      }
      const GridDomain d = build_domain(spec);
      write_domain(dom_out, d);
      write_domain_pbm(dom_pbm.empty() ? dom_out + ".pbm" : dom_pbm, d);
      write_cells_csv(dom_cells.empty() ? dom_out + ".cells.csv" : dom_cells, d);
      std::cout << "cells " << d.size() << " h " << d.h() << " boundary_faces " << d.boundary_faces().size() << "\n";
    } else if (*wh) {
      const GridDomain d = read_domain(wh_domain);
      WhitneyOptions wo;
      wo.min_cells = wh_min_cells;
      const WhitneyDecomposition dec = whitney_decompose(d, wo);
      write_cubes_csv(wh_out, dec);
      std::string edges = wh_edges;
      if (edges.empty()) {
        std::filesystem::path p(wh_out);
        edges = (p.parent_path() / (p.stem().string() + "_edges.csv")).string();
      }
      write_edges_csv(edges, dec);
      const WhitneyReport r = validate_whitney(dec, d);
      Json j;
      j["cubes"] = dec.size();
      j["coarsest"] = dec.coarsest;
      j["min_side"] = dec.min_side;
      j["residual"] = r.residual;
      j["lower_violations"] = r.lower_violations;
      j["upper_violations"] = r.upper_violations;
      j["neighbor_violations"] = r.neighbor_violations;
      j["overlap_violations"] = r.overlap_violations;
      j["outside_violations"] = r.outside_violations;
      j["min_ratio"] = r.min_ratio;
      j["max_ratio"] = r.max_ratio;
      j["ok"] = r.ok();
      emit_json(j, wh_report);
    } else if (*tr) {
      const WhitneyDecomposition dec = read_cubes_csv(tr_cubes);
      const RootedTree tree = build_tree(dec, tree_strategy_from_string(tr_strategy));
      write_tree_csv(tr_out, tree);
      const JohnConstant K = john_constant(tree, dec);
      const ShadowStats st = shadow_stats(tree, dec);
      Json j;
      j["nodes"] = tree.size();
      j["root"] = tree.root;
      j["strategy"] = tr_strategy;
      j["K"] = K.K;
      j["K_argmax"] = K.argmax;
      j["M"] = st.M;
      j["levels"] = st.levels;
      j["W_root"] = st.W[static_cast<std::size_t>(tree.root)];
      int maxP = 0;
      for (const auto& row : st.P)
        for (int c : row) maxP = std::max(maxP, c);
      j["max_P"] = maxP;
      emit_json(j, tr_report);
    } else if (*ct || *hd) {
      const RootedTree tree = read_tree_csv(ct_tree);
      TreeWeights w;
      if (!ct_cubes.empty()) {
        const WhitneyDecomposition dec = read_cubes_csv(ct_cubes);
        if (dec.size() != tree.size()) throw Error("tree and cube files disagree on node count");
        w = power_weights(dec, ct_p, ct_gamma);
      } else {
        w = power_weights(tree, ct_dim, ct_p, ct_gamma);
      }
      std::optional<HardyOptions> ho;
      if (*hd) {
        HardyOptions o;
        o.trials = hd_trials;
        o.seed = g.seed;
        o.inclusive = ct_inclusive;
        ho = o;
      }
      emit_json(hardy_json(tree, w, ct_p, ct_grid, ct_inclusive, ho), ct_out);
    } else if (*sn || *pj || *mr) {
      const GridDomain d = load_domain(fd_domain, fd_spec);
      const Field u = load_field(d, fd_field, fd_csv);
      Json j;
      j["field"] = u.label;
      j["cells"] = d.size();
      if (*sn) {
        SeminormParams params;
        params.s = fd_s;
        params.p = fd_p;
        params.tau = fd_tau;
        params.beta = fd_beta;
        params.symmetrize = sn_sym;
        params.max_cells = g.max_cells;
        SeminormKind kind;
        if (sn_kind == "gagliardo") kind = SeminormKind::Gagliardo;
        else if (sn_kind == "x") kind = SeminormKind::X;
        else throw Error("seminorm kind must be gagliardo or x");
        double v;
        if (fd_beta) v = weighted_truncated(u, params, kind);
        else if (fd_tau) v = truncated(u, params, kind);
        else v = kind == SeminormKind::X ? x_seminorm(u, params) : gagliardo(u, params);
        j["kind"] = sn_kind;
        j["s"] = fd_s;
        j["p"] = fd_p;
        j["tau"] = fd_tau ? Json(*fd_tau) : Json(nullptr);
        j["beta"] = fd_beta ? Json(*fd_beta) : Json(nullptr);
        j["value"] = jnum(v);
      } else if (*pj) {
        const auto region = parse_region(pj_region, d, pj_cubes);
        const ProjectionResult r = project(u, region, fd_s);
        j["region"] = pj_region;
        j["region_cells"] = region.empty() ? d.size() : region.size();
        j["s"] = fd_s;
        j["coefficients"] = skew_json(r.coefficients);
        j["orthogonality"] = r.orthogonality;
        SeminormParams params;
        params.s = fd_s;
        params.p = 2.0;
        params.region = region;
        params.max_cells = std::max(g.max_cells, region.empty() ? d.size() : region.size());
        j["residual"] = jnum(rm_objective(u, r.coefficients, params, RmKind::Full));
      } else {
        SeminormParams params;
        params.s = fd_s;
        params.p = fd_p;
        params.tau = fd_tau;
        params.beta = fd_beta;
        params.max_cells = g.max_cells;
        RmOptions opt;
        if (mr_solver == "newton") opt.solver = RmSolver::Newton;
        else if (mr_solver == "coordinate") opt.solver = RmSolver::CoordinateSearch;
        else throw Error("solver must be newton or coordinate");
        const RmResult r = min_over_rm(u, params, rm_kind_from_string(mr_kind), opt);
        j["kind"] = mr_kind;
        j["s"] = fd_s;
        j["p"] = fd_p;
        j["A"] = skew_json(r.A);
        j["value"] = jnum(r.value);
        j["iterations"] = r.iterations;
        j["converged"] = r.converged;
      }
      emit_json(j, fd_out);
    } else if (*kn) {
      ExperimentConfig cfg = parse_config(read_text(kn_config));
      if (!app.get_option("--seed")->empty()) cfg.seed = g.seed;
      if (!app.get_option("--max-cells")->empty()) cfg.max_cells = g.max_cells;
      const int n = cfg.domain.kind == DomainKind::Cube3d ? 3 : 2;
      // lambda only matters for the beta warning
      const double lambda = cfg.beta ? boundary_assouad(build_domain(cfg.domain)).exponent : n - 1.0;
      for (const auto& w : validate_config(cfg, n, lambda)) std::cerr << "warning: " << w << "\n";
      const KornReport rep = korn_quotient(cfg);
      Json j;
      j["mode"] = to_string(rep.mode);
      Json entries = Json::array();
      for (const auto& e : rep.entries)
        entries.push_back({{"resolution", e.resolution},
                           {"s", e.s},
                           {"p", e.p},
                           {"field", e.field},
                           {"numerator", jnum(e.value.numerator)},
                           {"denominator", jnum(e.value.denominator)},
                           {"quotient", jnum(e.value.quotient)},
                           {"rigid", e.value.rigid}});
      j["entries"] = entries;
      emit_json(j, kn_out);
    } else if (*rp) {
      ExperimentConfig cfg;
      if (!rp_config.empty()) cfg = parse_config(read_text(rp_config));
      else cfg.mode = KornMode::Uniform;
      if (!app.get_option("--seed")->empty()) cfg.seed = g.seed;
      if (!app.get_option("--max-cells")->empty()) cfg.max_cells = g.max_cells;
      const ReportFiles files = run_report(cfg, rp_out);
      for (const auto& f : files.written) std::cout << f << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "korn-lab: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
