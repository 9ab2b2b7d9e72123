#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include "json.hpp"
#include "korn/io.hpp"
#include "korn/korn_lab.hpp"

namespace korn {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

struct Series {
  std::string name;
  std::vector<double> x, y;
};

// Static line plot; log scale on y when every value is positive and
// `logy` is set. Output depends only on the data.
std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                     const std::vector<Series>& series, bool logy) {
  constexpr double W = 640, H = 420, L = 70, R = 150, T = 40, B = 50;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  bool positive = true;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
      positive = positive && s.y[i] > 0.0;
    }
  logy = logy && positive;
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  const auto fy = [&](double y) { return logy ? std::log10(y) : y; };
  double a = fy(y0), b = fy(y1);
  if (b - a < 1e-12) a -= 0.5, b += 0.5;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  const auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  const auto py = [&](double y) { return H - B - (fy(y) - a) / (b - a) * (H - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0;
    const double yv = a + (b - a) * k / 4.0;
    const double ylab = logy ? std::pow(10.0, yv) : yv;
    o << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << format_double(std::round(xv * 1e4) / 1e4)
      << "</text>\n";
    o << "<text x=\"" << L - 6 << "\" y=\"" << H - B - (yv - a) / (b - a) * (H - T - B) + 4
      << "\" text-anchor=\"end\">" << format_double(std::round(ylab * 1e4) / 1e4) << "</text>\n";
  }
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  o << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 16 " << (T + H - B) / 2
    << ")\" text-anchor=\"middle\">" << ylabel << (logy ? " (log)" : "") << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* c = colors[k % 7];
    o << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (std::isfinite(s.y[i])) o << px(s.x[i]) << "," << py(s.y[i]) << " ";
    o << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (std::isfinite(s.y[i]))
        o << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"3\" fill=\"" << c << "\"/>\n";
    o << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 16 * (k + 1) << "\" fill=\"" << c << "\">" << s.name
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string num(double x) { return format_double(x); }

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(std::string("stage ") + name + ": " + e.what());
  }
}

struct Built {
  int resolution = 0;
  GridDomain domain;
  WhitneyDecomposition decomp;
  WhitneyReport check;
  RootedTree tree;
  JohnConstant john;
  ShadowStats stats;
};

}  // namespace

ReportFiles run_report(const ExperimentConfig& cfg, const std::string& out_dir) {
  ReportFiles files;
  const fs::path root(out_dir);
  fs::create_directories(root / "tables");
  if (cfg.plots) fs::create_directories(root / "plots");
  const auto emit = [&](const fs::path& rel, const std::string& text) {
    write_text((root / rel).string(), text);
    files.written.push_back(rel.generic_string());
  };

  const std::vector<int> res = cfg.resolutions.empty() ? std::vector<int>{cfg.domain.resolution} : cfg.resolutions;
  const TreeStrategy strategy = tree_strategy_from_string(cfg.tree_strategy);

  std::vector<Built> built;
  for (int r : res) {
    Built b;
    b.resolution = r;
    DomainSpec spec = cfg.domain;
    spec.resolution = r;
    b.domain = stage("domain", [&] { return build_domain(spec); });
    b.decomp = stage("whitney", [&] {
      WhitneyOptions wo;
      wo.min_cells = cfg.whitney_min_cells;
      return whitney_decompose(b.domain, wo);
    });
    b.check = stage("whitney", [&] { return validate_whitney(b.decomp, b.domain); });
    b.tree = stage("tree", [&] { return build_tree(b.decomp, strategy); });
    b.john = stage("stats", [&] { return john_constant(b.tree, b.decomp); });
    b.stats = stage("stats", [&] { return shadow_stats(b.tree, b.decomp); });
    built.push_back(std::move(b));
  }
  const Built& base = built.back();  // finest resolution carries the structural sweeps
  const int n = base.domain.dim();

  const AssouadFit fit = stage("assouad", [&] { return boundary_assouad(base.domain); });
  const double lambda = fit.exponent;
  const auto warnings = stage("config", [&] { return validate_config(cfg, n, lambda); });

  // Structure tables.
  {
    std::ostringstream t;
    t << "resolution,cells,cubes,residual,lower_violations,upper_violations,neighbor_violations,min_ratio,max_ratio,"
         "tree_depth,K,K_argmax,M\n";
    for (const auto& b : built) {
      const int depth = *std::max_element(b.tree.depth.begin(), b.tree.depth.end());
      t << b.resolution << "," << b.domain.size() << "," << b.decomp.size() << "," << num(b.check.residual) << ","
        << b.check.lower_violations << "," << b.check.upper_violations << "," << b.check.neighbor_violations << ","
        << num(b.check.min_ratio) << "," << num(b.check.max_ratio) << "," << depth << "," << num(b.john.K) << ","
        << b.john.argmax << "," << b.stats.M << "\n";
    }
    emit("tables/structure.csv", t.str());
  }

  // Hardy constants with gamma = 1 - s.
  Json hardy_json = Json::array();
  stage("hardy", [&] {
    std::ostringstream t;
    t << "s,p,gamma,c_tree,best_theta,bound,hardy_estimate,converged\n";
    for (double s : cfg.s_grid)
      for (double p : cfg.p_grid) {
        const TreeWeights w = power_weights(base.decomp, p, 1.0 - s);
        const HardyBound hb = hardy_bound(base.tree, w, p);
        HardyOptions ho;
        ho.trials = cfg.hardy_trials;
        ho.seed = cfg.seed;
        const HardyEstimate he = hardy_best_constant(base.tree, w, p, ho);
        t << num(s) << "," << num(p) << "," << num(1.0 - s) << "," << num(hb.c_tree) << "," << num(hb.theta) << ","
          << num(hb.bound) << "," << num(he.value) << "," << (he.converged ? 1 : 0) << "\n";
        hardy_json.push_back({{"s", s}, {"p", p}, {"c_tree", hb.c_tree}, {"best_theta", hb.theta},
                              {"bound", hb.bound}, {"hardy_estimate", he.value}, {"argmax_node", hb.argmax}});
      }
    emit("tables/hardy.csv", t.str());
    return 0;
  });

  // C_tree against gamma.
  std::vector<Series> ctree_series;
  stage("ctree", [&] {
    std::ostringstream t;
    t << "p,gamma,c_tree,bound,best_theta\n";
    for (double p : cfg.p_grid) {
      Series sr{"p=" + num(p), {}, {}};
      for (double g : cfg.gamma_grid) {
        const TreeWeights w = power_weights(base.decomp, p, g);
        const double c = c_tree(base.tree, w, p, 2.0).value;
        const HardyBound hb = hardy_bound(base.tree, w, p);
        t << num(p) << "," << num(g) << "," << num(c) << "," << num(hb.bound) << "," << num(hb.theta) << "\n";
        sr.x.push_back(g);
        sr.y.push_back(c);
      }
      ctree_series.push_back(std::move(sr));
    }
    emit("tables/ctree_gamma.csv", t.str());
    return 0;
  });

  const ConditionReport cond = stage("conditions", [&] { return condition_check(cfg, base.decomp, base.tree, lambda); });
  {
    std::ostringstream t;
    t << "s,p,beta,gamma,threshold,admissible,c_tree,bound,best_theta\n";
    for (const auto& pt : cond.points)
      t << num(pt.s) << "," << num(pt.p) << "," << num(pt.beta) << "," << num(pt.gamma) << "," << num(pt.threshold)
        << "," << (pt.admissible ? 1 : 0) << "," << num(pt.c_tree) << "," << num(pt.bound) << ","
        << num(pt.best_theta) << "\n";
    emit("tables/conditions.csv", t.str());
  }

  const KornReport korn = stage("korn", [&] { return korn_quotient(cfg); });
  {
    std::ostringstream t;
    t << "resolution,s,p,field,numerator,denominator,quotient,rigid,iterations,converged\n";
    for (const auto& e : korn.entries)
      t << e.resolution << "," << num(e.s) << "," << num(e.p) << "," << e.field << "," << num(e.value.numerator)
        << "," << num(e.value.denominator) << "," << num(e.value.quotient) << "," << (e.value.rigid ? 1 : 0) << ","
        << e.value.iterations << "," << (e.value.converged ? 1 : 0) << "\n";
    emit("tables/korn.csv", t.str());
  }
  Json korn_json = Json::array();
  {
    std::ostringstream t;
    t << "s,p";
    for (int r : res) t << ",constant_" << r;
    t << ",trend\n";
    for (double s : cfg.s_grid)
      for (double p : cfg.p_grid) {
        t << num(s) << "," << num(p);
        std::vector<double> cs;
        for (int r : res) {
          cs.push_back(korn.empirical_constant(r, s, p));
          t << "," << num(cs.back());
        }
        const double trend = cs.front() > 0.0 ? cs.back() / cs.front() : 1.0;
        t << "," << num(trend) << "\n";
        korn_json.push_back({{"s", s}, {"p", p}, {"resolutions", res}, {"constant", cs}, {"trend", trend}});
      }
    emit("tables/korn_summary.csv", t.str());
  }

  if (cfg.plots) {
    std::vector<Series> qs;
    for (double p : cfg.p_grid) {
      Series sr{"p=" + num(p), {}, {}};
      for (double s : cfg.s_grid) {
        sr.x.push_back(s);
        sr.y.push_back(korn.empirical_constant(res.back(), s, p));
      }
      qs.push_back(std::move(sr));
    }
    emit("plots/quotient_vs_s.svg", svg_plot("Empirical Korn constant, resolution " + std::to_string(res.back()), "s",
                                             "max quotient", qs, true));
    emit("plots/ctree_vs_gamma.svg", svg_plot("C_tree (theta = 2) against gamma", "gamma", "C_tree", ctree_series, true));
    std::vector<Series> rs;
    for (double s : cfg.s_grid)
      for (double p : cfg.p_grid) {
        Series sr{"s=" + num(s) + " p=" + num(p), {}, {}};
        for (int r : res) {
          sr.x.push_back(std::log2(static_cast<double>(r)));
          sr.y.push_back(korn.empirical_constant(r, s, p));
        }
        rs.push_back(std::move(sr));
      }
    emit("plots/refinement.svg", svg_plot("Refinement trend", "log2 resolution", "max quotient", rs, true));
  }

  Json j;
  j["config"] = Json::parse(config_json(cfg));
  j["warnings"] = warnings;
  j["assouad"] = {{"lambda", lambda}, {"constant", fit.constant}};
  Json structure = Json::array();
  for (const auto& b : built)
    structure.push_back({{"resolution", b.resolution},
                         {"cells", b.domain.size()},
                         {"cubes", b.decomp.size()},
                         {"residual", b.check.residual},
                         {"whitney_ok", b.check.ok()},
                         {"K", b.john.K},
                         {"M", b.stats.M}});
  j["structure"] = structure;
  j["hardy"] = hardy_json;
  Json cj = Json::array();
  for (const auto& pt : cond.points)
    cj.push_back({{"s", pt.s}, {"p", pt.p}, {"beta", pt.beta}, {"gamma", pt.gamma}, {"admissible", pt.admissible},
                  {"c_tree", pt.c_tree}, {"bound", pt.bound}});
  j["conditions"] = cj;
  j["korn"] = {{"mode", to_string(korn.mode)}, {"summary", korn_json}};
  files.written.insert(files.written.begin(), "report.json");
  write_text((root / "report.json").string(), j.dump(2) + "\n");
  return files;
}

}  // namespace korn
