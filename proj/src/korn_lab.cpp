#include "korn/korn_lab.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "json.hpp"

namespace korn {

KornMode korn_mode_from_string(const std::string& name) {
  if (name == "john") return KornMode::John;
  if (name == "uniform") return KornMode::Uniform;
  if (name == "weighted") return KornMode::Weighted;
  throw Error("unknown korn mode: " + name);
}

std::string to_string(KornMode mode) {
  switch (mode) {
    case KornMode::John: return "john";
    case KornMode::Uniform: return "uniform";
    case KornMode::Weighted: return "weighted";
  }
  return "?";
}

bool uniform_mode_allowed(DomainKind kind) {
  // Slit square is John but not uniform.
  return kind == DomainKind::UnitSquare || kind == DomainKind::LShape || kind == DomainKind::KochPrefractal ||
         kind == DomainKind::Cube3d;
}

double default_tau1(int n) { return 0.9 / (36.0 * std::sqrt(static_cast<double>(n))); }

KornValue korn_quotient(const Field& u, const KornParams& kp) {
  u.check();
  if (kp.mode == KornMode::Uniform && !uniform_mode_allowed(u.domain->spec().kind))
    throw Error("uniform mode is not available on " + to_string(u.domain->spec().kind));
  if (kp.mode == KornMode::Weighted && !kp.beta) throw Error("weighted mode needs beta");

  SeminormParams lhs;
  lhs.s = kp.s;
  lhs.p = kp.p;
  lhs.max_cells = kp.max_cells;
  SeminormParams rhs = lhs;
  RmKind kind = RmKind::Full;
  if (kp.mode != KornMode::Uniform) {
    lhs.tau = kp.tau1;
    rhs.tau = kp.tau2;
    kind = RmKind::Truncated;
    if (kp.mode == KornMode::Weighted) {
      lhs.beta = rhs.beta = kp.beta;
      kind = RmKind::Weighted;
    }
  }

  KornValue out;
  const RmResult m = min_over_rm(u, lhs, kind, kp.rm);
  out.numerator = m.value;
  out.A = m.A;
  out.iterations = m.iterations;
  out.converged = m.converged;
  switch (kp.mode) {
    case KornMode::Uniform: out.denominator = x_seminorm(u, rhs); break;
    case KornMode::John: out.denominator = truncated(u, rhs, SeminormKind::X); break;
    case KornMode::Weighted: out.denominator = weighted_truncated(u, rhs, SeminormKind::X); break;
  }
  const double scale = u.values.size() ? u.values.cwiseAbs().maxCoeff() : 0.0;
  if (out.numerator <= kRigidTol * scale) {
    out.rigid = true;
    out.quotient = 0.0;
  } else {
    out.quotient = out.denominator > 0.0 ? out.numerator / out.denominator : std::numeric_limits<double>::infinity();
  }
  return out;
}

namespace {

using Json = nlohmann::json;

std::vector<double> number_list(const Json& j, const char* key) {
  if (j.is_number()) return {j.get<double>()};
  if (!j.is_array() || j.empty()) throw Error(std::string("config: ") + key + " must be a number or a non-empty list");
  return j.get<std::vector<double>>();
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw Error("config: expected a JSON object");
  static const std::set<std::string> known{"domain", "resolutions", "mode", "s", "p", "tau1", "tau2", "tau_override",
                                           "beta", "beta_grid", "gamma_grid", "fields", "seeds",
                                           "whitney_min_cells", "tree", "hardy_trials", "seed", "max_cells", "plots"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw Error("config: unknown key '" + k + "'");

  ExperimentConfig c;
  try {
    if (j.contains("domain")) {
      const Json& d = j["domain"];
      c.domain.kind = domain_kind_from_string(d.at("kind").get<std::string>());
      c.domain.resolution = d.value("resolution", c.domain.resolution);
      c.domain.depth = d.value("depth", 0);
    }
    if (j.contains("resolutions")) c.resolutions = j["resolutions"].get<std::vector<int>>();
    if (j.contains("mode")) c.mode = korn_mode_from_string(j["mode"].get<std::string>());
    if (j.contains("s")) c.s_grid = number_list(j["s"], "s");
    if (j.contains("p")) c.p_grid = number_list(j["p"], "p");
    if (j.contains("tau1")) c.tau1 = j["tau1"].get<double>();
    if (j.contains("tau2")) c.tau2 = j["tau2"].get<double>();
    c.tau_override = j.value("tau_override", false);
    if (j.contains("beta") && !j["beta"].is_null()) c.beta = j["beta"].get<double>();
    if (j.contains("beta_grid")) c.beta_grid = number_list(j["beta_grid"], "beta_grid");
    if (j.contains("gamma_grid")) c.gamma_grid = number_list(j["gamma_grid"], "gamma_grid");
    if (j.contains("fields")) c.fields = j["fields"].get<std::vector<std::string>>();
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    c.whitney_min_cells = j.value("whitney_min_cells", c.whitney_min_cells);
    c.tree_strategy = j.value("tree", c.tree_strategy);
    c.hardy_trials = j.value("hardy_trials", c.hardy_trials);
    c.seed = j.value("seed", c.seed);
    c.max_cells = j.value("max_cells", c.max_cells);
    c.plots = j.value("plots", c.plots);
  } catch (const Json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  return c;
}

std::string config_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["domain"] = {{"kind", to_string(c.domain.kind)}, {"resolution", c.domain.resolution}, {"depth", c.domain.depth}};
  j["resolutions"] = c.resolutions;
  j["mode"] = to_string(c.mode);
  j["s"] = c.s_grid;
  j["p"] = c.p_grid;
  if (c.tau1) j["tau1"] = *c.tau1;
  if (c.tau2) j["tau2"] = *c.tau2;
  j["tau_override"] = c.tau_override;
  if (c.beta) j["beta"] = *c.beta;
  j["beta_grid"] = c.beta_grid;
  j["gamma_grid"] = c.gamma_grid;
  j["fields"] = c.fields;
  j["seeds"] = c.seeds;
  j["whitney_min_cells"] = c.whitney_min_cells;
  j["tree"] = c.tree_strategy;
  j["hardy_trials"] = c.hardy_trials;
  j["seed"] = c.seed;
  j["max_cells"] = c.max_cells;
  j["plots"] = c.plots;
  return j.dump(2);
}

bool beta_admissible(double beta, double s, double p, int n, double lambda) {
  return beta + 1.0 - s > -(n - lambda) / p;
}

std::vector<std::string> validate_config(const ExperimentConfig& c, int dim, double lambda) {
  std::vector<std::string> warnings;
  const std::vector<int> res = c.resolutions.empty() ? std::vector<int>{c.domain.resolution} : c.resolutions;
  for (int r : res)
    if (r < 8) throw Error("config: resolution must be >= 8");
  for (double s : c.s_grid)
    if (!(s > 0.0 && s < 1.0)) throw Error("config: s must lie in (0, 1)");
  for (double p : c.p_grid)
    if (!(p >= 1.1 && p <= 10.0)) throw Error("config: p must lie in [1.1, 10]");
  const double tau1 = c.tau1.value_or(default_tau1(dim));
  const double tau2 = c.tau2.value_or(kDefaultTau2);
  if (!(tau1 > 0.0 && tau1 < 1.0) || !(tau2 > 0.0 && tau2 < 1.0)) throw Error("config: tau must lie in (0, 1)");
  if (!c.tau_override) {
    if (!(tau1 < 1.0 / (36.0 * std::sqrt(static_cast<double>(dim)))))
      throw Error("config: tau1 must be below 1/(36 sqrt n); set tau_override to relax");
    if (!(tau2 >= 0.6)) throw Error("config: tau2 must be in [3/5, 1); set tau_override to relax");
  }
  if (c.mode == KornMode::Weighted && !c.beta) throw Error("config: weighted mode needs beta");
  if (c.mode == KornMode::Uniform && !uniform_mode_allowed(c.domain.kind))
    throw Error("config: uniform mode is not available on " + to_string(c.domain.kind));
  if (c.whitney_min_cells <= 0.0) throw Error("config: whitney_min_cells must be positive");
  if (c.hardy_trials < 1) throw Error("config: hardy_trials must be >= 1");
  tree_strategy_from_string(c.tree_strategy);
  if (c.beta)
    for (double s : c.s_grid)
      for (double p : c.p_grid)
        if (!beta_admissible(*c.beta, s, p, dim, lambda))
          warnings.push_back("beta = " + std::to_string(*c.beta) + " violates the weighted condition at s = " +
                             std::to_string(s) + ", p = " + std::to_string(p) + " (lambda = " +
                             std::to_string(lambda) + ")");
  return warnings;
}

std::vector<std::string> field_battery(DomainKind kind, const std::vector<std::uint64_t>& seeds) {
  std::vector<std::string> out;
  for (auto s : seeds) out.push_back("random-smooth(" + std::to_string(s) + ")");
  out.insert(out.end(), {"identity", "shear", "vortex"});
  if (kind == DomainKind::SlitSquare) out.push_back("jump-slit");
  return out;
}

KornParams korn_params(const ExperimentConfig& cfg, int dim, double s, double p) {
  KornParams kp;
  kp.mode = cfg.mode;
  kp.s = s;
  kp.p = p;
  kp.tau1 = cfg.tau1.value_or(default_tau1(dim));
  kp.tau2 = cfg.tau2.value_or(kDefaultTau2);
  kp.beta = cfg.beta;
  kp.max_cells = cfg.max_cells;
  return kp;
}

double KornReport::empirical_constant(int resolution, double s, double p) const {
  double best = 0.0;
  bool any = false;
  for (const auto& e : entries)
    if (e.resolution == resolution && e.s == s && e.p == p) {
      best = std::max(best, e.value.quotient);
      any = true;
    }
  if (!any) throw Error("empirical_constant: no entries at this point");
  return best;
}

KornReport korn_quotient(const ExperimentConfig& cfg) {
  KornReport rep;
  rep.mode = cfg.mode;
  const std::vector<int> res = cfg.resolutions.empty() ? std::vector<int>{cfg.domain.resolution} : cfg.resolutions;
  for (int r : res) {
    DomainSpec spec = cfg.domain;
    spec.resolution = r;
    const GridDomain d = build_domain(spec);
    const auto names = cfg.fields.empty() ? field_battery(spec.kind, cfg.seeds) : cfg.fields;
    std::vector<Field> fields;
    for (const auto& name : names) fields.push_back(make_field(d, name));
    for (double s : cfg.s_grid)
      for (double p : cfg.p_grid) {
        const KornParams kp = korn_params(cfg, d.dim(), s, p);
        for (std::size_t f = 0; f < fields.size(); ++f) {
          KornEntry e;
          e.resolution = r;
          e.s = s;
          e.p = p;
          e.field = names[f];
          e.value = korn_quotient(fields[f], kp);
          rep.entries.push_back(std::move(e));
        }
      }
  }
  return rep;
}

std::vector<RadiusPair> assouad_pairs(double rmin, double Rmax) {
  std::vector<RadiusPair> out;
  for (double R : {Rmax, 0.5 * Rmax})
    for (double r = R / 4.0; r >= rmin * (1.0 - 1e-12); r *= 0.5) out.push_back({r, R});
  return out;
}

AssouadFit boundary_assouad(const GridDomain& d) {
  const PointCloud cloud = boundary_cloud(d, d.h());
  const DomainRadii radii = domain_radii(d);
  const auto pairs = assouad_pairs(2.0 * d.h(), radii.outer);
  return assouad_estimate(cloud, pairs);
}

ConditionReport condition_check(const ExperimentConfig& cfg, const WhitneyDecomposition& decomp,
                                const RootedTree& tree, double lambda) {
  ConditionReport rep;
  rep.dim = decomp.dim;
  rep.lambda = lambda;
  const int n = decomp.dim;
  for (double s : cfg.s_grid)
    for (double p : cfg.p_grid)
      for (double beta : cfg.beta_grid) {
        ConditionPoint pt;
        pt.s = s;
        pt.p = p;
        pt.beta = beta;
        pt.gamma = beta + 1.0 - s;
        pt.threshold = -(n - lambda) / p;
        pt.admissible = beta_admissible(beta, s, p, n, lambda);
        const TreeWeights w = power_weights(decomp, p, pt.gamma);
        pt.c_tree = c_tree(tree, w, p, 2.0).value;
        const HardyBound hb = hardy_bound(tree, w, p);
        pt.bound = hb.bound;
        pt.best_theta = hb.theta;
        rep.points.push_back(pt);
      }
  return rep;
}

}  // namespace korn
