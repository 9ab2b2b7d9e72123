#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "korn/discrete_ineq.hpp"
#include "korn/rigid.hpp"

namespace korn {

/// john: truncated norms on both sides; uniform: full norms; weighted:
/// truncated with the d^(p beta) weight on both sides.
enum class KornMode { John, Uniform, Weighted };

KornMode korn_mode_from_string(const std::string& name);
std::string to_string(KornMode mode);

/// Domains on which full-norm (uniform) mode may run.
bool uniform_mode_allowed(DomainKind kind);

double default_tau1(int n);  // 0.9 / (36 sqrt n)
constexpr double kDefaultTau2 = 0.7;

struct KornParams {
  KornMode mode = KornMode::John;
  double s = 0.5;
  double p = 2.0;
  double tau1 = 0.0;
  double tau2 = kDefaultTau2;
  std::optional<double> beta;
  std::size_t max_cells = 20000;
  RmOptions rm;
};

struct KornValue {
  double numerator = 0.0;    // inf over RM of |u - r| on the left-hand side
  double denominator = 0.0;  // X seminorm on the right-hand side
  double quotient = 0.0;
  bool rigid = false;        // numerator below the zero tolerance
  Skew A;
  int iterations = 0;
  bool converged = true;
};

/// Numerator at or below zero_tol * max|u| counts as an RM field, giving
/// quotient 0 whatever the denominator.
constexpr double kRigidTol = 1e-10;

KornValue korn_quotient(const Field& u, const KornParams& kp);

struct ExperimentConfig {
  DomainSpec domain;
  std::vector<int> resolutions;  // refinement study; empty = {domain.resolution}
  KornMode mode = KornMode::John;
  std::vector<double> s_grid{0.5};
  std::vector<double> p_grid{2.0};
  std::optional<double> tau1;  // default_tau1(n)
  std::optional<double> tau2;  // kDefaultTau2
  bool tau_override = false;   // allow tau outside the admissible ranges
  std::optional<double> beta;
  std::vector<double> beta_grid{-0.5, -0.25, 0.0, 0.25};
  std::vector<double> gamma_grid{-0.4, -0.2, 0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<std::string> fields;  // empty = field_battery
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  double whitney_min_cells = 2.0;
  std::string tree_strategy = "bfs";
  int hardy_trials = 4;
  std::uint64_t seed = 1;
  std::size_t max_cells = 20000;
  bool plots = true;
};

ExperimentConfig parse_config(const std::string& json_text);
std::string config_json(const ExperimentConfig& cfg);

/// Throws on invalid settings; returns warnings (beta violating the
/// weighted condition for the given lambda).
std::vector<std::string> validate_config(const ExperimentConfig& cfg, int dim, double lambda);

/// random-smooth per seed, identity, shear, vortex, plus jump-slit on the
/// slit square.
std::vector<std::string> field_battery(DomainKind kind, const std::vector<std::uint64_t>& seeds);

KornParams korn_params(const ExperimentConfig& cfg, int dim, double s, double p);

struct KornEntry {
  int resolution = 0;
  double s = 0.0;
  double p = 0.0;
  std::string field;
  KornValue value;
};

struct KornReport {
  KornMode mode = KornMode::John;
  std::vector<KornEntry> entries;
  /// Max quotient over the battery at (resolution, s, p).
  double empirical_constant(int resolution, double s, double p) const;
};

KornReport korn_quotient(const ExperimentConfig& cfg);

/// Radius pairs (r, R) with R in {Rmax, Rmax/2} and r = R/2^k >= rmin,
/// k >= 2.
std::vector<RadiusPair> assouad_pairs(double rmin, double Rmax);

/// Assouad exponent of the discretized boundary.
AssouadFit boundary_assouad(const GridDomain& d);

struct ConditionPoint {
  double s = 0.0;
  double p = 0.0;
  double beta = 0.0;
  double gamma = 0.0;  // beta + 1 - s
  double threshold = 0.0;  // -(n - lambda) / p
  bool admissible = false;
  double c_tree = 0.0;  // theta = 2
  double bound = 0.0;   // min over the theta grid
  double best_theta = 0.0;
};

struct ConditionReport {
  int dim = 2;
  double lambda = 0.0;
  std::vector<ConditionPoint> points;
};

/// Tags each (s, p, beta) sweep point against the weighted condition and
/// pairs it with C_tree for weights l^(n + p gamma), gamma = beta + 1 - s.
ConditionReport condition_check(const ExperimentConfig& cfg, const WhitneyDecomposition& decomp,
                                const RootedTree& tree, double lambda);

/// Weighted-condition test on its own.
bool beta_admissible(double beta, double s, double p, int n, double lambda);

struct ReportFiles {
  std::vector<std::string> written;
};

/// domain -> whitney -> tree -> stats -> seminorms -> quotients; writes
/// report.json, tables/*.csv and plots/*.svg under out_dir. Stage failures
/// are re-thrown as "stage <name>: ...".
ReportFiles run_report(const ExperimentConfig& cfg, const std::string& out_dir);

}  // namespace korn
