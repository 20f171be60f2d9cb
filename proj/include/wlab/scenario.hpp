#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "wlab/heintze.hpp"
#include "wlab/reilly.hpp"

namespace wlab {

/// One entry of a config file after validation. `resolved` echoes the
/// entry with every default filled in.
struct Scenario {
  std::string name;
  nlohmann::json geometry;
  double delta = 0;
  int dim = 2;
  DensityField density = DensityField::constant(0.0);
  double m = kInfiniteM;
  std::vector<std::string> checks;
  int refinement_levels = 1;
  Tolerances tolerances;
  bool equality_overridden = false;
  bool pass_overridden = false;
  Vec translate;
  AnalyticFunction u;
  int samples = 10000;
  std::uint64_t seed = 0x5EED;
  nlohmann::json resolved;
};

/// Check identifiers understood by the runner.
const std::vector<std::string>& known_checks();

/// Parses {"scenarios": [...]}. Relative mesh paths resolve against
/// `base_dir`. Throws ConfigError on unknown keys, unknown checks and
/// incompatible combinations.
std::vector<Scenario> parse_config(const nlohmann::json& config, const std::string& base_dir = ".");
std::vector<Scenario> load_config(const std::string& path);

struct RunOptions {
  /// When set, stiffness and mass matrices of every mesh level are written
  /// there in MatrixMarket format.
  std::string dump_operators;
};

struct ScenarioResult {
  Scenario scenario;
  std::vector<CheckReport> checks;
  std::vector<double> level_h;
  double wall_time = 0;
};

ScenarioResult run_scenario(const Scenario& s, const RunOptions& opts = {});
/// Runs scenarios on `jobs` worker threads; results keep the input order.
std::vector<ScenarioResult> run_all(const std::vector<Scenario>& scenarios, const RunOptions& opts, int jobs);

/// {"data": {"scenario": ..., "checks": [...]}, "timing": {...}}
nlohmann::json report_json(const ScenarioResult& r);
/// Serialized report, keys sorted.
std::string report_text(const ScenarioResult& r);

void write_reports(const std::vector<ScenarioResult>& results, const std::string& out_dir);
std::string summary_csv(const std::vector<ScenarioResult>& results);
std::string convergence_csv(const std::vector<ScenarioResult>& results);

/// 0 when every check passed or only hypotheses failed, 1 otherwise.
int exit_code(const std::vector<ScenarioResult>& results);

/// File name used for a scenario report.
std::string report_file_name(const std::string& scenario_name);

/// Mesh generator spec "name:key=val,key=val" as used by `lab mesh gen`.
SimplicialMesh generate_mesh(const std::string& spec);

}  // namespace wlab
