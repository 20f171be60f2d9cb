#pragma once

#include <json.hpp>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wlab {

enum class CheckStatus { pass, fail, hypothesis_failed };

const char* to_string(CheckStatus s);

/// One rung of a refinement ladder.
struct LevelRecord {
  int level = 0;
  double h = 0;
  double lhs = 0;
  double rhs = 0;
  double gap = 0;
  double tolerance = 0;
  bool pass = false;
};

/// Outcome of one inequality or identity check.
///
/// The convention throughout is gap = rhs - lhs, so a theorem of the form
/// lhs <= rhs passes iff gap >= -tolerance, and a positive gap means strict
/// inequality. Identities report equality when |relative_gap| is below the
/// equality tolerance.
struct CheckReport {
  std::string check;
  double lhs = 0;
  double rhs = 0;
  double gap = 0;
  double relative_gap = 0;
  double tolerance = 0;
  double equality_tolerance = 0;
  bool pass = false;
  bool equality = false;
  CheckStatus status = CheckStatus::fail;
  /// "ok", "failed" or "n/a" per hypothesis (be_nonneg, hf_positive, ...).
  std::map<std::string, std::string> hypotheses;
  std::map<std::string, double> details;
  std::vector<std::string> notes;
  std::vector<LevelRecord> history;
  std::optional<double> order;
  double wall_time = 0;

  /// Fills gap, relative_gap, pass, equality and status from lhs/rhs.
  void finalize(double tol, double equality_tol);
  /// Same for identities: pass iff |gap| <= tol.
  void finalize_identity(double tol, double equality_tol);

  bool hypothesis_failed() const;
};

nlohmann::json to_json(const CheckReport& r);

/// Least-squares slope of log|err| against log h. Entries with a
/// non-positive error or h are skipped; needs at least two usable points.
std::optional<double> fit_order(const std::vector<double>& h, const std::vector<double>& err);

}  // namespace wlab
