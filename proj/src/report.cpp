#include "wlab/report.hpp"

#include <algorithm>
#include <cmath>

namespace wlab {

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass:
      return "pass";
    case CheckStatus::fail:
      return "fail";
    case CheckStatus::hypothesis_failed:
      return "hypothesis-failed";
  }
  return "fail";
}

bool CheckReport::hypothesis_failed() const {
  return std::any_of(hypotheses.begin(), hypotheses.end(),
                     [](const auto& kv) { return kv.second == "failed"; });
}

void CheckReport::finalize(double tol, double equality_tol) {
  tolerance = tol;
  equality_tolerance = equality_tol;
  gap = rhs - lhs;
  const double scale = std::max(std::abs(lhs), std::abs(rhs));
  relative_gap = scale > 0 ? gap / scale : 0.0;
  pass = std::isfinite(gap) && gap >= -tol;
  equality = std::isfinite(gap) && std::abs(relative_gap) < equality_tol;
  if (hypothesis_failed())
    status = CheckStatus::hypothesis_failed;
  else
    status = pass ? CheckStatus::pass : CheckStatus::fail;
}

void CheckReport::finalize_identity(double tol, double equality_tol) {
  finalize(tol, equality_tol);
  pass = pass && gap <= tol;
  if (!hypothesis_failed()) status = pass ? CheckStatus::pass : CheckStatus::fail;
}

namespace {

nlohmann::json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

nlohmann::json to_json(const CheckReport& r) {
  nlohmann::json j;
  j["check"] = r.check;
  j["lhs"] = number(r.lhs);
  j["rhs"] = number(r.rhs);
  j["gap"] = number(r.gap);
  j["relative_gap"] = number(r.relative_gap);
  j["tolerance"] = number(r.tolerance);
  j["equality_tolerance"] = number(r.equality_tolerance);
  j["pass"] = r.pass;
  j["equality_flag"] = r.equality;
  j["status"] = to_string(r.status);
  j["hypothesis_flags"] = r.hypotheses;
  nlohmann::json details = nlohmann::json::object();
  for (const auto& [k, v] : r.details) details[k] = number(v);
  j["details"] = details;
  j["notes"] = r.notes;
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& l : r.history) {
    hist.push_back({{"level", l.level},
                    {"h", number(l.h)},
                    {"lhs", number(l.lhs)},
                    {"rhs", number(l.rhs)},
                    {"gap", number(l.gap)},
                    {"tolerance", number(l.tolerance)},
                    {"pass", l.pass}});
  }
  j["history"] = hist;
  if (r.order)
    j["order"] = number(*r.order);
  else
    j["order"] = "n/a";
  return j;
}

std::optional<double> fit_order(const std::vector<double>& h, const std::vector<double>& err) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < std::min(h.size(), err.size()); ++i) {
    if (h[i] > 0 && std::abs(err[i]) > 0 && std::isfinite(err[i])) {
      x.push_back(std::log(h[i]));
      y.push_back(std::log(std::abs(err[i])));
    }
  }
  if (x.size() < 2) return std::nullopt;
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  if (std::abs(den) < 1e-300) return std::nullopt;
  return (n * sxy - sx * sy) / den;
}

}  // namespace wlab
