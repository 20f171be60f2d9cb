#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <numbers>
#include <sstream>
#include <string>

#include "wlab/scenario.hpp"

using namespace wlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

const CheckReport& find(const std::vector<ScenarioResult>& rs, const std::string& scenario, const std::string& check) {
  for (const auto& r : rs)
    if (r.scenario.name == scenario)
      for (const auto& c : r.checks)
        if (c.check == check) return c;
  throw std::runtime_error("missing " + scenario + "/" + check);
}

std::vector<ScenarioResult> equality_runs, suite_runs;

Outcome ros_equality() {
  const CheckReport& c = find(equality_runs, "ros-unit-disk", "ros");
  const double rel = std::abs(c.relative_gap);
  const double order = c.order.value_or(NAN);
  return {c.history.size() == 3 && rel < 1e-3 && order >= 1.6 && order <= 2.4,
          fmt("relative gap %.3e, order %.3f", rel, order)};
}

Outcome cone_equality() {
  const CheckReport& c = find(equality_runs, "cone-quarter-wedge", "cone");
  const double rel = std::abs(c.relative_gap);
  return {c.pass && rel < 1e-3, fmt("relative gap %.3e at eps = 1e-4 R", rel)};
}

Outcome linear_isoperimetric() {
  const CheckReport& d = find(equality_runs, "linear-isoperimetric-disk", "linear_isoperimetric");
  const CheckReport& b = find(equality_runs, "linear-isoperimetric-ball-r3", "ball_linear_isoperimetric");
  return {d.pass && d.equality && b.pass && std::abs(b.relative_gap) < 1e-10,
          fmt("disk relative gap %.3e, ball %.3e", std::abs(d.relative_gap), std::abs(b.relative_gap))};
}

Outcome reilly_identity() {
  const CheckReport& a = find(suite_runs, "reilly-disk", "reilly");
  const CheckReport& b = find(suite_runs, "reilly-disk-linear-weight", "reilly");
  // Sign calibration: H_f = 1 - x on the unit circle with f = x1.
  Vec e1 = Vec::Zero(2);
  e1[0] = 1;
  const SimplicialMesh circle = gen_circle(1.0, 1024);
  const Eigen::VectorXd hf = weighted_mean_curvature(circle, DensityField::linear(e1));
  double sign_err = 0;
  for (int i = 0; i < circle.vertex_count(); ++i) sign_err = std::max(sign_err, std::abs(hf[i] - (1 - circle.vertex(i)[0])));
  const double oa = a.order.value_or(NAN), ob = b.order.value_or(NAN);
  const bool ok = a.pass && b.pass && std::abs(a.relative_gap) < 1e-3 && std::abs(b.relative_gap) < 1e-3 &&
                  oa >= 1.6 && oa <= 2.4 && ob >= 1.6 && ob <= 2.4 && sign_err < 1e-4;
  return {ok, fmt("relative gaps %.3e / %.3e, orders %.2f", std::abs(a.relative_gap), std::abs(b.relative_gap), oa) +
                  fmt(" / %.2f, sign calibration error %.1e", ob, sign_err)};
}

Outcome hessian_inequality() {
  double min_gap = INFINITY, eq_gap = 0, samples = 0;
  for (const char* name : {"hessian-gaussian-m3", "hessian-m-infinite"}) {
    const CheckReport& c = find(suite_runs, name, "hessian");
    min_gap = std::min(min_gap, c.rhs);
    eq_gap = std::max(eq_gap, c.details.at("equality_max_gap"));
    samples = std::max(samples, c.details.at("samples"));
  }
  return {samples >= 1e4 && min_gap >= -1e-12 && eq_gap < 1e-10,
          fmt("min gap %.3e over %.0f samples, equality cases %.1e", min_gap, samples, eq_gap)};
}

Outcome eigen_flat() {
  const CheckReport& c = find(equality_runs, "eigen-unit-circle", "eigen_mean");
  const CheckReport& s = find(equality_runs, "eigen-icosphere", "eigen_mean");
  const double lc = c.lhs, ls = s.lhs;
  const bool ok = std::abs(c.rhs - 1) < 1e-9 && std::abs(lc - 1) < 5e-3 && std::abs(s.rhs - 2) < 2e-2 &&
                  std::abs(ls - 2) < 4e-2 && std::abs(c.relative_gap) < 5e-3 && std::abs(s.relative_gap) < 2e-2;
  return {ok, fmt("circle %.6f vs %.6f, icosphere %.6f", lc, c.rhs, ls) + fmt(" vs %.6f", s.rhs)};
}

Outcome eigen_hyperbolic() {
  const double bound = 1 / std::pow(std::sinh(std::asinh(1.0)), 2);
  const CheckReport& one = find(suite_runs, "hyperbolic-circle", "eigen_max");
  const CheckReport& two = find(equality_runs, "eigen-hyperbolic-sphere", "eigen_max");
  const bool ok = std::abs(one.rhs - bound) < 1e-9 && std::abs(two.rhs - 2 * bound) < 1e-9 &&
                  std::abs(one.relative_gap) < 2e-2 && std::abs(two.relative_gap) < 2e-2 && one.pass && two.pass;
  return {ok, fmt("n=1 relative gap %.3e, n=2 %.3e", std::abs(one.relative_gap), std::abs(two.relative_gap))};
}

Outcome eigen_spherical() {
  const CheckReport& c = find(equality_runs, "eigen-spherical-cap-sphere", "eigen_mean");
  const double bound = 2 / std::pow(std::sin(std::numbers::pi / 6), 2);
  return {c.pass && std::abs(c.rhs - bound) < 1e-9 && std::abs(c.relative_gap) < 2e-2,
          fmt("lambda1 %.6f vs bound %.6f", c.lhs, bound)};
}

Outcome shrinker() {
  double root_err = 0, max_hf = 0, min_v = INFINITY;
  for (int n : {1, 2, 3}) root_err = std::max(root_err, std::abs(shrinker_radius(0.0, n) - std::sqrt(2.0 * n)));
  for (int n : {1, 2}) {
    const CheckReport r = shrinker_check(AmbientSpace(0.0, n + 1), n, n == 1 ? 256 : 3);
    max_hf = std::max(max_hf, r.lhs);
    min_v = std::min(min_v, r.rhs);
  }
  return {root_err < 1e-12 && max_hf < 1e-8 && min_v > 0,
          fmt("radius error %.1e, max |H_f| %.1e, min |H_f - grad f|^2 %.4f", root_err, max_hf, min_v)};
}

Outcome lemma_suite() {
  int n = 0, bad = 0;
  double worst = -INFINITY;
  for (const auto& r : suite_runs)
    for (const auto& c : r.checks) {
      if (c.check == "radial_chain") {
        ++n;
        if (!c.pass) ++bad;
      }
      if (c.check == "frame_bound") {
        ++n;
        if (!c.pass || c.lhs > c.rhs) ++bad;
        if (c.hypotheses.count("part2") && c.hypotheses.at("part2") == "ok" && c.details.at("part2_gap") < 0) ++bad;
        worst = std::max(worst, c.lhs - c.rhs);
      }
    }
  return {n >= 20 && bad == 0, fmt("%.0f lemma checks, %.0f failures, max(lhs - n - eps) %.2e", n, bad, worst)};
}

Outcome strictness() {
  const CheckReport& ros = find(suite_runs, "strict-ros-ellipse", "ros");
  const CheckReport& cone = find(suite_runs, "strict-cone-offcenter-arc", "cone");
  const CheckReport& eig = find(suite_runs, "strict-perturbed-sphere", "eigen_mean");
  const CheckReport& be = find(suite_runs, "concave-weight-ros", "be_nonneg");
  const CheckReport& cr = find(suite_runs, "concave-weight-ros", "ros");
  bool ok = true;
  for (const CheckReport* c : {&ros, &cone, &eig})
    ok = ok && c->pass && c->gap > 0 && !c->equality && c->status == CheckStatus::pass;
  ok = ok && be.status == CheckStatus::hypothesis_failed && cr.status == CheckStatus::hypothesis_failed;
  return {ok, fmt("relative gaps ros %.3e, cone %.3e, eigen %.3e", ros.relative_gap, cone.relative_gap,
                  eig.relative_gap) +
                  std::string(", concave weight: ") + to_string(cr.status)};
}

std::string data_sections(const fs::path& dir) {
  std::string out;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& p : files) {
    std::ifstream in(p);
    out += p.filename().string() + "\n" + nlohmann::json::parse(in).at("data").dump(2) + "\n";
  }
  return out;
}

Outcome determinism() {
  const fs::path base = fs::temp_directory_path() / "wlab-acceptance";
  fs::remove_all(base);
  std::string first, second;
  for (const char* run : {"a", "b"}) {
    const std::string cmd = std::string("\"") + LAB_BINARY + "\" run \"" + SCENARIO_DIR + "/suite.json\" --out \"" +
                            (base / run).string() + "\" > /dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "lab run returned non-zero"};
  }
  first = data_sections(base / "a");
  second = data_sections(base / "b");
  const std::size_t files = std::count(first.begin(), first.end(), '\n');
  return {!first.empty() && first == second, fmt("%.0f lines of report data compared", files)};
}

}  // namespace

int main() {
  equality_runs = run_all(load_config(std::string(SCENARIO_DIR) + "/equality-cases.json"), {}, 1);
  suite_runs = run_all(load_config(std::string(SCENARIO_DIR) + "/suite.json"), {}, 1);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"ros equality on the unit disk", ros_equality},
      {"cone equality on the quarter wedge", cone_equality},
      {"linear isoperimetric equality (disk, ball)", linear_isoperimetric},
      {"weighted reilly identity on the disk", reilly_identity},
      {"hessian inequality samples", hessian_inequality},
      {"eigenvalue equality, flat ambient", eigen_flat},
      {"eigenvalue equality, hyperbolic ambient", eigen_hyperbolic},
      {"eigenvalue equality, spherical ambient", eigen_spherical},
      {"shrinker radius and vanishing H_f", shrinker},
      {"radial chain and frame bound over the suite", lemma_suite},
      {"strictness controls and hypothesis failure", strictness},
      {"deterministic report data", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("[%s] %2zu %-46s %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
