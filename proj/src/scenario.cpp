#include "wlab/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "wlab/errors.hpp"
#include "wlab/mesh_gen.hpp"
#include "wlab/mesh_io.hpp"

namespace wlab {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

enum class GeoKind { planar, closed, geodesic, shrinker, ball, none };

struct GeneratorInfo {
  GeoKind kind;
  json defaults;
  /// Parameter refined along the ladder; doubled, or incremented when
  /// `additive`.
  std::string resolution;
  bool additive = false;
};

const std::map<std::string, GeneratorInfo>& generators() {
  static const std::map<std::string, GeneratorInfo> table = {
      {"circle", {GeoKind::closed, {{"radius", 1.0}, {"segments", 64}, {"center", {0.0, 0.0}}}, "segments"}},
      {"ellipse_curve", {GeoKind::closed, {{"a", 1.0}, {"b", 0.6}, {"segments", 128}}, "segments"}},
      {"icosphere", {GeoKind::closed, {{"radius", 1.0}, {"subdivisions", 3}}, "subdivisions", true}},
      {"disk", {GeoKind::planar, {{"radius", 1.0}, {"rings", 8}}, "rings"}},
      {"ellipse", {GeoKind::planar, {{"a", 1.0}, {"b", 0.5}, {"rings", 8}}, "rings"}},
      {"annulus", {GeoKind::planar, {{"r_in", 0.5}, {"r_out", 1.0}, {"rings", 4}}, "rings"}},
      {"wedge",
       {GeoKind::planar,
        {{"radius", 1.0}, {"angle", std::numbers::pi / 2}, {"rings", 8}, {"eps", 1e-3}},
        "rings"}},
      {"offcenter_wedge",
       {GeoKind::planar,
        {{"arc_radius", 1.0},
         {"arc_center", {-0.1, -0.1}},
         {"angle", std::numbers::pi / 2},
         {"rings", 8},
         {"eps", 1e-3}},
        "rings"}},
      {"geodesic_sphere", {GeoKind::geodesic, {{"n", 2}, {"resolution", 3}}, "resolution"}},
      {"shrinker_sphere", {GeoKind::shrinker, {{"n", 1}, {"resolution", 128}}, "resolution"}},
      {"ball", {GeoKind::ball, {{"n", 2}, {"radius", 1.0}}, ""}},
  };
  return table;
}

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) config_error(where, "expected an object");
  for (const auto& [k, v] : obj.items())
    if (!allowed.count(k)) config_error(where, "unknown key '" + k + "'");
}

double get_number(const json& j, const std::string& where) {
  if (!j.is_number()) config_error(where, "expected a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) config_error(where, "expected an integer");
  return j.get<int>();
}

Vec get_vec(const json& j, const std::string& where) {
  if (!j.is_array()) config_error(where, "expected an array of numbers");
  Vec v(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = get_number(j[i], where);
  return v;
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

/// Generator params at ladder level k, defaults filled in.
json level_params(const std::string& gen, const json& params, const json& levels, int k) {
  const GeneratorInfo& info = generators().at(gen);
  json p = info.defaults;
  for (const auto& [key, v] : params.items()) p[key] = v;
  if (gen == "geodesic_sphere" || gen == "shrinker_sphere") {
    const int n = p["n"].get<int>();
    if (!params.contains("resolution")) p["resolution"] = n == 1 ? 128 : 3;
  }
  if (!levels.is_null()) {
    for (const auto& [key, v] : levels[k].items()) p[key] = v;
    return p;
  }
  if (!info.resolution.empty() && k > 0) {
    const int n = gen == "geodesic_sphere" || gen == "shrinker_sphere" ? p["n"].get<int>() : 1;
    const bool additive = info.additive || n == 2;
    const int base = p[info.resolution].get<int>();
    p[info.resolution] = additive ? base + k : base << k;
  }
  return p;
}

SimplicialMesh build_generated(const std::string& gen, const json& p) {
  auto num = [&](const char* k) { return p.at(k).get<double>(); };
  auto integer = [&](const char* k) { return p.at(k).get<int>(); };
  auto vec = [&](const char* k) { return get_vec(p.at(k), k); };
  if (gen == "circle") return gen_circle(num("radius"), integer("segments"), vec("center"));
  if (gen == "ellipse_curve") return gen_ellipse_curve(num("a"), num("b"), integer("segments"));
  if (gen == "icosphere") return gen_icosphere(num("radius"), integer("subdivisions"));
  if (gen == "disk") return gen_disk(num("radius"), integer("rings"));
  if (gen == "ellipse") return gen_ellipse(num("a"), num("b"), integer("rings"));
  if (gen == "annulus") return gen_annulus(num("r_in"), num("r_out"), integer("rings"));
  if (gen == "wedge") return gen_wedge(num("radius"), num("angle"), integer("rings"), num("eps"));
  if (gen == "offcenter_wedge")
    return gen_offcenter_wedge(num("arc_radius"), vec("arc_center"), num("angle"), integer("rings"), num("eps"));
  throw ConfigError("generator '" + gen + "' does not produce a mesh");
}

/// rho from either "rho" or "s_rho" (the value of s_delta(rho)).
double geodesic_radius(const json& p, double delta) {
  if (p.contains("rho")) return p["rho"].get<double>();
  const double s = p.at("s_rho").get<double>();
  if (delta == 0) return s;
  if (delta < 0) return std::asinh(s * std::sqrt(-delta)) / std::sqrt(-delta);
  if (s * std::sqrt(delta) > 1) throw ConfigError("s_rho exceeds the largest value of s_delta");
  return std::asin(s * std::sqrt(delta)) / std::sqrt(delta);
}

struct Level {
  GeoKind kind = GeoKind::none;
  std::optional<SimplicialMesh> mesh;
  std::optional<Submanifold> sub;
  json params;
  double h = std::numeric_limits<double>::quiet_NaN();
};

Level build_level(const Scenario& s, int k) {
  Level lv;
  const json& g = s.geometry;
  if (g.is_null()) return lv;
  if (g.contains("file")) {
    SimplicialMesh mesh = g.contains("format") ? load_mesh(g["file"].get<std::string>(),
                                                           parse_mesh_format(g["format"].get<std::string>()))
                                               : load_mesh(g["file"].get<std::string>());
    if (g.contains("cone")) {
      const json& c = g["cone"];
      mesh.set_cone({get_vec(c["apex"], "cone.apex"), c["opening_angle"].get<double>(),
                     c["epsilon_vertex"].get<double>()});
    }
    lv.kind = mesh.closed() ? GeoKind::closed : GeoKind::planar;
    lv.mesh = std::move(mesh);
  } else {
    const std::string gen = g["generator"].get<std::string>();
    lv.kind = generators().at(gen).kind;
    lv.params = level_params(gen, g["params"], g.contains("levels") ? g["levels"] : json(), k);
    if (lv.kind == GeoKind::planar || lv.kind == GeoKind::closed) {
      lv.mesh = build_generated(gen, lv.params);
    } else if (lv.kind == GeoKind::geodesic) {
      const AmbientSpace space(s.delta, s.dim);
      GeodesicSphere gs = scaled_sphere_with_analytic_fields(space, geodesic_radius(lv.params, s.delta),
                                                             lv.params["n"].get<int>(),
                                                             lv.params["resolution"].get<int>(), s.density);
      lv.h = gs.mesh.max_edge_length();
      lv.sub = Submanifold::geodesic_sphere(space, std::move(gs));
      return lv;
    } else {
      return lv;
    }
  }
  if (lv.kind == GeoKind::closed && g.contains("perturb")) {
    const json& pt = g["perturb"];
    lv.mesh = perturb_radially(*lv.mesh, pt["amplitude"].get<double>(), pt["seed"].get<std::uint64_t>());
  }
  if (s.translate.size() > 0) lv.mesh = lv.mesh->translated(s.translate);
  lv.h = lv.mesh->max_edge_length();
  if (lv.kind == GeoKind::closed) lv.sub = Submanifold::embedded(*lv.mesh);
  return lv;
}

SampleRegion be_region(const Scenario& s, const Level& lv) {
  if (lv.mesh) {
    const Eigen::MatrixXd& v = lv.mesh->vertices();
    const Vec lo = v.colwise().minCoeff().transpose(), hi = v.colwise().maxCoeff().transpose();
    return {0.5 * (lo + hi), 0.5 * (hi - lo).norm()};
  }
  if (lv.kind == GeoKind::geodesic) return {Vec::Zero(s.dim), geodesic_radius(lv.params, s.delta)};
  if (lv.kind == GeoKind::ball) return {Vec::Zero(s.dim), lv.params["radius"].get<double>()};
  if (lv.kind == GeoKind::shrinker) return {Vec::Zero(s.dim), shrinker_radius(s.delta, lv.params["n"].get<int>())};
  return {Vec::Zero(s.dim), 1.0};
}

bool uses_eigen_tolerance(const std::string& id) { return id == "eigen_max" || id == "eigen_mean" || id == "reilly"; }

Tolerances check_tolerances(const Scenario& s, const std::string& id) {
  Tolerances t = s.tolerances;
  if (!s.pass_overridden && uses_eigen_tolerance(id)) t.relative = 1e-2;
  return t;
}

CheckReport error_report(const std::string& id, const std::exception& e) {
  CheckReport r;
  r.check = id;
  r.lhs = r.rhs = r.gap = r.relative_gap = std::numeric_limits<double>::quiet_NaN();
  r.pass = false;
  r.status = CheckStatus::fail;
  r.notes.push_back(std::string("error: ") + e.what());
  return r;
}

CheckReport run_check(const Scenario& s, const Level& lv, const std::string& id, const CheckReport* bound) {
  const Tolerances tol = check_tolerances(s, id);
  const BakryEmeryParams params{s.m, s.dim};
  EigenOptions eig;
  eig.seed = s.seed;
  if (id == "be_nonneg") {
    CheckReport r = certify_nonneg_BE(AmbientSpace(s.delta, s.dim), s.density, params, be_region(s, lv), s.samples);
    r.check = id;
    r.hypotheses["be_nonneg"] = r.pass ? "ok" : "failed";
    if (!r.pass) r.status = CheckStatus::hypothesis_failed;
    return r;
  }
  if (id == "hessian") return hessian_sample_check(s.density, params, s.samples, s.seed, tol);
  if (id == "ros") return check_ros(*lv.mesh, s.density, params, tol);
  if (id == "cone") return check_cone(*lv.mesh, s.density, params, tol);
  if (id == "linear_isoperimetric") return check_linear_isoperimetric(*lv.mesh, s.density, params, tol);
  if (id == "reilly") return reilly_residual(*lv.mesh, s.density, s.u, 7, tol);
  if (id == "ball_linear_isoperimetric")
    return ball_linear_isoperimetric(lv.params["n"].get<int>(), lv.params["radius"].get<double>(), s.density,
                                     params, tol);
  if (id == "radial_chain") return chain_check(*lv.sub, s.density, tol);
  if (id == "frame_bound") return frame_check(*lv.sub, s.density, tol);
  if (id == "eigen_max") return eigen_max_bound(*lv.sub, s.density, tol, {}, eig);
  if (id == "eigen_mean") return eigen_mean_bound(*lv.sub, s.density, tol, {}, eig);
  if (id == "equality_diagnostic") {
    try {
      return equality_diagnostic(*lv.sub, s.density, *bound);
    } catch (const NotNearEquality& e) {
      CheckReport r;
      r.check = id;
      r.lhs = 0;
      r.rhs = r.gap = r.relative_gap = std::numeric_limits<double>::quiet_NaN();
      r.pass = true;
      r.equality = false;
      r.status = CheckStatus::pass;
      r.details["bound_relative_gap"] = bound->relative_gap;
      r.notes.push_back(std::string("not near equality: ") + e.what());
      return r;
    }
  }
  if (id == "shrinker")
    return shrinker_check(AmbientSpace(s.delta, s.dim), lv.params["n"].get<int>(), lv.params["resolution"].get<int>());
  throw ConfigError("unknown check '" + id + "'");
}

bool refinement_aware(const std::string& id) {
  return id == "ros" || id == "cone" || id == "linear_isoperimetric" || id == "reilly" || id == "eigen_max" ||
         id == "eigen_mean";
}

void apply_ladder(const Scenario& s, CheckReport& fin, const std::vector<CheckReport>& per_level) {
  const std::string& id = fin.check;
  if (per_level.size() < 2 || !refinement_aware(id) || !std::isfinite(fin.gap) || fin.hypothesis_failed()) return;
  const CheckReport& prev = per_level[per_level.size() - 2];
  const bool identity = id == "reilly";
  const double q = identity ? fin.gap : fin.lhs, q_prev = identity ? prev.gap : prev.lhs;
  const double est = std::abs(q - q_prev);
  const double scale = std::max(std::abs(fin.lhs), std::abs(fin.rhs));
  const double eq_tol =
      s.equality_overridden ? s.tolerances.equality : std::clamp(4.0 * est / scale, 1e-3, 1e-2);
  double tol = fin.tolerance;
  if (uses_eigen_tolerance(id)) {
    Tolerances base = s.tolerances;
    if (!s.pass_overridden) base.relative = 0;
    tol = base.pass_tolerance(fin.lhs, fin.rhs) + 3.0 * est;
  }
  if (identity)
    fin.finalize_identity(tol, eq_tol);
  else
    fin.finalize(tol, eq_tol);
  fin.details["discretization_estimate"] = est;
}

std::string fmt_double(double v) {
  if (!std::isfinite(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line += ',';
    line += csv_field(fields[i]);
  }
  return line + "\r\n";
}

std::string order_text(const CheckReport& r) { return r.order ? fmt_double(*r.order) : "n/a"; }

DensityField parse_density(const json& d, json& resolved) {
  const std::string where = "density";
  if (!d.is_object() || !d.contains("kind")) config_error(where, "needs a 'kind'");
  const std::string kind = d["kind"].is_string() ? d["kind"].get<std::string>() : "";
  resolved = json::object();
  resolved["kind"] = kind;
  if (kind == "constant") {
    check_keys(d, {"kind", "value"}, where);
    const double c = d.contains("value") ? get_number(d["value"], "density.value") : 0.0;
    resolved["value"] = c;
    return DensityField::constant(c);
  }
  if (kind == "gaussian") {
    check_keys(d, {"kind", "a", "center"}, where);
    if (!d.contains("a")) config_error(where, "gaussian needs 'a'");
    const double a = get_number(d["a"], "density.a");
    resolved["a"] = a;
    Vec c;
    if (d.contains("center")) {
      c = get_vec(d["center"], "density.center");
      resolved["center"] = vec_json(c);
    }
    return DensityField::gaussian(a, c);
  }
  if (kind == "linear") {
    check_keys(d, {"kind", "v"}, where);
    if (!d.contains("v")) config_error(where, "linear needs 'v'");
    const Vec v = get_vec(d["v"], "density.v");
    resolved["v"] = vec_json(v);
    return DensityField::linear(v);
  }
  if (kind == "polynomial") {
    check_keys(d, {"kind", "terms"}, where);
    if (!d.contains("terms") || !d["terms"].is_array()) config_error(where, "polynomial needs 'terms'");
    std::vector<Monomial> terms;
    for (const auto& t : d["terms"]) {
      check_keys(t, {"coeff", "powers"}, "density.terms");
      Monomial mono;
      mono.coeff = get_number(t.at("coeff"), "density.terms.coeff");
      for (const auto& p : t.at("powers")) mono.powers.push_back(get_int(p, "density.terms.powers"));
      terms.push_back(mono);
    }
    resolved["terms"] = d["terms"];
    return DensityField::polynomial(std::move(terms));
  }
  config_error(where, "unknown kind '" + kind + "'");
}

GeoKind validate_geometry(const json& g, json& resolved, const std::string& base_dir, int levels) {
  const std::string where = "geometry";
  check_keys(g, {"generator", "params", "file", "format", "cone", "perturb", "levels"}, where);
  resolved = g;
  GeoKind kind;
  if (g.contains("file")) {
    if (g.contains("generator") || g.contains("params") || g.contains("levels"))
      config_error(where, "'file' excludes 'generator', 'params' and 'levels'");
    if (levels != 1) config_error(where, "mesh files support a single refinement level");
    if (!g["file"].is_string()) config_error(where, "'file' must be a path");
    fs::path p = g["file"].get<std::string>();
    if (p.is_relative()) p = fs::path(base_dir) / p;
    if (!fs::exists(p)) config_error(where, "no such file " + p.string());
    resolved["file"] = p.string();
    if (g.contains("format")) {
      try {
        parse_mesh_format(g["format"].get<std::string>());
      } catch (const Error& e) {
        config_error(where, e.what());
      }
    }
    if (g.contains("cone")) {
      check_keys(g["cone"], {"apex", "opening_angle", "epsilon_vertex"}, "geometry.cone");
      for (const char* k : {"apex", "opening_angle", "epsilon_vertex"})
        if (!g["cone"].contains(k)) config_error("geometry.cone", std::string("missing '") + k + "'");
    }
    SimplicialMesh probe = load_mesh(resolved["file"].get<std::string>());
    kind = probe.closed() ? GeoKind::closed : GeoKind::planar;
  } else {
    if (!g.contains("generator") || !g["generator"].is_string()) config_error(where, "needs 'generator' or 'file'");
    const std::string gen = g["generator"].get<std::string>();
    const auto it = generators().find(gen);
    if (it == generators().end()) config_error(where, "unknown generator '" + gen + "'");
    kind = it->second.kind;
    json params = g.contains("params") ? g["params"] : json::object();
    std::set<std::string> allowed;
    for (const auto& [k, v] : it->second.defaults.items()) allowed.insert(k);
    if (kind == GeoKind::geodesic) allowed.insert({"rho", "s_rho"});
    check_keys(params, allowed, "geometry.params");
    if (kind == GeoKind::geodesic && (params.contains("rho") == params.contains("s_rho")))
      config_error("geometry.params", "geodesic_sphere needs exactly one of 'rho' and 's_rho'");
    if (g.contains("cone")) config_error(where, "'cone' applies to mesh files only");
    if (g.contains("levels")) {
      if (!g["levels"].is_array() || static_cast<int>(g["levels"].size()) != levels)
        config_error(where, "'levels' must list one object per refinement level");
      for (const auto& l : g["levels"]) check_keys(l, allowed, "geometry.levels");
    }
    if ((kind == GeoKind::ball) && levels != 1) config_error(where, "the ball is analytic; use one level");
    resolved["params"] = level_params(gen, params, json(), 0);
    if (kind == GeoKind::geodesic) {
      resolved["params"].erase(params.contains("rho") ? "s_rho" : "rho");
    }
  }
  if (g.contains("perturb")) {
    if (kind != GeoKind::closed) config_error(where, "'perturb' applies to closed meshes");
    check_keys(g["perturb"], {"amplitude", "seed"}, "geometry.perturb");
    json p = {{"amplitude", 0.02}, {"seed", 1}};
    for (const auto& [k, v] : g["perturb"].items()) p[k] = v;
    if (!p["seed"].is_number_unsigned() && !(p["seed"].is_number_integer() && p["seed"].get<long>() >= 0))
      config_error("geometry.perturb", "seed must be a non-negative integer");
    resolved["perturb"] = p;
  }
  return kind;
}

int natural_dim(GeoKind kind, const json& resolved_geometry, const std::string& base_dir) {
  (void)base_dir;
  const json& p = resolved_geometry.contains("params") ? resolved_geometry["params"] : json();
  switch (kind) {
    case GeoKind::planar:
      return 2;
    case GeoKind::closed:
      if (resolved_geometry.contains("file")) return load_mesh(resolved_geometry["file"].get<std::string>()).ambient_dim();
      return resolved_geometry["generator"] == "icosphere" ? 3 : 2;
    case GeoKind::geodesic:
    case GeoKind::shrinker:
    case GeoKind::ball:
      return p["n"].get<int>() + 1;
    case GeoKind::none:
      return 2;
  }
  return 2;
}

Scenario parse_scenario(const json& j, const std::string& base_dir) {
  static const std::set<std::string> keys = {"name",  "geometry",          "ambient",    "density", "m",
                                             "checks", "refinement_levels", "tolerances", "translate", "u",
                                             "samples", "seed"};
  check_keys(j, keys, "scenario");
  Scenario s;
  if (!j.contains("name") || !j["name"].is_string()) config_error("scenario", "needs a string 'name'");
  s.name = j["name"].get<std::string>();
  const std::string where = "scenario '" + s.name + "'";
  if (s.name.empty() || s.name.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.-") !=
                            std::string::npos)
    config_error(where, "names may only use letters, digits, '_', '.' and '-'");
  json& res = s.resolved;
  res["name"] = s.name;

  s.refinement_levels = j.contains("refinement_levels") ? get_int(j["refinement_levels"], where) : 1;
  if (s.refinement_levels < 1) config_error(where, "refinement_levels must be >= 1");
  res["refinement_levels"] = s.refinement_levels;

  GeoKind kind = GeoKind::none;
  if (j.contains("geometry")) {
    json g;
    kind = validate_geometry(j["geometry"], g, base_dir, s.refinement_levels);
    s.geometry = g;
    res["geometry"] = g;
  } else {
    if (s.refinement_levels != 1) config_error(where, "refinement needs a geometry");
    res["geometry"] = nullptr;
  }

  const int natural = natural_dim(kind, s.geometry, base_dir);
  if (j.contains("ambient")) {
    check_keys(j["ambient"], {"delta", "dim"}, where + ".ambient");
    s.delta = j["ambient"].contains("delta") ? get_number(j["ambient"]["delta"], where) : 0.0;
    s.dim = j["ambient"].contains("dim") ? get_int(j["ambient"]["dim"], where) : natural;
  } else {
    s.dim = natural;
  }
  if (kind != GeoKind::none && s.dim != natural)
    config_error(where, "ambient dim " + std::to_string(s.dim) + " does not match the geometry (" +
                            std::to_string(natural) + ")");
  if (s.dim < 1) config_error(where, "ambient dim must be >= 1");
  res["ambient"] = {{"delta", s.delta}, {"dim", s.dim}};
  if (s.delta != 0 && (kind == GeoKind::planar || kind == GeoKind::closed || kind == GeoKind::ball))
    config_error(where, "mesh and ball geometries live in Euclidean space (delta = 0)");

  json dres;
  s.density = parse_density(j.contains("density") ? j["density"] : json{{"kind", "constant"}}, dres);
  res["density"] = dres;
  if (s.delta != 0) {
    const bool centered = s.density.center().size() == 0 || s.density.center().norm() == 0;
    if (!s.density.is_radial() || !centered)
      config_error(where, "curved ambients need a constant or origin-centered gaussian density");
  }

  if (j.contains("m")) {
    const json& m = j["m"];
    if (m.is_string() && (m == "inf" || m == "infinity"))
      s.m = kInfiniteM;
    else
      s.m = get_number(m, where + ".m");
  }
  res["m"] = std::isinf(s.m) ? json("inf") : json(s.m);

  if (j.contains("translate")) {
    if (kind != GeoKind::planar && kind != GeoKind::closed)
      config_error(where, "'translate' applies to Euclidean meshes");
    s.translate = get_vec(j["translate"], where + ".translate");
    if (s.translate.size() != s.dim) config_error(where, "'translate' has the wrong dimension");
    s.density = s.density.translated(s.translate);
    res["translate"] = vec_json(s.translate);
  }

  if (j.contains("tolerances")) {
    check_keys(j["tolerances"], {"absolute", "relative", "equality"}, where + ".tolerances");
    const json& t = j["tolerances"];
    if (t.contains("absolute")) s.tolerances.absolute = get_number(t["absolute"], where);
    if (t.contains("relative")) {
      s.tolerances.relative = get_number(t["relative"], where);
      s.pass_overridden = true;
    }
    if (t.contains("equality")) {
      s.tolerances.equality = get_number(t["equality"], where);
      s.equality_overridden = true;
    }
  }
  res["tolerances"] = {{"absolute", s.tolerances.absolute},
                       {"relative", s.pass_overridden ? json(s.tolerances.relative) : json("per-check")},
                       {"equality", s.equality_overridden ? json(s.tolerances.equality) : json("auto")}};

  {
    Eigen::MatrixXd h = 0.5 * Eigen::MatrixXd::Identity(s.dim, s.dim);
    Vec g = Vec::Zero(s.dim);
    double c = -0.25;
    if (j.contains("u")) {
      check_keys(j["u"], {"hessian", "gradient", "constant"}, where + ".u");
      const json& u = j["u"];
      if (u.contains("hessian")) {
        const json& rows = u["hessian"];
        if (!rows.is_array() || static_cast<int>(rows.size()) != s.dim) config_error(where, "u.hessian shape");
        for (int i = 0; i < s.dim; ++i) {
          const Vec row = get_vec(rows[i], where + ".u.hessian");
          if (row.size() != s.dim) config_error(where, "u.hessian shape");
          h.row(i) = row.transpose();
        }
        if ((h - h.transpose()).norm() > 0) config_error(where, "u.hessian must be symmetric");
      }
      if (u.contains("gradient")) {
        g = get_vec(u["gradient"], where + ".u.gradient");
        if (g.size() != s.dim) config_error(where, "u.gradient has the wrong dimension");
      }
      if (u.contains("constant")) c = get_number(u["constant"], where + ".u.constant");
    }
    s.u = AnalyticFunction::quadratic(h, g, c);
    json hj = json::array();
    for (int i = 0; i < s.dim; ++i) hj.push_back(vec_json(h.row(i).transpose()));
    res["u"] = {{"hessian", hj}, {"gradient", vec_json(g)}, {"constant", c}};
  }

  s.samples = j.contains("samples") ? get_int(j["samples"], where + ".samples") : 10000;
  if (s.samples < 1) config_error(where, "samples must be >= 1");
  res["samples"] = s.samples;
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer() || j["seed"].get<long long>() < 0)
      config_error(where, "seed must be a non-negative integer");
    s.seed = j["seed"].get<std::uint64_t>();
  }
  res["seed"] = s.seed;

  if (!j.contains("checks") || !j["checks"].is_array() || j["checks"].empty())
    config_error(where, "needs a non-empty 'checks' list");
  std::set<std::string> seen;
  for (const auto& c : j["checks"]) {
    if (!c.is_string()) config_error(where, "check ids are strings");
    const std::string id = c.get<std::string>();
    if (std::find(known_checks().begin(), known_checks().end(), id) == known_checks().end())
      config_error(where, "unknown check '" + id + "'");
    if (!seen.insert(id).second) config_error(where, "check '" + id + "' listed twice");
    s.checks.push_back(id);
  }
  res["checks"] = s.checks;

  auto need = [&](bool ok, const std::string& id, const std::string& what) {
    if (!ok) config_error(where, "check '" + id + "' " + what);
  };
  const bool submanifold = kind == GeoKind::closed || kind == GeoKind::geodesic;
  bool uses_m = false;
  for (const auto& id : s.checks) {
    if (id == "ros" || id == "linear_isoperimetric" || id == "reilly") {
      need(kind == GeoKind::planar, id, "needs a planar domain");
      uses_m = uses_m || id != "reilly";
    } else if (id == "cone") {
      const bool has_cone =
          (s.geometry.contains("generator") &&
           (s.geometry["generator"] == "wedge" || s.geometry["generator"] == "offcenter_wedge")) ||
          s.geometry.contains("cone");
      need(kind == GeoKind::planar && has_cone, id, "needs a wedge domain with cone data");
      uses_m = true;
    } else if (id == "ball_linear_isoperimetric") {
      need(kind == GeoKind::ball, id, "needs the 'ball' geometry");
      uses_m = true;
    } else if (id == "hessian") {
      need(s.delta == 0, id, "is stated in Euclidean space");
      uses_m = true;
    } else if (id == "be_nonneg") {
      uses_m = true;
    } else if (id == "eigen_max") {
      need(submanifold, id, "needs a closed submanifold");
      need(s.delta < 0, id, "requires delta < 0 (got " + fmt_double(s.delta) + ")");
    } else if (id == "eigen_mean") {
      need(submanifold, id, "needs a closed submanifold");
      need(s.delta >= 0, id, "requires delta >= 0 (got " + fmt_double(s.delta) + ")");
    } else if (id == "equality_diagnostic") {
      need(submanifold, id, "needs a closed submanifold");
      const auto t5 = std::find(s.checks.begin(), s.checks.end(), "eigen_mean");
      need(t5 != s.checks.end(), id, "needs 'eigen_mean' listed before it");
    } else if (id == "radial_chain" || id == "frame_bound") {
      need(submanifold, id, "needs a closed submanifold");
    } else if (id == "shrinker") {
      need(kind == GeoKind::shrinker, id, "needs the 'shrinker_sphere' geometry");
    }
  }
  if (kind == GeoKind::geodesic) {
    const json& p = s.geometry["params"];
    if (p["n"].get<int>() < 1 || p["n"].get<int>() > 2) config_error(where, "geodesic spheres need n = 1 or 2");
  }
  if (uses_m) {
    try {
      BakryEmeryParams{s.m, s.dim}.validate(s.density);
    } catch (const Error& e) {
      config_error(where, e.what());
    }
  }
  return s;
}

}  // namespace

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> ids = {"be_nonneg", "ros",     "cone",    "linear_isoperimetric",
                                               "ball_linear_isoperimetric", "reilly",  "hessian",  "radial_chain",
                                               "frame_bound",   "eigen_max",    "eigen_mean",    "equality_diagnostic",
                                               "shrinker"};
  return ids;
}

std::vector<Scenario> parse_config(const json& config, const std::string& base_dir) {
  check_keys(config, {"scenarios"}, "config");
  if (!config.contains("scenarios") || !config["scenarios"].is_array() || config["scenarios"].empty())
    throw ConfigError("config: needs a non-empty 'scenarios' array");
  std::vector<Scenario> out;
  std::set<std::string> names;
  for (const auto& j : config["scenarios"]) {
    try {
      out.push_back(parse_scenario(j, base_dir));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    if (!names.insert(out.back().name).second) throw ConfigError("config: duplicate scenario '" + out.back().name + "'");
  }
  return out;
}

std::vector<Scenario> load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  const fs::path dir = fs::path(path).parent_path();
  return parse_config(j, dir.empty() ? "." : dir.string());
}

ScenarioResult run_scenario(const Scenario& s, const RunOptions& opts) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  ScenarioResult result;
  result.scenario = s;
  std::vector<std::vector<CheckReport>> per_check(s.checks.size());
  std::vector<double> times(s.checks.size(), 0.0);
  for (int k = 0; k < s.refinement_levels; ++k) {
    std::optional<Level> lv;
    std::string build_error;
    try {
      lv = build_level(s, k);
    } catch (const std::exception& e) {
      build_error = e.what();
    }
    result.level_h.push_back(lv ? lv->h : std::numeric_limits<double>::quiet_NaN());
    if (lv && lv->mesh && !opts.dump_operators.empty()) {
      fs::create_directories(opts.dump_operators);
      const Weight w = lv->sub ? lv->sub->weight(s.density) : Weight::field(s.density);
      const OperatorPack pack = assemble(*lv->mesh, w);
      const std::string stem = opts.dump_operators + "/" + s.name + "_L" + std::to_string(k);
      write_matrix_market(pack.stiffness, stem + "_stiffness.mtx");
      write_matrix_market(pack.mass, stem + "_mass.mtx");
    }
    const CheckReport* bound = nullptr;
    for (std::size_t c = 0; c < s.checks.size(); ++c) {
      const auto t0 = clock::now();
      CheckReport r;
      if (!lv) {
        r = error_report(s.checks[c], std::runtime_error(build_error));
      } else {
        try {
          r = run_check(s, *lv, s.checks[c], bound);
        } catch (const std::exception& e) {
          r = error_report(s.checks[c], e);
        }
      }
      r.check = s.checks[c];
      r.wall_time = std::chrono::duration<double>(clock::now() - t0).count();
      times[c] += r.wall_time;
      per_check[c].push_back(std::move(r));
      if (s.checks[c] == "eigen_mean") bound = &per_check[c].back();
    }
  }
  for (std::size_t c = 0; c < s.checks.size(); ++c) {
    std::vector<CheckReport>& levels = per_check[c];
    CheckReport fin = levels.back();
    apply_ladder(s, fin, levels);
    std::vector<double> hs, gaps;
    for (std::size_t k = 0; k < levels.size(); ++k) {
      const CheckReport& r = levels[k];
      LevelRecord rec{static_cast<int>(k), result.level_h[k], r.lhs, r.rhs, r.gap, r.tolerance, r.pass};
      if (k + 1 == levels.size()) {
        rec.tolerance = fin.tolerance;
        rec.pass = fin.pass;
      }
      fin.history.push_back(rec);
      hs.push_back(result.level_h[k]);
      gaps.push_back(r.gap);
    }
    if (levels.size() >= 2) fin.order = fit_order(hs, gaps);
    fin.wall_time = times[c];
    result.checks.push_back(std::move(fin));
  }
  result.wall_time = std::chrono::duration<double>(clock::now() - start).count();
  return result;
}

std::vector<ScenarioResult> run_all(const std::vector<Scenario>& scenarios, const RunOptions& opts, int jobs) {
  std::vector<ScenarioResult> results(scenarios.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < scenarios.size(); i = next++) results[i] = run_scenario(scenarios[i], opts);
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(scenarios.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return results;
}

json report_json(const ScenarioResult& r) {
  json checks = json::array();
  json timing = json::object();
  for (const auto& c : r.checks) {
    checks.push_back(to_json(c));
    timing["checks"][c.check] = c.wall_time;
  }
  timing["wall_time"] = r.wall_time;
  return {{"data", {{"scenario", r.scenario.resolved}, {"checks", checks}}}, {"timing", timing}};
}

std::string report_text(const ScenarioResult& r) { return report_json(r).dump(2) + "\n"; }

std::string report_file_name(const std::string& scenario_name) { return scenario_name + ".json"; }

void write_reports(const std::vector<ScenarioResult>& results, const std::string& out_dir) {
  fs::create_directories(out_dir);
  for (const auto& r : results) {
    std::ofstream out(fs::path(out_dir) / report_file_name(r.scenario.name), std::ios::binary);
    out << report_text(r);
  }
  std::ofstream(fs::path(out_dir) / "summary.csv", std::ios::binary) << summary_csv(results);
}

std::string summary_csv(const std::vector<ScenarioResult>& results) {
  std::string out = csv_row({"scenario", "check", "status", "pass", "equality", "lhs", "rhs", "gap", "relative_gap",
                             "tolerance", "equality_tolerance", "order", "notes"});
  for (const auto& r : results) {
    for (const auto& c : r.checks) {
      std::string notes;
      for (const auto& n : c.notes) notes += (notes.empty() ? "" : "; ") + n;
      out += csv_row({r.scenario.name, c.check, to_string(c.status), c.pass ? "true" : "false",
                      c.equality ? "true" : "false", fmt_double(c.lhs), fmt_double(c.rhs), fmt_double(c.gap),
                      fmt_double(c.relative_gap), fmt_double(c.tolerance), fmt_double(c.equality_tolerance),
                      order_text(c), notes});
    }
  }
  return out;
}

std::string convergence_csv(const std::vector<ScenarioResult>& results) {
  std::string out = csv_row({"scenario", "check", "level", "h", "lhs", "rhs", "gap", "order"});
  for (const auto& r : results)
    for (const auto& c : r.checks)
      for (const auto& l : c.history)
        out += csv_row({r.scenario.name, c.check, std::to_string(l.level), fmt_double(l.h), fmt_double(l.lhs),
                        fmt_double(l.rhs), fmt_double(l.gap), order_text(c)});
  return out;
}

int exit_code(const std::vector<ScenarioResult>& results) {
  for (const auto& r : results)
    for (const auto& c : r.checks)
      if (c.status == CheckStatus::fail) return 1;
  return 0;
}

SimplicialMesh generate_mesh(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string gen = spec.substr(0, colon);
  const auto it = generators().find(gen);
  if (it == generators().end() || (it->second.kind != GeoKind::planar && it->second.kind != GeoKind::closed))
    throw ConfigError("unknown mesh generator '" + gen + "'");
  json params = json::object();
  if (colon != std::string::npos) {
    std::stringstream ss(spec.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + item + "'");
      const std::string key = item.substr(0, eq), val = item.substr(eq + 1);
      if (!it->second.defaults.contains(key)) throw ConfigError("unknown parameter '" + key + "' for " + gen);
      const json& def = it->second.defaults[key];
      try {
        if (def.is_array()) {
          json arr = json::array();
          std::stringstream vs(val);
          std::string part;
          while (std::getline(vs, part, ';')) arr.push_back(std::stod(part));
          params[key] = arr;
        } else if (def.is_number_integer()) {
          std::size_t used = 0;
          params[key] = std::stoi(val, &used);
          if (used != val.size()) throw std::invalid_argument(val);
        } else {
          std::size_t used = 0;
          params[key] = std::stod(val, &used);
          if (used != val.size()) throw std::invalid_argument(val);
        }
      } catch (const std::logic_error&) {
        throw ConfigError("bad value '" + val + "' for " + key);
      }
    }
  }
  return build_generated(gen, level_params(gen, params, json(), 0));
}

}  // namespace wlab
