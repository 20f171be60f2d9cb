#include "wlab/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "wlab/errors.hpp"

namespace wlab {

namespace {

struct RawMesh {
  std::vector<Eigen::Vector3d> verts;
  std::vector<std::vector<int>> cells;
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string strip_comment(const std::string& line) {
  const auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

RawMesh read_off(std::istream& in) {
  RawMesh raw;
  std::string line;
  int lineno = 0;
  auto next = [&](std::string& out) {
    while (std::getline(in, line)) {
      ++lineno;
      out = strip_comment(line);
      if (!blank(out)) return true;
    }
    return false;
  };
  std::string s;
  if (!next(s)) throw ParseError("empty OFF file", lineno);
  std::istringstream head(s);
  std::string magic;
  head >> magic;
  if (magic != "OFF") throw ParseError("missing OFF header", lineno);
  long nv = -1, nf = -1, ne = 0;
  if (!(head >> nv)) {
    if (!next(s)) throw ParseError("missing OFF counts", lineno);
    head = std::istringstream(s);
    head >> nv;
  }
  if (!(head >> nf)) throw ParseError("malformed OFF counts", lineno);
  head >> ne;
  if (nv < 0 || nf < 0) throw ParseError("negative OFF counts", lineno);
  for (long i = 0; i < nv; ++i) {
    if (!next(s)) throw ParseError("unexpected end of file in vertex list", lineno);
    std::istringstream ls(s);
    Eigen::Vector3d p;
    if (!(ls >> p.x() >> p.y() >> p.z())) throw ParseError("malformed vertex", lineno);
    raw.verts.push_back(p);
  }
  for (long i = 0; i < nf; ++i) {
    if (!next(s)) throw ParseError("unexpected end of file in face list", lineno);
    std::istringstream ls(s);
    int k = 0;
    if (!(ls >> k)) throw ParseError("malformed face", lineno);
    if (k < 2 || k > 3) throw ParseError("only segments and triangles are supported", lineno);
    std::vector<int> c(k);
    for (int& v : c)
      if (!(ls >> v)) throw ParseError("malformed face", lineno);
    raw.cells.push_back(std::move(c));
  }
  return raw;
}

RawMesh read_obj(std::istream& in) {
  RawMesh raw;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = strip_comment(line);
    if (blank(s)) continue;
    std::istringstream ls(s);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      Eigen::Vector3d p(0, 0, 0);
      if (!(ls >> p.x() >> p.y())) throw ParseError("malformed vertex", lineno);
      ls >> p.z();
      raw.verts.push_back(p);
    } else if (tag == "f" || tag == "l") {
      std::vector<int> c;
      std::string tok;
      while (ls >> tok) {
        const std::string idx = tok.substr(0, tok.find('/'));
        try {
          std::size_t used = 0;
          int v = std::stoi(idx, &used);
          if (used != idx.size()) throw std::invalid_argument(idx);
          v = v < 0 ? static_cast<int>(raw.verts.size()) + v : v - 1;
          c.push_back(v);
        } catch (const std::exception&) {
          throw ParseError("malformed index '" + tok + "'", lineno);
        }
      }
      if (tag == "l" && c.size() != 2) throw ParseError("only 2-vertex line elements are supported", lineno);
      if (tag == "f" && c.size() != 3) throw ParseError("only triangles are supported", lineno);
      raw.cells.push_back(std::move(c));
    } else if (tag == "vn" || tag == "vt" || tag == "o" || tag == "g" || tag == "s" || tag == "usemtl" ||
               tag == "mtllib") {
      continue;
    } else {
      throw ParseError("unsupported OBJ statement '" + tag + "'", lineno);
    }
  }
  return raw;
}

SimplicialMesh to_mesh(const RawMesh& raw) {
  if (raw.cells.empty()) throw InvalidTopology("mesh has no cells");
  const std::size_t k = raw.cells.front().size();
  for (const auto& c : raw.cells)
    if (c.size() != k) throw InvalidTopology("dangling edge: segments mixed with triangles");
  const bool flat = std::all_of(raw.verts.begin(), raw.verts.end(), [](const auto& p) { return p.z() == 0.0; });
  const int dim = flat ? 2 : 3;
  Eigen::MatrixXd v(raw.verts.size(), dim);
  for (std::size_t i = 0; i < raw.verts.size(); ++i) v.row(i) = raw.verts[i].head(dim).transpose();
  Eigen::MatrixXi c(raw.cells.size(), static_cast<int>(k));
  for (std::size_t i = 0; i < raw.cells.size(); ++i)
    for (std::size_t j = 0; j < k; ++j) c(i, j) = raw.cells[i][j];
  CellKind kind = k == 2 ? CellKind::curve : (flat ? CellKind::planar_domain : CellKind::surface);
  return SimplicialMesh(kind, std::move(v), std::move(c));
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

MeshFormat parse_mesh_format(const std::string& s) {
  const std::string l = lower(s);
  if (l == "off") return MeshFormat::off;
  if (l == "obj") return MeshFormat::obj;
  throw InvalidParams("unknown mesh format '" + s + "'");
}

MeshFormat format_from_path(const std::string& path) {
  std::string ext = std::filesystem::path(path).extension().string();
  if (!ext.empty()) ext = ext.substr(1);
  return parse_mesh_format(ext);
}

std::string labels_sidecar_path(const std::string& path) { return path + ".labels.json"; }

SimplicialMesh load_mesh(const std::string& path, MeshFormat format) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path, 0);
  RawMesh raw = format == MeshFormat::off ? read_off(in) : read_obj(in);
  SimplicialMesh mesh = to_mesh(raw);
  const std::string side = labels_sidecar_path(path);
  if (std::filesystem::exists(side)) {
    std::ifstream ls(side);
    nlohmann::json j;
    try {
      ls >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(side + ": " + e.what(), 0);
    }
    std::map<int, BoundaryLabel> labels;
    for (const auto& [key, value] : j.items()) labels[std::stoi(key)] = parse_boundary_label(value.get<std::string>());
    mesh.apply_vertex_labels(labels);
  }
  return mesh;
}

SimplicialMesh load_mesh(const std::string& path) { return load_mesh(path, format_from_path(path)); }

void save_mesh(const SimplicialMesh& mesh, const std::string& path, MeshFormat format) {
  std::ofstream out(path);
  if (!out) throw InvalidParams("cannot write " + path);
  auto coords = [&](int i) {
    const Vec p = mesh.vertex(i);
    return fmt(p[0]) + " " + fmt(p[1]) + " " + fmt(p.size() > 2 ? p[2] : 0.0);
  };
  const int k = mesh.cell_size();
  if (format == MeshFormat::off) {
    out << "OFF\n" << mesh.vertex_count() << " " << mesh.cell_count() << " 0\n";
    for (int i = 0; i < mesh.vertex_count(); ++i) out << coords(i) << "\n";
    for (int c = 0; c < mesh.cell_count(); ++c) {
      out << k;
      for (int j = 0; j < k; ++j) out << " " << mesh.cells()(c, j);
      out << "\n";
    }
  } else {
    for (int i = 0; i < mesh.vertex_count(); ++i) out << "v " << coords(i) << "\n";
    for (int c = 0; c < mesh.cell_count(); ++c) {
      out << (k == 2 ? "l" : "f");
      for (int j = 0; j < k; ++j) out << " " << mesh.cells()(c, j) + 1;
      out << "\n";
    }
  }
  if (mesh.kind() == CellKind::planar_domain) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [v, label] : mesh.vertex_labels()) j[std::to_string(v)] = to_string(label);
    std::ofstream ls(labels_sidecar_path(path));
    ls << j.dump(2) << "\n";
  }
}

void save_mesh(const SimplicialMesh& mesh, const std::string& path) { save_mesh(mesh, path, format_from_path(path)); }

}  // namespace wlab
