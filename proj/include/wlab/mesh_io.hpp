#pragma once

#include <string>

#include "wlab/mesh.hpp"

namespace wlab {

enum class MeshFormat { off, obj };

/// Format from the file extension (.off / .obj, case-insensitive).
MeshFormat format_from_path(const std::string& path);
MeshFormat parse_mesh_format(const std::string& s);

/// ASCII OFF or OBJ with triangles (surfaces, planar domains) or 2-vertex
/// elements (closed curves). Triangles whose z coordinates all vanish form a
/// planar domain. Boundary labels are read from `path + ".labels.json"`
/// when that file exists.
SimplicialMesh load_mesh(const std::string& path, MeshFormat format);
SimplicialMesh load_mesh(const std::string& path);

/// Writes coordinates with 17 significant digits. Planar domains also get
/// the label sidecar.
void save_mesh(const SimplicialMesh& mesh, const std::string& path, MeshFormat format);
void save_mesh(const SimplicialMesh& mesh, const std::string& path);

std::string labels_sidecar_path(const std::string& path);

}  // namespace wlab
