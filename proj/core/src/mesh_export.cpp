#include "fiberlab/mesh_export.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <stdexcept>

#include "fiberlab/reports.hpp"

namespace fiberlab {

namespace {

using GridKey = std::array<double, 3>;

struct MeshBuilder {
  const VectorField3& u;
  MeshData mesh;
  std::map<GridKey, int> index_of;

  int vertex(const Vector3d& x) {
    const GridKey key{x.x(), x.y(), x.z()};
    const auto it = index_of.find(key);
    if (it != index_of.end()) return it->second;
    const Vector3d y = u.value(x);
    if (!y.allFinite())
      throw std::runtime_error("export_mesh: non-finite deformed coordinate at reference point (" +
                               format_double(x.x()) + ", " + format_double(x.y()) + ", " +
                               format_double(x.z()) + ")");
    const int id = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back(y);
    index_of.emplace(key, id);
    return id;
  }
};

/// i-th of n grid coordinates on [lo, hi]; endpoints pinned bitwise so faces
/// sharing an edge produce identical keys.
double grid_coord(double lo, double hi, int i, int n) {
  if (i == 0) return lo;
  if (i == n - 1) return hi;
  return lo + (hi - lo) * (static_cast<double>(i) / static_cast<double>(n - 1));
}

}  // namespace

MeshData deformed_boundary_mesh(const VectorField3& u, const Domain3& domain, int resolution,
                                const std::vector<Vector2d>& fiber_points) {
  if (resolution < 2) throw std::invalid_argument("export_mesh: resolution must be >= 2");
  const Box3 box = domain.box();
  MeshBuilder builder{u, {}, {}};

  const int r = resolution;
  for (int axis = 0; axis < 3; ++axis) {
    const int ta = (axis == 0) ? 1 : 0;
    const int tb = (axis == 2) ? 1 : 2;
    for (int side = 0; side < 2; ++side) {
      // The (ta, tb) parameterization has intrinsic normal +e_axis for axes 0
      // and 2 and -e_axis for axis 1; reverse winding when that disagrees
      // with the outward direction of this side.
      const bool flip = (side == 0) != (axis == 1);
      std::vector<int> ids(static_cast<std::size_t>(r) * r);
      for (int i = 0; i < r; ++i) {
        for (int j = 0; j < r; ++j) {
          Vector3d x;
          x[axis] = (side == 1) ? box.hi[axis] : box.lo[axis];
          x[ta] = grid_coord(box.lo[ta], box.hi[ta], i, r);
          x[tb] = grid_coord(box.lo[tb], box.hi[tb], j, r);
          ids[static_cast<std::size_t>(i) * r + j] = builder.vertex(x);
        }
      }
      for (int i = 0; i + 1 < r; ++i) {
        for (int j = 0; j + 1 < r; ++j) {
          const int v00 = ids[static_cast<std::size_t>(i) * r + j];
          const int v10 = ids[static_cast<std::size_t>(i + 1) * r + j];
          const int v11 = ids[static_cast<std::size_t>(i + 1) * r + j + 1];
          const int v01 = ids[static_cast<std::size_t>(i) * r + j + 1];
          if (flip)
            builder.mesh.quads.push_back({v00, v01, v11, v10});
          else
            builder.mesh.quads.push_back({v00, v10, v11, v01});
        }
      }
    }
  }

  for (const Vector2d& p : fiber_points) {
    std::vector<int> line;
    line.reserve(static_cast<std::size_t>(r));
    for (int k = 0; k < r; ++k) {
      const Vector3d x(p.x(), p.y(), grid_coord(0.0, domain.height, k, r));
      line.push_back(builder.vertex(x));
    }
    builder.mesh.lines.push_back(std::move(line));
  }

  return builder.mesh;
}

void write_obj(const MeshData& mesh, std::ostream& out) {
  for (const Vector3d& v : mesh.vertices) {
    out << "v " << format_double(v.x()) << ' ' << format_double(v.y()) << ' '
        << format_double(v.z()) << '\n';
  }
  for (const auto& q : mesh.quads) {
    out << "f " << q[0] + 1 << ' ' << q[1] + 1 << ' ' << q[2] + 1 << ' ' << q[3] + 1 << '\n';
  }
  for (const auto& line : mesh.lines) {
    out << 'l';
    for (int id : line) out << ' ' << id + 1;
    out << '\n';
  }
}

void write_vtk(const MeshData& mesh, std::ostream& out, const std::string& title) {
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET POLYDATA\n";
  out << "POINTS " << mesh.vertices.size() << " double\n";
  for (const Vector3d& v : mesh.vertices) {
    out << format_double(v.x()) << ' ' << format_double(v.y()) << ' ' << format_double(v.z())
        << '\n';
  }
  if (!mesh.quads.empty()) {
    out << "POLYGONS " << mesh.quads.size() << ' ' << mesh.quads.size() * 5 << '\n';
    for (const auto& q : mesh.quads) {
      out << "4 " << q[0] << ' ' << q[1] << ' ' << q[2] << ' ' << q[3] << '\n';
    }
  }
  if (!mesh.lines.empty()) {
    std::size_t total = 0;
    for (const auto& line : mesh.lines) total += line.size() + 1;
    out << "LINES " << mesh.lines.size() << ' ' << total << '\n';
    for (const auto& line : mesh.lines) {
      out << line.size();
      for (int id : line) out << ' ' << id;
      out << '\n';
    }
  }
}

void export_mesh(const VectorField3& u, const Domain3& domain, int resolution, MeshFormat format,
                 const std::string& path, const std::vector<Vector2d>& fiber_points) {
  const MeshData mesh = deformed_boundary_mesh(u, domain, resolution, fiber_points);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("export_mesh: cannot open '" + path + "' for writing");
  if (format == MeshFormat::obj)
    write_obj(mesh, out);
  else
    write_vtk(mesh, out);
  out.flush();
  if (!out) throw std::runtime_error("export_mesh: write to '" + path + "' failed");
}

}  // namespace fiberlab
