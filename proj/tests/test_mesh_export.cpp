#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fiberlab/limit_deformations.hpp"
#include "fiberlab/mesh_export.hpp"

using namespace fiberlab;

namespace {

VectorField3 identity_field(const Domain3& dom) {
  VectorField3 u;
  u.domain = dom;
  u.value = [](const Vector3d& x) { return x; };
  return u;
}

const Domain3 unit_cube{Box2{{0.0, 0.0}, {1.0, 1.0}}, 1.0};

bool has_vertex(const MeshData& mesh, const Vector3d& v, double tol) {
  return std::any_of(mesh.vertices.begin(), mesh.vertices.end(),
                     [&](const Vector3d& w) { return (w - v).norm() <= tol; });
}

}  // namespace

TEST_CASE("identity cube at resolution 2 is exactly the 8 corners") {
  const MeshData mesh = deformed_boundary_mesh(identity_field(unit_cube), unit_cube, 2);
  CHECK(mesh.vertices.size() == 8);
  CHECK(mesh.quads.size() == 6);
  CHECK(mesh.lines.empty());
  for (double cx : {0.0, 1.0}) {
    for (double cy : {0.0, 1.0}) {
      for (double cz : {0.0, 1.0}) {
        CHECK(has_vertex(mesh, Vector3d(cx, cy, cz), 0.0));
      }
    }
  }
  for (const auto& q : mesh.quads) {
    for (int idx : q) {
      CHECK(idx >= 0);
      CHECK(idx < 8);
    }
  }
}

TEST_CASE("every face winds outward at resolution 3") {
  const MeshData mesh = deformed_boundary_mesh(identity_field(unit_cube), unit_cube, 3);
  const Vector3d center(0.5, 0.5, 0.5);
  for (const auto& q : mesh.quads) {
    const Vector3d a = mesh.vertices[static_cast<std::size_t>(q[0])];
    const Vector3d b = mesh.vertices[static_cast<std::size_t>(q[1])];
    const Vector3d c = mesh.vertices[static_cast<std::size_t>(q[2])];
    const Vector3d d = mesh.vertices[static_cast<std::size_t>(q[3])];
    const Vector3d normal = (b - a).cross(d - a);
    const Vector3d centroid = 0.25 * (a + b + c + d);
    CHECK(normal.dot(centroid - center) > 0.0);
  }
}

TEST_CASE("shear moves the far corner where it belongs") {
  const DirectorForm df = preset(PresetKind::shear);  // default gamma = 1
  const VectorField3 u = df.deformation();
  const MeshData mesh = deformed_boundary_mesh(u, df.domain, 2);
  CHECK(has_vertex(mesh, Vector3d(1.0, 2.0, 1.0), 1e-12));
}

TEST_CASE("twist fibers stay straight with unit length") {
  const DirectorForm df = preset(PresetKind::twist);
  const VectorField3 u = df.deformation();
  const std::vector<Vector2d> fibers = {Vector2d(1.0, 0.5), Vector2d(2.5, 0.5)};
  const MeshData mesh = deformed_boundary_mesh(u, df.domain, 9, fibers);
  REQUIRE(mesh.lines.size() == 2);
  for (const auto& line : mesh.lines) {
    REQUIRE(line.size() == 9);
    const Vector3d first = mesh.vertices[static_cast<std::size_t>(line.front())];
    const Vector3d last = mesh.vertices[static_cast<std::size_t>(line.back())];
    const Vector3d dir = last - first;
    CHECK(dir.norm() == doctest::Approx(df.domain.height).epsilon(1e-10));
    for (std::size_t s = 1; s + 1 < line.size(); ++s) {
      const Vector3d mid = mesh.vertices[static_cast<std::size_t>(line[s])];
      const Vector3d want = first + (static_cast<double>(s) / 8.0) * dir;
      CHECK((mid - want).norm() < 1e-10);
    }
  }
}

TEST_CASE("OBJ output uses 1-based v/f/l records") {
  const std::vector<Vector2d> fibers = {Vector2d(0.5, 0.5)};
  const MeshData mesh = deformed_boundary_mesh(identity_field(unit_cube), unit_cube, 2, fibers);
  std::ostringstream out;
  write_obj(mesh, out);
  const std::string text = out.str();

  std::istringstream in(text);
  std::string line;
  std::size_t n_v = 0, n_f = 0, n_l = 0;
  while (std::getline(in, line)) {
    if (line.rfind("v ", 0) == 0) ++n_v;
    if (line.rfind("f ", 0) == 0) {
      ++n_f;
      std::istringstream fs(line.substr(2));
      int idx = 0;
      while (fs >> idx) {
        CHECK(idx >= 1);
        CHECK(idx <= static_cast<int>(mesh.vertices.size()));
      }
    }
    if (line.rfind("l ", 0) == 0) ++n_l;
  }
  CHECK(n_v == mesh.vertices.size());
  CHECK(n_f == mesh.quads.size());
  CHECK(n_l == mesh.lines.size());
}

TEST_CASE("VTK output is legacy POLYDATA with points, polygons, lines") {
  const std::vector<Vector2d> fibers = {Vector2d(0.5, 0.5)};
  const MeshData mesh = deformed_boundary_mesh(identity_field(unit_cube), unit_cube, 3, fibers);
  std::ostringstream out;
  write_vtk(mesh, out);
  const std::string text = out.str();

  CHECK(text.find("# vtk DataFile Version") != std::string::npos);
  CHECK(text.find("DATASET POLYDATA") != std::string::npos);
  CHECK(text.find("POINTS " + std::to_string(mesh.vertices.size())) != std::string::npos);
  CHECK(text.find("POLYGONS " + std::to_string(mesh.quads.size())) != std::string::npos);
  CHECK(text.find("LINES " + std::to_string(mesh.lines.size())) != std::string::npos);
}

TEST_CASE("export rejects bad resolutions and non-finite deformations") {
  CHECK_THROWS_AS(deformed_boundary_mesh(identity_field(unit_cube), unit_cube, 1),
                  std::invalid_argument);

  VectorField3 bad;
  bad.domain = unit_cube;
  bad.value = [](const Vector3d& x) {
    return Vector3d(x.x(), x.y(), x.z() > 0.5 ? std::numeric_limits<double>::quiet_NaN() : x.z());
  };
  CHECK_THROWS_AS(deformed_boundary_mesh(bad, unit_cube, 3), std::runtime_error);
}

TEST_CASE("export_mesh writes files in both formats") {
  const std::string obj_path = "mesh_export_test.obj";
  const std::string vtk_path = "mesh_export_test.vtk";
  export_mesh(identity_field(unit_cube), unit_cube, 2, MeshFormat::obj, obj_path);
  export_mesh(identity_field(unit_cube), unit_cube, 2, MeshFormat::vtk, vtk_path);

  std::ifstream obj_in(obj_path);
  REQUIRE(obj_in.good());
  std::string first;
  std::getline(obj_in, first);
  bool saw_vertex = first.rfind("v ", 0) == 0;
  std::string line;
  while (std::getline(obj_in, line)) saw_vertex = saw_vertex || line.rfind("v ", 0) == 0;
  CHECK(saw_vertex);

  std::ifstream vtk_in(vtk_path);
  REQUIRE(vtk_in.good());
  std::getline(vtk_in, first);
  CHECK(first.rfind("# vtk", 0) == 0);

  std::remove(obj_path.c_str());
  std::remove(vtk_path.c_str());
}
