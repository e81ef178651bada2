#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "fiberlab/fields.hpp"
#include "fiberlab/geometry.hpp"

namespace fiberlab {

/// Deformed surface mesh: quad faces over the boundary of a box domain plus
/// optional polylines tracing deformed vertical fibers.
struct MeshData {
  std::vector<Vector3d> vertices;           ///< deformed positions
  std::vector<std::array<int, 4>> quads;    ///< 0-based vertex indices, outward winding
  std::vector<std::vector<int>> lines;      ///< 0-based polyline vertex indices
};

enum class MeshFormat { obj, vtk };

/// Maps a structured grid over the six boundary faces of `domain` (resolution
/// points per axis, >= 2) through `u`. Vertices shared between faces are
/// emitted once: deduplication keys on the exact reference-grid coordinates,
/// with box corners pinned bitwise, so the identity map on a cube at
/// resolution 2 yields exactly 8 vertices. Each `fiber_points` entry adds a
/// polyline sampling the deformed vertical line x' = const with `resolution`
/// points. Throws std::invalid_argument for resolution < 2 and
/// std::runtime_error if any deformed coordinate is non-finite.
MeshData deformed_boundary_mesh(const VectorField3& u, const Domain3& domain, int resolution,
                                const std::vector<Vector2d>& fiber_points = {});

/// Wavefront OBJ with only v/f/l records; indices 1-based; coordinates printed
/// with shortest round-trip formatting, so equal meshes give identical bytes.
void write_obj(const MeshData& mesh, std::ostream& out);

/// Legacy-VTK ASCII POLYDATA (POINTS / POLYGONS / LINES), 0-based indices.
void write_vtk(const MeshData& mesh, std::ostream& out,
               const std::string& title = "deformed configuration");

/// Builds the deformed boundary mesh and writes it to `path` in `format`.
/// Throws std::runtime_error on I/O failure.
void export_mesh(const VectorField3& u, const Domain3& domain, int resolution, MeshFormat format,
                 const std::string& path, const std::vector<Vector2d>& fiber_points = {});

}  // namespace fiberlab
