#pragma once

#include "fiberlab/numerics.hpp"

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fiberlab {

/// Index of the half-open lattice cell eps*(k + [0,1)^2).
struct CellIndex {
  long i = 0;
  long j = 0;
  auto operator<=>(const CellIndex&) const = default;
};

/// Prismatic body: open cross-section rectangle omega times (0, height).
struct Domain3 {
  Box2 omega;
  double height = 1.0;

  Domain3() = default;
  Domain3(const Box2& w, double L);

  Box3 box() const {
    return Box3{{omega.lo[0], omega.lo[1], 0.0}, {omega.hi[0], omega.hi[1], height}};
  }
  double volume() const { return omega.area() * height; }
};

enum class CenterMode { periodic, jittered };
enum class FiberShape { square, polygon };

/// Periodic lattice of rigid fiber cross-sections.
///
/// Each cell eps*(k+[0,1)^2) carries an inner square of side eps*delta centered
/// at eps*(k + a_k); the admissible window for a_k is [alpha+delta/2,
/// 1-alpha-delta/2)^2 so every cross-section keeps an alpha-margin to the cell
/// boundary.  Centers are either one fixed `a` (periodic) or drawn per cell
/// from the window with a seeded, order-independent generator (jittered).
/// Cross-sections default to the inner square itself; a polygonal shape (in
/// unit-cell coordinates, containing the inner square, periodic centers only)
/// is supported as well.  Fibers are the cross-sections extruded in x3.
class FiberLayout {
 public:
  static FiberLayout periodic(double eps, double alpha, double delta, const Vector2d& a);
  /// Periodic with the cell-centered choice a = (1/2, 1/2).
  static FiberLayout periodic_centered(double eps, double alpha, double delta);
  static FiberLayout jittered(double eps, double alpha, double delta, std::uint64_t seed);
  static FiberLayout polygonal(double eps, double alpha, double delta, const Vector2d& a,
                               std::vector<Vector2d> cell_polygon);

  double epsilon() const { return eps_; }
  double alpha() const { return alpha_; }
  double delta() const { return delta_; }
  CenterMode center_mode() const { return mode_; }
  FiberShape shape() const { return shape_; }
  std::uint64_t seed() const { return seed_; }
  const Vector2d& periodic_center() const { return a_; }
  const std::vector<Vector2d>& cell_polygon() const { return polygon_; }

  /// Center offset a_k within the unit cell (in [alpha+delta/2, 1-alpha-delta/2)^2).
  Vector2d unit_center(CellIndex k) const;
  /// Physical center eps*(k + a_k).
  Vector2d center(CellIndex k) const;
  /// Half-open inner square [c - eps*delta/2, c + eps*delta/2)^2.
  Box2 inner_square(CellIndex k) const;
  /// Half-open cell eps*(k + [0,1)^2).
  Box2 cell(CellIndex k) const;
  /// Half-open margin box eps*(k + [alpha, 1-alpha)^2) that must contain the cross-section.
  Box2 margin_box(CellIndex k) const;
  /// Cross-section polygon in physical coordinates (counter-clockwise).
  std::vector<Vector2d> cross_section(CellIndex k) const;

  /// Largest admissible |slope| of a connecting parallelogram: (1-2a-d)/(2a).
  double max_slope_bound() const { return (1.0 - 2.0 * alpha_ - delta_) / (2.0 * alpha_); }

 private:
  FiberLayout() = default;
  void validate() const;

  double eps_ = 0.125;
  double alpha_ = 0.25;
  double delta_ = 0.4;
  CenterMode mode_ = CenterMode::periodic;
  FiberShape shape_ = FiberShape::square;
  Vector2d a_{0.5, 0.5};
  std::uint64_t seed_ = 0;
  std::vector<Vector2d> polygon_;  // unit-cell coordinates, non-empty iff shape == polygon
};

/// Lattice cell containing x' (componentwise floor of x'/eps; half-open cells).
CellIndex cell_of(const Vector2d& x, const FiberLayout& layout);

/// Whether x' lies in the fiber cross-section of its cell.
bool is_rigid(const Vector2d& x, const FiberLayout& layout);
/// Whether the 3d point lies in the rigid set (cross-section membership of (x1,x2)).
bool is_rigid(const Vector3d& x, const FiberLayout& layout);

/// Cells whose half-open cell intersects omega / whose closed cell lies inside
/// closure(omega).  Straddling cells appear in the first list only; pipelines
/// that extract per-fiber data use the second.
std::vector<CellIndex> cells_intersecting(const FiberLayout& layout, const Box2& omega);
std::vector<CellIndex> interior_cells(const FiberLayout& layout, const Box2& omega);

/// |Y_rig ∩ Omega| / |Omega| with exact per-cell clipped areas (fibers are
/// x3-invariant, so this is an area ratio).  Throws if no cell meets omega.
double rigid_volume_fraction(const FiberLayout& layout, const Domain3& domain);

struct SlopeInfo {
  double bound = 0.0;     // closed form (1-2a-d)/(2a)
  double realized = 0.0;  // max |m| over the sampled window's connectors
};

/// Closed-form slope bound plus the realized maximum over connectors of cells
/// k in [0,window)^2 (0 for periodic layouts).
SlopeInfo slope_bound(const FiberLayout& layout, long window = 16);

/// Which facing edges the connecting parallelogram joins.
///  - gap:      the full facing edges of the two inner squares (width eps*delta),
///              spanning exactly the soft gap between them.
///  - overlap:  half-width lines a quarter square inside each inner square
///              (width eps*delta/2), so the parallelogram overlaps both squares
///              by a slab of depth eps*delta/4.
enum class ConnectorVariant { gap, overlap };
enum class Direction { right, up };

/// Parallelogram in the normal form {0 < s < L1, m s < t < m s + L2} x (0, L3),
/// anchored at `anchor`; (s,t) = (x1,x2) for Direction::right and (x2,x1) for
/// Direction::up.  `mu` is the overlap depth into each square (0 for gap).
struct Connector {
  double L1 = 0.0;
  double L2 = 0.0;
  double m = 0.0;
  Vector2d anchor{0.0, 0.0};
  double mu = 0.0;
  Direction direction = Direction::right;
  ConnectorVariant variant = ConnectorVariant::gap;
};

/// Connector between cell k and its right/up neighbor.  If `within` is given,
/// both closed cells must lie inside it (signals otherwise).
Connector connector(const FiberLayout& layout, CellIndex k, Direction dir,
                    ConnectorVariant variant = ConnectorVariant::gap,
                    const std::optional<Box2>& within = std::nullopt);

/// Exact JSON round-trip of the layout definition
/// (keys: schema_version, epsilon, alpha, delta, center_mode, center, seed, shape, polygon).
std::string to_json(const FiberLayout& layout);
FiberLayout layout_from_json(const std::string& text);

/// Exact area of the intersection of two axis-aligned rectangles.
double rect_intersection_area(const Box2& a, const Box2& b);
/// Area of a simple polygon clipped to a rectangle (Sutherland–Hodgman + shoelace).
double clipped_polygon_area(const std::vector<Vector2d>& poly, const Box2& clip);

}  // namespace fiberlab
