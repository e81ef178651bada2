#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fiberlab/geometry.hpp"

using namespace fiberlab;

namespace {
const double kEps = 0.5;
FiberLayout centered() { return FiberLayout::periodic_centered(kEps, 0.25, 0.4); }
}  // namespace

TEST_CASE("layout parameter validation") {
  CHECK_THROWS_AS(FiberLayout::periodic_centered(0.0, 0.25, 0.4), std::invalid_argument);
  CHECK_THROWS_AS(FiberLayout::periodic_centered(0.5, 0.0, 0.4), std::invalid_argument);
  CHECK_THROWS_AS(FiberLayout::periodic_centered(0.5, 0.5, 0.4), std::invalid_argument);
  // margin condition delta + 2 alpha < 1 violated
  CHECK_THROWS_AS(FiberLayout::periodic_centered(0.5, 0.3, 0.4), std::invalid_argument);
  CHECK_THROWS_AS(FiberLayout::periodic_centered(0.5, 0.25, 0.0), std::invalid_argument);
  // center outside the admissible window
  CHECK_THROWS_AS(FiberLayout::periodic(0.5, 0.25, 0.4, Vector2d(0.1, 0.5)),
                  std::invalid_argument);
  CHECK_NOTHROW(FiberLayout::periodic(0.5, 0.25, 0.4, Vector2d(0.46, 0.54)));
}

TEST_CASE("cells are half-open and indexed by floor") {
  const FiberLayout l = centered();
  CHECK(cell_of(Vector2d(0.1, 0.1), l) == CellIndex{0, 0});
  CHECK(cell_of(Vector2d(-0.1, 0.1), l) == CellIndex{-1, 0});
  CHECK(cell_of(Vector2d(0.5, 0.0), l) == CellIndex{1, 0});  // lower edge belongs to the cell
  CHECK(cell_of(Vector2d(0.9999, 0.9999), l) == CellIndex{1, 1});

  const Box2 c = l.cell({0, 0});
  CHECK(c.lo == Vector2d(0.0, 0.0));
  CHECK(c.hi == Vector2d(0.5, 0.5));
  CHECK(c.contains(Vector2d(0.0, 0.0)));
  CHECK(!c.contains(Vector2d(0.5, 0.0)));
}

TEST_CASE("inner squares, margin boxes, and membership") {
  const FiberLayout l = centered();
  CHECK(l.center({0, 0}) == Vector2d(0.25, 0.25));
  CHECK(l.center({2, -1}) == Vector2d(1.25, -0.25));

  const Box2 sq = l.inner_square({0, 0});
  CHECK(sq.lo.x() == doctest::Approx(0.15).epsilon(1e-15));
  CHECK(sq.hi.x() == doctest::Approx(0.35).epsilon(1e-15));
  CHECK(sq.width(0) == doctest::Approx(kEps * 0.4).epsilon(1e-15));

  const Box2 mb = l.margin_box({0, 0});
  CHECK(mb.lo.x() == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(mb.hi.x() == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(mb.contains_box(sq, 1e-15));  // cross-section keeps the margin

  CHECK(is_rigid(Vector2d(0.25, 0.25), l));
  CHECK(!is_rigid(Vector2d(0.14, 0.25), l));   // inside margin box, left of the square
  CHECK(!is_rigid(Vector2d(0.45, 0.45), l));   // corner region
  CHECK(is_rigid(Vector3d(0.25, 0.25, 0.7), l));
  CHECK(!is_rigid(Vector3d(0.45, 0.45, 0.7), l));
}

TEST_CASE("cell enumeration over a window") {
  const FiberLayout l = centered();
  CHECK(cells_intersecting(l, Box2{{-1.0, -1.0}, {1.0, 1.0}}).size() == 16);
  CHECK(interior_cells(l, Box2{{-1.0, -1.0}, {1.0, 1.0}}).size() == 16);

  const Box2 small{{0.0, 0.0}, {0.8, 0.8}};
  CHECK(cells_intersecting(l, small).size() == 4);
  const std::vector<CellIndex> inner = interior_cells(l, small);
  REQUIRE(inner.size() == 1);
  CHECK(inner[0] == CellIndex{0, 0});

  // ascending order
  const std::vector<CellIndex> all = cells_intersecting(l, Box2{{-1.0, -1.0}, {1.0, 1.0}});
  CHECK(std::is_sorted(all.begin(), all.end()));
}

TEST_CASE("rigid volume fraction is the squared side fraction on aligned windows") {
  const FiberLayout l = centered();
  const Domain3 dom{Box2{{-1.0, -1.0}, {1.0, 1.0}}, 1.0};
  CHECK(rigid_volume_fraction(l, dom) == doctest::Approx(0.16).epsilon(1e-13));

  // misaligned window: still between 0 and 1 and close to delta^2 for many cells
  const Domain3 dom2{Box2{{-0.93, -1.01}, {1.07, 0.93}}, 2.0};
  const double f = rigid_volume_fraction(l, dom2);
  CHECK(f > 0.1);
  CHECK(f < 0.25);
}

TEST_CASE("slope bound closed form and realized slopes") {
  const FiberLayout l = centered();
  CHECK(l.max_slope_bound() == doctest::Approx(0.2).epsilon(1e-15));
  const SlopeInfo s = slope_bound(l);
  CHECK(s.bound == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(s.realized == 0.0);  // periodic: all centers aligned

  const FiberLayout j = FiberLayout::jittered(kEps, 0.25, 0.4, 7);
  const SlopeInfo sj = slope_bound(j, 12);
  CHECK(sj.realized > 0.0);
  CHECK(sj.realized <= sj.bound + 1e-12);
}

TEST_CASE("jittered centers are deterministic, order-independent, and in-window") {
  const FiberLayout a = FiberLayout::jittered(0.25, 0.25, 0.4, 7);
  const FiberLayout b = FiberLayout::jittered(0.25, 0.25, 0.4, 7);
  const FiberLayout c = FiberLayout::jittered(0.25, 0.25, 0.4, 8);

  const Vector2d lo(0.25 + 0.2, 0.25 + 0.2);  // alpha + delta/2; window top mirrors it
  bool seed_matters = false;
  for (long i = -3; i <= 3; ++i) {
    for (long j = -3; j <= 3; ++j) {
      const CellIndex k{i, j};
      const Vector2d ua = a.unit_center(k);
      CHECK(ua == b.unit_center(k));
      seed_matters = seed_matters || (ua != c.unit_center(k));
      CHECK(ua.x() >= lo.x());
      CHECK(ua.y() >= lo.y());
      CHECK(ua.x() < 1.0 - 0.45 + 1e-15);
      CHECK(ua.y() < 1.0 - 0.45 + 1e-15);
    }
  }
  CHECK(seed_matters);

  // query order must not matter
  const FiberLayout d = FiberLayout::jittered(0.25, 0.25, 0.4, 7);
  const Vector2d late = d.unit_center({2, 2});
  CHECK(late == a.unit_center({2, 2}));
}

TEST_CASE("connector normal form between horizontal neighbors") {
  const FiberLayout l = centered();

  const Connector gap = connector(l, {0, 0}, Direction::right, ConnectorVariant::gap);
  CHECK(gap.L1 == doctest::Approx(0.30).epsilon(1e-14));  // eps (1 - delta)
  CHECK(gap.L2 == doctest::Approx(0.20).epsilon(1e-14));  // eps delta
  CHECK(gap.m == 0.0);
  CHECK(gap.mu == 0.0);
  CHECK(gap.anchor.x() == doctest::Approx(0.35).epsilon(1e-14));
  CHECK(gap.anchor.y() == doctest::Approx(0.15).epsilon(1e-14));

  const Connector ov = connector(l, {0, 0}, Direction::right, ConnectorVariant::overlap);
  CHECK(ov.L1 == doctest::Approx(0.40).epsilon(1e-14));   // eps (1 - delta/2)
  CHECK(ov.L2 == doctest::Approx(0.10).epsilon(1e-14));   // eps delta / 2
  CHECK(ov.mu == doctest::Approx(0.05).epsilon(1e-14));   // eps delta / 4
  CHECK(ov.anchor.x() == doctest::Approx(0.30).epsilon(1e-14));
  CHECK(ov.anchor.y() == doctest::Approx(0.20).epsilon(1e-14));

  const Connector up = connector(l, {0, 0}, Direction::up, ConnectorVariant::gap);
  CHECK(up.anchor.x() == doctest::Approx(0.15).epsilon(1e-14));
  CHECK(up.anchor.y() == doctest::Approx(0.35).epsilon(1e-14));
  CHECK(up.direction == Direction::up);
}

TEST_CASE("connector slope for jittered layouts stays within the bound") {
  const FiberLayout j = FiberLayout::jittered(0.25, 0.25, 0.4, 3);
  for (long i = -2; i < 2; ++i) {
    for (long q = -2; q < 2; ++q) {
      for (Direction dir : {Direction::right, Direction::up}) {
        const Connector c = connector(j, {i, q}, dir, ConnectorVariant::overlap);
        CHECK(std::abs(c.m) <= j.max_slope_bound() + 1e-12);
        CHECK(c.L1 > 0.0);
      }
    }
  }
}

TEST_CASE("connector region check") {
  const FiberLayout l = centered();
  const Box2 region{{0.0, 0.0}, {0.8, 0.8}};
  CHECK_THROWS_AS(
      connector(l, {0, 0}, Direction::right, ConnectorVariant::gap, region),
      std::invalid_argument);
  const Box2 wide{{0.0, 0.0}, {1.0, 0.5}};
  CHECK_NOTHROW(connector(l, {0, 0}, Direction::right, ConnectorVariant::gap, wide));
}

TEST_CASE("layout JSON round trip") {
  const FiberLayout j = FiberLayout::jittered(0.125, 0.2, 0.3, 99);
  const FiberLayout back = layout_from_json(to_json(j));
  CHECK(back.epsilon() == j.epsilon());
  CHECK(back.alpha() == j.alpha());
  CHECK(back.delta() == j.delta());
  CHECK(back.seed() == j.seed());
  CHECK(back.center_mode() == CenterMode::jittered);
  CHECK(back.unit_center({3, -2}) == j.unit_center({3, -2}));

  CHECK_THROWS_AS(layout_from_json(R"({"schema_version":1,"epsilon":0.1,"alpha":0.25,)"
                                   R"("delta":0.4,"center_mode":"periodic",)"
                                   R"("center":[0.5,0.5],"seed":0,"shape":"square",)"
                                   R"("bogus":3})"),
                  std::invalid_argument);
}

TEST_CASE("polygonal cross-sections contain the inner square and stay periodic") {
  // margin box with chamfered corners, in unit-cell coordinates; the corner
  // cut x+y = 0.58 still leaves the inner-square corner (0.3, 0.3) inside
  std::vector<Vector2d> oct = {{0.33, 0.25}, {0.67, 0.25}, {0.75, 0.33}, {0.75, 0.67},
                               {0.67, 0.75}, {0.33, 0.75}, {0.25, 0.67}, {0.25, 0.33}};
  const FiberLayout poly = FiberLayout::polygonal(0.5, 0.25, 0.4, Vector2d(0.5, 0.5), oct);
  CHECK(poly.shape() == FiberShape::polygon);
  const std::vector<Vector2d> phys = poly.cross_section({1, 0});
  REQUIRE(phys.size() == 8);
  CHECK(phys[0].x() == doctest::Approx(0.5 + 0.5 * 0.33).epsilon(1e-14));
  CHECK(phys[0].y() == doctest::Approx(0.5 * 0.25).epsilon(1e-14));
  CHECK(is_rigid(Vector2d(0.75, 0.25), poly));            // center
  CHECK(is_rigid(Vector2d(0.75 + 0.11, 0.25), poly));     // inside octagon, outside square
  CHECK(!is_rigid(Vector2d(0.75 + 0.13, 0.25 + 0.13), poly));

  const double frac = rigid_volume_fraction(poly, Domain3{Box2{{0.0, 0.0}, {1.0, 1.0}}, 1.0});
  CHECK(frac > 0.16);  // octagon strictly contains the square
  CHECK(frac < 0.25);

  // polygon leaving the margin box must be rejected
  std::vector<Vector2d> bad = {{0.1, 0.1}, {0.9, 0.1}, {0.9, 0.9}, {0.1, 0.9}};
  CHECK_THROWS_AS(FiberLayout::polygonal(0.5, 0.25, 0.4, Vector2d(0.5, 0.5), bad),
                  std::invalid_argument);
}

TEST_CASE("rectangle intersection and polygon clipping areas") {
  CHECK(rect_intersection_area(Box2{{0, 0}, {1, 1}}, Box2{{0.5, 0.5}, {2, 2}}) ==
        doctest::Approx(0.25).epsilon(1e-15));
  CHECK(rect_intersection_area(Box2{{0, 0}, {1, 1}}, Box2{{1, 0}, {2, 1}}) == 0.0);

  // right triangle of area 1/2 clipped to its bounding box, then to half of it
  const std::vector<Vector2d> tri = {{0, 0}, {1, 0}, {0, 1}};
  CHECK(clipped_polygon_area(tri, Box2{{0, 0}, {1, 1}}) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(clipped_polygon_area(tri, Box2{{0, 0}, {0.5, 1}}) ==
        doctest::Approx(0.375).epsilon(1e-14));
}
