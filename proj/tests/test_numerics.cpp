#include "doctest.h"

#include <cmath>
#include <set>

#include "fiberlab/numerics.hpp"

using namespace fiberlab;

TEST_CASE("rng streams are deterministic and seed-sensitive") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t va = a.next_u64();
    CHECK(va == b.next_u64());
  }
  bool differs = false;
  Rng a2(42);
  for (int i = 0; i < 10; ++i) differs = differs || (a2.next_u64() != c.next_u64());
  CHECK(differs);
}

TEST_CASE("rng uniform stays in range and fills it") {
  Rng r(7);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double v = r.uniform();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);

  for (int i = 0; i < 1000; ++i) {
    const double v = r.uniform(-2.0, 3.0);
    CHECK(v >= -2.0);
    CHECK(v < 3.0);
  }
}

TEST_CASE("rng unit vectors and disk samples") {
  Rng r(11);
  Vector3d mean = Vector3d::Zero();
  for (int i = 0; i < 2000; ++i) {
    const Vector3d v = r.unit_vector();
    CHECK(std::abs(v.norm() - 1.0) < 1e-12);
    mean += v;
  }
  CHECK(mean.norm() / 2000.0 < 0.1);  // no gross directional bias

  for (int i = 0; i < 2000; ++i) {
    const Vector2d d = r.disk(0.125);
    CHECK(d.norm() < 0.125);
  }
}

TEST_CASE("rng mix is usable as an order-independent stream key") {
  const std::uint64_t k1 = Rng::mix(7, 3, 5);
  const std::uint64_t k2 = Rng::mix(7, 3, 5);
  CHECK(k1 == k2);
  std::set<std::uint64_t> keys;
  for (std::uint64_t i = 0; i < 50; ++i)
    for (std::uint64_t j = 0; j < 50; ++j) keys.insert(Rng::mix(9, i, j));
  CHECK(keys.size() == 2500);  // no collisions on a small grid
}

TEST_CASE("axis breaks refine uniform panels with interior extras only") {
  const std::vector<double> br = axis_breaks(0.0, 1.0, 4, {0.1, 0.25, -3.0, 7.0, 0.1});
  REQUIRE(br.size() == 6);  // 0, .1, .25, .5, .75, 1 (0.25 duplicates a uniform break)
  CHECK(br.front() == 0.0);
  CHECK(br.back() == 1.0);
  for (std::size_t i = 1; i < br.size(); ++i) CHECK(br[i] > br[i - 1]);
  CHECK(br[1] == doctest::Approx(0.1));
}

TEST_CASE("midpoint quadrature integrates affine functions exactly") {
  const Box2 box{{-1.0, 0.0}, {2.0, 1.5}};
  const Quadrature2 q = Quadrature2::on(box, 5, 3);
  const double got = q.integrate([](const Vector2d& x) { return 2.0 + 3.0 * x.x() - x.y(); });
  // closed form: 2|B| + 3*mean_x*|B| - mean_y*|B|
  const double area = box.area();
  const double want = area * (2.0 + 3.0 * 0.5 - 0.75);
  CHECK(got == doctest::Approx(want).epsilon(1e-13));
}

TEST_CASE("quadrature panels honor extra breakpoints exactly") {
  // f piecewise constant with a jump at x = 0.3: exact iff 0.3 is a panel edge.
  const Box2 box{{0.0, 0.0}, {1.0, 1.0}};
  const auto f = [](const Vector2d& x) { return x.x() < 0.3 ? 1.0 : 5.0; };
  const Quadrature2 plain = Quadrature2::on(box, 7, 2);
  const Quadrature2 split = Quadrature2::on(box, 7, 2, {0.3});
  CHECK(std::abs(plain.integrate(f) - (0.3 + 5.0 * 0.7)) > 1e-6);
  CHECK(split.integrate(f) == doctest::Approx(0.3 + 5.0 * 0.7).epsilon(1e-14));
}

TEST_CASE("3d quadrature integrates separable products exactly enough") {
  const Box3 box{{0.0, 0.0, 0.0}, {1.0, 1.0, 2.0}};
  const Quadrature3 q = Quadrature3::on(box, 64, 64, 64);
  const double got = q.integrate([](const Vector3d& x) { return x.x() * x.y() * x.z(); });
  CHECK(got == doctest::Approx(0.25 * 2.0).epsilon(1e-4));
  CHECK(q.node_count() == 64u * 64u * 64u);
}

TEST_CASE("quadrature result does not depend on evaluation order") {
  const Box3 box{{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}};
  const Quadrature3 q = Quadrature3::on(box, 33, 17, 9);
  const auto f = [](const Vector3d& x) { return std::sin(13.0 * x.x()) + x.y() * x.z(); };
  const double a = q.integrate(f);
  const double b = q.integrate(f);
  CHECK(a == b);  // bitwise: fixed reduction order
}
