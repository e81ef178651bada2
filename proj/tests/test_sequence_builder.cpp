#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fiberlab/rigidity_analysis.hpp"
#include "fiberlab/sequence_builder.hpp"

using namespace fiberlab;

namespace {

ApproxDeformation make_member(PresetKind kind, double eps, const Vector2d& a = Vector2d::Zero()) {
  const DirectorForm df = preset(kind);
  const RotationForm rf = to_rotation_form(df);
  const FiberLayout layout = FiberLayout::periodic_centered(eps, 0.25, 0.4);
  const ApproxIdentity id = ApproxIdentity::make(0.25, eps, df.domain.omega);
  return build(rf, layout, id, a);
}

}  // namespace

TEST_CASE("build validates the translation and parameter agreement") {
  const DirectorForm df = preset(PresetKind::paraboloid);
  const RotationForm rf = to_rotation_form(df);
  const FiberLayout layout = FiberLayout::periodic_centered(0.125, 0.25, 0.4);
  const ApproxIdentity id = ApproxIdentity::make(0.25, 0.125, df.domain.omega);
  CHECK_THROWS_AS(build(rf, layout, id, Vector2d(0.125, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(build(rf, layout, ApproxIdentity::make(0.2, 0.125, df.domain.omega),
                        Vector2d::Zero()),
                  std::invalid_argument);
  CHECK_THROWS_AS(build(rf, FiberLayout::periodic_centered(0.25, 0.25, 0.4), id,
                        Vector2d::Zero()),
                  std::invalid_argument);
  CHECK_NOTHROW(build(rf, layout, id, Vector2d(0.05, -0.05)));
}

TEST_CASE("sequence members are exactly rigid on every fiber") {
  for (PresetKind kind : {PresetKind::paraboloid, PresetKind::twist}) {
    const ApproxDeformation ad = make_member(kind, 0.125);
    const VectorField3 u = ad.field();
    Rng rng(31);
    const Box2& w = ad.rf.domain.omega;
    int hits = 0;
    while (hits < 300) {
      const Vector2d xp(rng.uniform(w.lo.x(), w.hi.x()), rng.uniform(w.lo.y(), w.hi.y()));
      if (!is_rigid(xp, ad.layout)) continue;
      ++hits;
      const Vector3d x(xp.x(), xp.y(), rng.uniform(0.0, ad.rf.domain.height));
      const Matrix3d g = grad(u, x);
      CHECK(dist_SO3(g) < 1e-12);
      // the gradient is the rotation attached to the collapsed point
      const Matrix3d R = ad.fiber_rotation(cell_of(xp, ad.layout));
      CHECK((g - R).norm() < 1e-12);
    }
  }
}

TEST_CASE("collapse argument is clamped to the closed cross-section") {
  const ApproxDeformation ad = make_member(PresetKind::paraboloid, 0.125,
                                           Vector2d(0.06, -0.06));
  const Box2& w = ad.rf.domain.omega;
  Rng rng(13);
  for (int i = 0; i < 500; ++i) {
    const Vector2d xp(rng.uniform(w.lo.x(), w.hi.x()), rng.uniform(w.lo.y(), w.hi.y()));
    const Vector2d y = ad.collapse_argument(xp);
    CHECK(y.x() >= w.lo.x());
    CHECK(y.x() <= w.hi.x());
    CHECK(y.y() >= w.lo.y());
    CHECK(y.y() <= w.hi.y());
    // the argument stays within eps + |a| of the source point
    CHECK((y - xp).norm() < 0.125 * std::sqrt(2.0) * 0.5 + 0.06 * std::sqrt(2.0) + 1e-12);
  }
}

TEST_CASE("members converge to the limit in Lp") {
  const double p = 4.0;
  QuadratureSpec spec;
  spec.n1 = spec.n2 = 8;
  spec.n3 = 4;
  std::vector<double> dist;
  for (double eps : {0.25, 0.125, 0.0625}) {
    const ApproxDeformation ad = make_member(PresetKind::paraboloid, eps);
    dist.push_back(
        lp_norm_diff(ad.field(), ad.rf.deformation(), p, Region::whole(), spec, &ad.layout));
    CHECK(dist.back() < 4.0 * eps);  // O(eps) with a modest constant
  }
  CHECK(dist[1] < dist[0]);
  CHECK(dist[2] < dist[1]);
  CHECK(dist[0] / dist[2] > 2.5);  // roughly first-order decay across two halvings
}

TEST_CASE("translation selection: rigid motions make every candidate equal") {
  const Domain3 dom{Box2{{-1.0, -1.0}, {1.0, 1.0}}, 1.0};
  Matrix3d R0;
  const double c = std::cos(0.4), s = std::sin(0.4);
  R0 << c, 0, s, 0, 1, 0, -s, 0, c;
  const RotationForm rf = RotationForm::constant(dom, R0, Vector3d(0.3, 0, 0));
  const FiberLayout layout = FiberLayout::periodic_centered(0.125, 0.25, 0.4);
  const ApproxIdentity id = ApproxIdentity::make(0.25, 0.125, dom.omega);

  QuadratureSpec spec;
  spec.n1 = spec.n2 = 4;
  spec.n3 = 2;
  const TranslationChoice tc = select_translation(rf, layout, id, 4.0, 8, 7, spec);
  // |grad u| = |R0| = sqrt(3) everywhere, any translation: norm = sqrt3 * vol^{1/4}
  const double want = std::sqrt(3.0) * std::pow(dom.volume(), 0.25);
  CHECK(tc.grad_norm == doctest::Approx(want).epsilon(1e-12));
  CHECK(tc.mean == doctest::Approx(want).epsilon(1e-12));
  REQUIRE(tc.sample_norms.size() == 8);
  CHECK(tc.a.norm() < 0.125);

  // determinism
  const TranslationChoice tc2 = select_translation(rf, layout, id, 4.0, 8, 7, spec);
  CHECK(tc2.a == tc.a);
  CHECK(tc2.grad_norm == tc.grad_norm);
}

TEST_CASE("translation selection minimum is at most the sample mean") {
  const DirectorForm df = preset(PresetKind::twist);
  const RotationForm rf = to_rotation_form(df);
  const FiberLayout layout = FiberLayout::periodic_centered(0.25, 0.25, 0.4);
  const ApproxIdentity id = ApproxIdentity::make(0.25, 0.25, df.domain.omega);
  QuadratureSpec spec;
  spec.n1 = spec.n2 = 6;
  spec.n3 = 2;
  const TranslationChoice tc = select_translation(rf, layout, id, 4.0, 12, 3, spec);
  CHECK(tc.grad_norm <= tc.mean + 1e-12);
  for (double v : tc.sample_norms) CHECK(tc.grad_norm <= v + 1e-12);
  CHECK(tc.a.norm() < 0.25);
}

TEST_CASE("bending sequence geometry") {
  const Domain3 dom{Box2{{0.0, 0.0}, {1.0, 1.0}}, 1.0};
  const double rho = 2.0, eps = 0.125;
  const BendingSequence bs = bending_counterexample(rho, eps, 0.25, dom);

  // arc: unit speed, curvature 1/rho, starts at the origin heading e1
  CHECK(bs.gamma(0.0).norm() < 1e-15);
  for (double t : {0.0, 0.3, 0.9}) {
    CHECK(std::abs(bs.gamma_prime(t).norm() - 1.0) < 1e-14);
    CHECK(std::abs(bs.nu(t).norm() - 1.0) < 1e-14);
    CHECK(std::abs(bs.gamma_prime(t).dot(bs.nu(t))) < 1e-14);
    CHECK((bs.nu_prime(t) - bs.gamma_prime(t) / rho).norm() < 1e-13);
  }
  CHECK((bs.gamma_prime(0.0) - Vector3d(1, 0, 0)).norm() < 1e-15);

  // layers: frac(x1/eps) in [alpha, 1-alpha)
  CHECK(bs.rigid_layer(0.125 * 0.5));
  CHECK(!bs.rigid_layer(0.125 * 0.1));
  CHECK(!bs.rigid_layer(0.125 * 0.9));
  CHECK(bs.rigid_layer(0.125 * 3.3));

  const std::vector<double> br = bs.layer_breaks();
  CHECK(br.size() >= 16);  // two interfaces per layer, 8 layers across the width
  for (double b : br) {
    CHECK(b >= 0.0);
    CHECK(b <= 1.0);
  }

  CHECK_THROWS_AS(bending_counterexample(1.0 / M_PI, eps, 0.25, dom), std::invalid_argument);
}

TEST_CASE("bending members stretch only along fibers and approach the bent limit") {
  const Domain3 dom{Box2{{0.0, 0.0}, {1.0, 1.0}}, 1.0};
  const BendingSequence bs = bending_counterexample(2.0, 0.0625, 0.25, dom);
  const VectorField3 u = bs.u_eps();
  const VectorField3 lim = bs.limit();

  // limit value: x1 e1 + x2 e2 + gamma(x3)
  const Vector3d x(0.4, 0.7, 0.9);
  CHECK((lim(x) - (Vector3d(0.4, 0.7, 0.0) + bs.gamma(0.9))).norm() < 1e-14);

  // on a stiff layer the only stretch is along the fiber: its distance to a
  // rigid motion is exactly (x1 - eps*i)/rho with i the layer's cell index
  Rng rng(9);
  int on = 0;
  for (int i = 0; i < 400 && on < 120; ++i) {
    const Vector3d y(rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0));
    if (!bs.rigid_layer(y.x())) continue;
    ++on;
    const double s = y.x() - bs.epsilon * std::floor(y.x() / bs.epsilon);
    CHECK(dist_SO3(grad(u, y)) == doctest::Approx(s / bs.rho).epsilon(1e-10));
  }
  CHECK(on >= 120);

  // uniform closeness to the limit at the scale of eps
  double sup = 0.0;
  for (int i = 0; i < 300; ++i) {
    const Vector3d y(rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0));
    sup = std::max(sup, (u(y) - lim(y)).norm());
  }
  CHECK(sup < 10.0 * 0.0625);
}

TEST_CASE("beta perturbations scale like eps^{beta/p} and keep the default bump") {
  const ApproxDeformation ad = make_member(PresetKind::paraboloid, 0.125);
  const VectorField3 base = ad.field();
  const double beta = 12.0, p = 4.0;
  const VectorField3 pert = perturb_beta(ad, beta, p);
  const VectorField3 bump = default_beta_bump(ad.rf.domain);

  const double scale = std::pow(0.125, beta / p);
  Rng rng(77);
  for (int i = 0; i < 100; ++i) {
    const Vector3d x(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(0.0, 1.0));
    CHECK((pert(x) - base(x) - scale * bump(x)).norm() < 1e-14);
  }

  // the default bump: zero in-plane components, sinusoidal axial one, |grad| <= 1
  const double w = 2.0;  // x1-width of (-1,1)^2
  const Vector3d probe(0.5, 0.3, 0.5);
  CHECK(std::abs(bump(probe).z() - std::sin(M_PI * 0.5 / w) * w / M_PI) < 1e-14);
  CHECK(bump(probe).x() == 0.0);
  CHECK(bump(probe).y() == 0.0);
  for (int i = 0; i < 50; ++i) {
    const Vector3d x(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(0.0, 1.0));
    CHECK(grad(bump, x).norm() <= 1.0 + 1e-9);
  }
}

TEST_CASE("plane grids interpolate, smooth, and rebuild measured rotation data") {
  // grid basics: bilinear interpolation is exact on node values and affine data
  PlaneGrid g = PlaneGrid::make(Box2{{0.0, 0.0}, {1.0, 1.0}}, 5, 4, 2);
  for (int ix = 0; ix < 5; ++ix) {
    for (int iy = 0; iy < 4; ++iy) {
      const double x = ix / 4.0, y = iy / 3.0;
      g.at(ix, iy, 0) = 2.0 * x - y;
      g.at(ix, iy, 1) = 1.0;
    }
  }
  const Eigen::VectorXd mid = g.sample(Vector2d(0.3, 0.7));
  CHECK(mid[0] == doctest::Approx(2.0 * 0.3 - 0.7).epsilon(1e-13));
  CHECK(mid[1] == doctest::Approx(1.0).epsilon(1e-15));

  // smoothing preserves constants exactly (edge-renormalized kernel)
  const PlaneGrid s = gaussian_smooth(g, 1.5);
  bool const_ok = true;
  for (int ix = 0; ix < 5; ++ix)
    for (int iy = 0; iy < 4; ++iy) const_ok = const_ok && std::abs(s.at(ix, iy, 1) - 1.0) < 1e-12;
  CHECK(const_ok);

  // sample the twist rotation field, rebuild it, compare mid-grid
  const DirectorForm df = preset(PresetKind::twist);
  const RotationForm rf = to_rotation_form(df);
  const Box2& w = df.domain.omega;
  const int nx = 65, ny = 5;
  PlaneGrid rots = PlaneGrid::make(w, nx, ny, 9);
  PlaneGrid offs = PlaneGrid::make(w, nx, ny, 3);
  for (int ix = 0; ix < nx; ++ix) {
    for (int iy = 0; iy < ny; ++iy) {
      const Vector2d xp(w.lo.x() + w.width(0) * ix / (nx - 1.0),
                        w.lo.y() + w.width(1) * iy / (ny - 1.0));
      const Matrix3d R = rf.R(xp);
      const Vector3d b = rf.b(xp);
      for (int c = 0; c < 9; ++c) rots.at(ix, iy, c) = R(c % 3, c / 3);  // column-major
      for (int c = 0; c < 3; ++c) offs.at(ix, iy, c) = b[c];
    }
  }
  const RotationForm rec = rotation_form_from_samples(df.domain, rots, offs, 0.0);
  Rng rng(4);
  for (int i = 0; i < 60; ++i) {
    const Vector2d xp(rng.uniform(w.lo.x() + 0.1, w.hi.x() - 0.1),
                      rng.uniform(w.lo.y(), w.hi.y()));
    const Matrix3d R = rec.R(xp);
    // measured data: interpolation is close to, but not exactly, a rotation
    CHECK(dist_SO3(R) < 0.01);
    CHECK((R - rf.R(xp)).norm() < 0.05);
  }
}
