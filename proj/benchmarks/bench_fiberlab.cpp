// Microbenchmarks for the numerical kernels on the hot paths: rotation
// projection and distance, the collapsing plane map, sequence-member
// evaluation, norm quadrature, rotation extraction, and the translation
// modulus.

#include <benchmark/benchmark.h>

#include <vector>

#include "fiberlab/approx_identity.hpp"
#include "fiberlab/fields.hpp"
#include "fiberlab/geometry.hpp"
#include "fiberlab/limit_deformations.hpp"
#include "fiberlab/rigidity_analysis.hpp"
#include "fiberlab/sequence_builder.hpp"

namespace {

using namespace fiberlab;

Matrix3d perturbed_rotation() {
  Matrix3d F = (Eigen::AngleAxisd(0.7, Vector3d(1, 2, 2).normalized())).toRotationMatrix();
  F(0, 1) += 0.05;
  F(2, 0) -= 0.03;
  return F;
}

ApproxDeformation make_member(double eps) {
  const DirectorForm df = preset(PresetKind::paraboloid);
  const RotationForm rf = to_rotation_form(df);
  const FiberLayout layout = FiberLayout::periodic_centered(eps, 0.25, 0.4);
  const ApproxIdentity id = ApproxIdentity::make(0.25, eps, df.domain.omega);
  return build(rf, layout, id, Vector2d::Zero());
}

void BM_project_SO3(benchmark::State& state) {
  const Matrix3d F = perturbed_rotation();
  for (auto _ : state) {
    benchmark::DoNotOptimize(project_SO3(F));
  }
}
BENCHMARK(BM_project_SO3);

void BM_dist_SO3(benchmark::State& state) {
  const Matrix3d F = perturbed_rotation();
  for (auto _ : state) {
    benchmark::DoNotOptimize(dist_SO3(F));
  }
}
BENCHMARK(BM_dist_SO3);

void BM_phi_map(benchmark::State& state) {
  const ApproxIdentity id = ApproxIdentity::make(0.25, 0.125, Box2{{-1, -1}, {1, 1}});
  Rng rng(3);
  std::vector<Vector2d> pts;
  for (int i = 0; i < 256; ++i) {
    pts.emplace_back(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(id.map(pts[i++ & 255]));
  }
}
BENCHMARK(BM_phi_map);

void BM_phi_grad(benchmark::State& state) {
  const ApproxIdentity id = ApproxIdentity::make(0.25, 0.125, Box2{{-1, -1}, {1, 1}});
  Rng rng(4);
  std::vector<Vector2d> pts;
  for (int i = 0; i < 256; ++i) {
    pts.emplace_back(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(id.grad(pts[i++ & 255]));
  }
}
BENCHMARK(BM_phi_grad);

void BM_member_value(benchmark::State& state) {
  const ApproxDeformation ad = make_member(0.125);
  const VectorField3 u = ad.field();
  Rng rng(5);
  std::vector<Vector3d> pts;
  for (int i = 0; i < 256; ++i) {
    pts.emplace_back(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(0.0, 1.0));
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(u.value(pts[i++ & 255]));
  }
}
BENCHMARK(BM_member_value);

void BM_lp_norm_member(benchmark::State& state) {
  const ApproxDeformation ad = make_member(0.25);
  const VectorField3 u = ad.field();
  QuadratureSpec spec;
  spec.n1 = spec.n2 = 4;
  spec.n3 = 2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lp_norm(u, 4.0, Region::whole(), spec, &ad.layout));
  }
}
BENCHMARK(BM_lp_norm_member);

void BM_extract_rotations(benchmark::State& state) {
  const ApproxDeformation ad = make_member(0.25);
  const VectorField3 u = ad.field();
  const Domain3 dom = ad.rf.domain;
  for (auto _ : state) {
    benchmark::DoNotOptimize(extract_rotations(u, ad.layout, dom));
  }
}
BENCHMARK(BM_extract_rotations);

void BM_fk_modulus(benchmark::State& state) {
  const ApproxDeformation ad = make_member(0.25);
  const PiecewiseRotationField prf = extract_rotations(ad.field(), ad.layout, ad.rf.domain);
  const Box2 U{{-0.5, -0.5}, {0.5, 0.5}};
  const std::vector<Vector2d> xi = {Vector2d(0.25, 0.0), Vector2d(0.0, 0.25),
                                    Vector2d(0.25, 0.25)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(fk_modulus(prf, xi, 4.0, U));
  }
}
BENCHMARK(BM_fk_modulus);

}  // namespace

BENCHMARK_MAIN();
