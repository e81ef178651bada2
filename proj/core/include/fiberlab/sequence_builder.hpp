#pragma once

#include "fiberlab/approx_identity.hpp"
#include "fiberlab/fields.hpp"
#include "fiberlab/geometry.hpp"
#include "fiberlab/limit_deformations.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace fiberlab {

/// One member of the approximating sequence:
///   u_eps(x) = R(y) x + b(y),  y = clamp(phi_eps(x') + a) onto the closed
/// cross-section.  On every fiber square phi_eps is a single point, so the
/// gradient there is R(y) exactly — a rotation.
struct ApproxDeformation {
  RotationForm rf;
  FiberLayout layout;
  ApproxIdentity id;
  Vector2d a = Vector2d::Zero();

  /// clamp(phi_eps(x') + a): the argument fed to R and b.
  Vector2d collapse_argument(const Vector2d& xp) const;

  /// Deformation with exact piecewise chain-rule gradient.
  VectorField3 field() const;

  /// The single point carrying the fiber square of cell k, and the rotation
  /// the gradient equals on that fiber.
  Vector2d collapsed_point(CellIndex k) const;
  Matrix3d fiber_rotation(CellIndex k) const;
};

/// Validates |a| < eps and the layout/identity parameter agreement.
ApproxDeformation build(const RotationForm& rf, const FiberLayout& layout,
                        const ApproxIdentity& id, const Vector2d& a);

/// Translation selection: sample M translations uniformly in the open disk
/// B(0, eps), keep the one minimizing the L^p norm of |grad u^a| over the
/// body.  The minimum is at most the sample mean, which is the constructive
/// form of the averaging bound the selection is based on.
struct TranslationChoice {
  Vector2d a = Vector2d::Zero();
  double grad_norm = 0.0;
  std::vector<double> sample_norms;
  double mean = 0.0;
};
TranslationChoice select_translation(const RotationForm& rf, const FiberLayout& layout,
                                     const ApproxIdentity& id, double p, int M = 32,
                                     std::uint64_t seed = 7,
                                     std::optional<QuadratureSpec> spec = std::nullopt);

/// Layer-bending sequence: stiff layers eps*(i+[alpha,1-alpha)) in x1 are bent
/// isometrically onto the arc gamma while the soft bands between them
/// interpolate linearly in x1.  The x3-fibers inside each layer follow
/// gamma'(x3), which depends on x3 — so the limit leaves the admissible class
/// even though the per-layer distance to SO(3) is O(eps).
struct BendingSequence {
  double rho = 2.0;
  double epsilon = 0.125;
  double alpha = 0.25;
  Domain3 domain;

  Vector3d gamma(double t) const;        // rho (sin(t/rho), 0, 1 - cos(t/rho))
  Vector3d gamma_prime(double t) const;  // (cos(t/rho), 0, sin(t/rho)), unit
  Vector3d nu(double t) const;           // e2 x gamma', the in-plane normal
  Vector3d nu_prime(double t) const;     // gamma'/rho

  bool rigid_layer(double x1) const;
  /// x1 positions of the layer/band interfaces inside the cross-section.
  std::vector<double> layer_breaks() const;

  VectorField3 u_eps() const;
  VectorField3 limit() const;  // x1 e1 + x2 e2 + gamma(x3)
};

/// Validates rho > L/pi and eps in (0,1).
BendingSequence bending_counterexample(double rho, double eps, double alpha,
                                       const Domain3& domain);

/// u_eps + eps^{beta/p} * psi.  psi defaults to default_beta_bump on the
/// deformation's domain; pass a field with |grad psi| <= 1 to override.
VectorField3 perturb_beta(const ApproxDeformation& ad, double beta, double p,
                          const VectorField3* psi = nullptr);

/// (0, 0, sin(pi x1 / w) * w / pi) with w the x1-width of the cross-section;
/// smooth, gradient sup-norm exactly 1, nonzero across the fiber pattern.
VectorField3 default_beta_bump(const Domain3& domain);

/// Node grid over the cross-section holding `comps` values per node, with
/// bilinear interpolation — the intake format for measured rotation data.
struct PlaneGrid {
  Box2 domain;
  int nx = 2, ny = 2, comps = 1;
  std::vector<double> values;  // (ix * ny + iy) * comps + c

  static PlaneGrid make(const Box2& domain, int nx, int ny, int comps);
  double& at(int ix, int iy, int c);
  double at(int ix, int iy, int c) const;
  Eigen::VectorXd sample(const Vector2d& x) const;
};

/// Separable discrete Gaussian smoothing (kernel radius 3 sigma, edge
/// renormalized); sigma in node spacings.  sigma <= 0 returns the input.
PlaneGrid gaussian_smooth(const PlaneGrid& grid, double sigma_nodes);

/// Rotation form from sampled 3x3 matrix entries (9 components, column-major)
/// and offsets (3 components), Gaussian-smoothed then bilinearly interpolated;
/// partials by central differences at half node spacing.  Values are used as
/// given: no orthogonality is enforced or implied for measured data.
RotationForm rotation_form_from_samples(const Domain3& domain, const PlaneGrid& rotations,
                                        const PlaneGrid& offsets, double sigma_nodes = 1.0);

}  // namespace fiberlab
