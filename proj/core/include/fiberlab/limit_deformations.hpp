#pragma once

#include "fiberlab/fields.hpp"
#include "fiberlab/geometry.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>

namespace fiberlab {

/// Director form of an admissible limit deformation:
///   u(x) = x3 * sigma(x') + d(x'),   |sigma| = 1,
/// with optional analytic in-plane partials of sigma and d.
struct DirectorForm {
  Domain3 domain;
  std::function<Vector3d(const Vector2d&)> sigma;
  std::function<Vector3d(const Vector2d&)> d;
  std::function<std::array<Vector3d, 2>(const Vector2d&)> dsigma;   // optional
  std::function<std::array<Vector3d, 2>(const Vector2d&)> dd;       // optional
  std::function<std::array<Vector3d, 3>(const Vector2d&)> ddsigma;  // optional (11, 22, 12)
  std::function<std::array<Vector3d, 3>(const Vector2d&)> ddd;      // optional (11, 22, 12)

  /// Induced deformation x -> x3*sigma + d with analytic gradient
  /// (x3 dsigma_1 + dd_1 | x3 dsigma_2 + dd_2 | sigma) when partials exist.
  VectorField3 deformation() const;

  /// In-plane partials of sigma/d: analytic or central differences.
  std::array<Vector3d, 2> sigma_partials(const Vector2d& x) const;
  std::array<Vector3d, 2> d_partials(const Vector2d& x) const;
};

/// Rotation form u(x) = R(x') x + b(x') with R(x') in SO(3).
struct RotationForm {
  Domain3 domain;
  std::function<Matrix3d(const Vector2d&)> R;
  std::function<Vector3d(const Vector2d&)> b;
  std::function<std::array<Matrix3d, 2>(const Vector2d&)> dR;  // optional
  std::function<std::array<Vector3d, 2>(const Vector2d&)> db;  // optional

  VectorField3 deformation() const;

  /// Constant rigid motion x -> R0 x + b0 as a (trivially x'-independent) form.
  static RotationForm constant(const Domain3& domain, const Matrix3d& R0, const Vector3d& b0);
};

enum class PresetKind {
  paraboloid,    // sigma = e3, d = (x1, x2, -x1^2 - x2^2)
  shear,         // sigma = e3, d = (x1, g*x1 + x2, 0)
  twist,         // sigma = (0, -sin(x1/pi), cos(x1/pi)), d = (x1, x2 cos(x1/pi), x2 sin(x1/pi))
  tyre,          // sigma = (x1/r, 0, sqrt(r^2-x1^2)/r), d = (x1, x2 + e^{x2}, sqrt(r^2-x1^2))
  hedgehog,      // sigma = (2x1, 2x2, 1)/sqrt(4|x'|^2+1), d = (x1, x2, -x1^2 - x2^2)
  trophy,        // sigma = (-x1-x2, x1-x2, sqrt(2)) / (sqrt(2) sqrt(|x'|^2+1)), d = (x1, x2, 0)
  rigid_motion,  // u = R0 x + b0
  bending_limit  // not a director form; produced by the bending counterexample builder
};

struct PresetSpec {
  PresetKind kind = PresetKind::paraboloid;
  double gamma = 1.0;  // shear
  double r = 1.5;      // tyre
  double rho = 2.0;    // bending_limit
  Matrix3d R0 = Matrix3d::Identity();
  Vector3d b0 = Vector3d::Zero();
};

/// Cross-section/height pairs used in the gallery figures.
Domain3 default_domain(PresetKind kind);
std::string preset_name(PresetKind kind);
std::optional<PresetKind> preset_from_name(const std::string& name);

/// Director form of a gallery preset on the given domain.  Signals for
/// bending_limit (that limit has an x3-dependent director; see the
/// counterexample builder) and for tyre when r <= max |x1|.
DirectorForm preset(const PresetSpec& spec, const Domain3& domain);
DirectorForm preset(PresetKind kind);  // default parameters on the default domain

/// Two explicit rotation lifts sending e3 to sigma, defined away from the
/// poles sigma = ±e3 (precondition sigma1^2 + sigma2^2 >= eta^2):
///  - horizontal: second column (-s2, s1, 0)/q stays in the plane x3 = 0;
///  - vertical:   second column (-s1 s3, -s2 s3, 1 - s3^2)/q is the
///                normalized projection of e3 onto sigma-perp.
enum class LiftKind { horizontal, vertical };

Matrix3d lift(LiftKind kind, const Vector3d& sigma, double eta = 1e-2);
Matrix3d lift_R(const Vector3d& sigma, double eta = 1e-2);  // horizontal
Matrix3d lift_S(const Vector3d& sigma, double eta = 1e-2);  // vertical
/// Lift together with its directional derivative along dsigma.
std::pair<Matrix3d, Matrix3d> lift_with_derivative(LiftKind kind, const Vector3d& sigma,
                                                   const Vector3d& dsigma, double eta = 1e-2);

/// The 26 candidate pre-rotations (rotations sending a cube axis/edge/corner
/// direction to e3, in a fixed deterministic order).
const std::vector<Matrix3d>& pre_rotation_candidates();

/// Samples sigma on a coarse grid and picks the candidate Q maximizing the
/// worst-case pole margin min (Q sigma)_1^2 + (Q sigma)_2^2.  Signals if no
/// candidate clears eta^2.
Matrix3d select_pre_rotation(const DirectorForm& df, int grid = 24, double eta = 1e-2);

struct LiftOptions {
  LiftKind kind = LiftKind::horizontal;
  double eta = 1e-2;
  std::optional<Matrix3d> pre_rotation;  // default: automatic selection
  int selection_grid = 24;
};

/// Rotation form R(x') = Q^T lift(Q sigma(x')), b = d - x1 R e1 - x2 R e2.
/// Reconstructs u exactly: R(x') x + b(x') = x3 sigma + d.
RotationForm to_rotation_form(const DirectorForm& df, const LiftOptions& opts = {});

/// Membership diagnostics for the admissible limit class (x3-independent unit
/// director): max over sampled pairs |d3u(x',s) - d3u(x',t)| and the worst
/// deviation of |d3u| from 1.
struct MembershipReport {
  double x3_dependence = 0.0;
  double unit_deviation = 0.0;
  double tol = 1e-9;
  bool pass = false;
};
MembershipReport membership_A0(const VectorField3& u, double tol = 1e-9, int n_plane = 9,
                               int n_axial = 5);

/// Membership diagnostics for the layered subclass u = R(x1) x + b(x1):
/// second differences in x2 / x3 / mixed must vanish for fixed x1, and
/// (d2 u | d3 u) must be orthonormal.  The components are reported separately
/// so "affine in x2 only" is visible for bending-type limits.
struct LayeredReport {
  double affine_x2 = 0.0;
  double affine_x3 = 0.0;
  double mixed = 0.0;
  double frame = 0.0;
  double tol = 1e-9;
  bool pass = false;
};
LayeredReport membership_B0(const VectorField3& u, double tol = 1e-9, int n1 = 9, int n23 = 5);

/// max |det grad u - 1| over 3d nodes and max |d1 sigma x d2 sigma| over
/// planar nodes (the parallel-directions consequence of incompressibility).
struct IncompressibilityReport {
  double max_det_deviation = 0.0;
  double max_parallel_residual = 0.0;
};
IncompressibilityReport incompressibility(const DirectorForm& df, const QuadratureSpec& spec);

}  // namespace fiberlab
