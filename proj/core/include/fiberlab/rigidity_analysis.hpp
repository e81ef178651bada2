#pragma once

#include "fiberlab/fields.hpp"
#include "fiberlab/geometry.hpp"

#include <functional>
#include <map>
#include <optional>
#include <vector>

namespace fiberlab {

/// Nearest rotation to F (orientation-preserving polar factor).  Requires
/// det F > 0; signals otherwise and on rank-deficient input.
Matrix3d project_SO3(const Matrix3d& F);

/// Distance of F to SO(3) in the Frobenius norm, exact for every F via the
/// singular values (sign-corrected when det F <= 0).
double dist_SO3(const Matrix3d& F);

/// One rotation and offset per fiber cell: the piecewise-rigid comparison
/// field w(x) = R_k x + b_k on the cuboid of cell k, and the derived
/// piecewise-constant director sigma(x') = R_{cell(x')} e3.
class PiecewiseRotationField {
 public:
  explicit PiecewiseRotationField(FiberLayout layout) : layout_(std::move(layout)) {}

  const FiberLayout& layout() const { return layout_; }

  /// Validates the rotation (orthogonality within 1e-10, det > 0).
  void insert(CellIndex k, const Matrix3d& R, const Vector3d& b);
  bool has(CellIndex k) const { return entries_.count(k) != 0; }
  const Matrix3d& rotation(CellIndex k) const;
  const Vector3d& translation(CellIndex k) const;
  std::vector<CellIndex> cells() const;  // ascending (i, j)
  std::size_t size() const { return entries_.size(); }

  Matrix3d rotation_at(const Vector2d& xp) const;  // R of the cell containing x'
  Vector3d sigma(const Vector2d& xp) const;        // third column of that rotation
  Vector3d w(const Vector3d& x) const;             // R_k x + b_k

  /// Closed bounding box of the covered cells; signals if the covered index
  /// set is not a full rectangle (translations would step off the data).
  Box2 covered_box() const;

 private:
  FiberLayout layout_;
  std::map<CellIndex, std::pair<Matrix3d, Vector3d>> entries_;
};

/// Per-cell sampling resolution for rotation extraction: n_cross^2 in-plane
/// points inside the fiber square times n_axial points along the fiber.
struct ExtractionSpec {
  int n_cross = 3;
  int n_axial = 4;
};

/// For every cell whose closed cuboid lies inside the body: average grad u
/// over the fiber-square nodes, project the average to SO(3), then set
/// b_k = mean(u(x) - R_k x) over the same nodes.  Signals (naming the cell)
/// when an averaged gradient is not orientation-preserving.
PiecewiseRotationField extract_rotations(const VectorField3& u, const FiberLayout& layout,
                                         const Domain3& domain, const ExtractionSpec& spec = {});

/// || u - w ||_{L^p} over the union of covered cell cuboids.
double piecewise_rigid_error(const VectorField3& u, const PiecewiseRotationField& prf, double p,
                             const QuadratureSpec& spec);

/// Translation modulus of the piecewise-constant director: for each offset xi
/// the exact integral of |sigma(. + xi) - sigma|^p over U, the smallest C with
/// value <= C (|xi|^p + eps^p) on the list, and the per-row slack under that
/// envelope.  U and U + xi must stay inside the covered box.
struct FkRow {
  Vector2d xi = Vector2d::Zero();
  double value = 0.0;
  double slack = 0.0;
};
struct FkReport {
  double eps = 0.0;
  double p = 0.0;
  Box2 U;
  double fitted_C = 0.0;
  std::vector<FkRow> rows;
};
FkReport fk_modulus(const PiecewiseRotationField& prf, const std::vector<Vector2d>& xi_list,
                    double p, const Box2& U);

/// max over xi of ||Sigma(. + xi) - Sigma||_{L^p(U)} / |xi| — the difference
/// quotient whose boundedness as |xi| -> 0 is the Sobolev certificate.
double difference_quotient_norm(const std::function<Vector3d(const Vector2d&)>& Sigma,
                                const std::vector<Vector2d>& xi_list, double p, const Box2& U,
                                const Box2& omega, int n0, int n1);

/// Closed-form lower bound for the connector estimate:
///   L3^{p+1} L2 / (2^p (p+1) (1+m^2)^{p/2} L1^{p-1}) * |(A2 - A1) e3|^p.
double lemma31_rhs(double p, double L1, double L2, double L3, double m, const Matrix3d& A1,
                   const Matrix3d& A2);

/// A connector run: the sheared slab E = {(y1, y2 + m y1, y3) : y in
/// (0,L1)x(0,L2)x(0,L3)} with affine data w_i = A_i x + b_i imposed on the
/// faces {y1 = 0} and {y1 = L1}.
struct AffineTraceConfig {
  double p = 2.0;
  double L1 = 1.0, L2 = 1.0, L3 = 1.0;
  double m = 0.0;
  Matrix3d A1 = Matrix3d::Zero();
  Matrix3d A2 = Matrix3d::Zero();
  Vector3d b1 = Vector3d::Zero();
  Vector3d b2 = Vector3d::Zero();

  Vector3d w1(const Vector3d& x) const { return A1 * x + b1; }
  Vector3d w2(const Vector3d& x) const { return A2 * x + b2; }
  /// Face parametrizations: points (0, y2, y3) and (L1, m L1 + y2, y3).
  Vector3d face1(double y2, double y3) const { return Vector3d(0.0, y2, y3); }
  Vector3d face2(double y2, double y3) const { return Vector3d(L1, m * L1 + y2, y3); }
};

/// The canonical admissible field: linear interpolation between the two face
/// traces along the sheared coordinate.
std::function<Vector3d(const Vector3d&)> lemma31_interpolant(const AffineTraceConfig& cfg);

struct Lemma31Report {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  double trace_residual = 0.0;
};

/// lhs = integral over the slab of |d_d v|^p with d the unit in-plane
/// direction crossing it; checks the face traces first (tolerance 1e-8).
/// ratio = lhs / rhs (1 when both vanish).
Lemma31Report lemma31_verify(const std::function<Vector3d(const Vector3d&)>& v,
                             const AffineTraceConfig& cfg, int n = 25);

/// Coordinate-descent minimizer of the discretized lhs over an n^3 node grid
/// with the face traces pinned (p = 2 only: the per-node update is exact).
/// Returns the minimized discrete lhs against the same rhs.
Lemma31Report lemma31_brute_force(const AffineTraceConfig& cfg, int n = 17,
                                  int max_sweeps = 100000, double tol = 1e-13);

/// Two-phase energy.  Soft density: dist(F, SO(3))^p or the quadratic-in-
/// strain |F^T F - I|^{p/2}; both vanish exactly on SO(3) and are
/// frame-indifferent.  The stiff phase is an indicator: value 0 when every
/// sampled stiff-region gradient is within tau of SO(3), infeasible
/// otherwise.  A dist^p integral over the stiff region is always reported.
struct EnergyDensitySpec {
  enum class Soft { dist_p, stvk_like };
  Soft soft = Soft::dist_p;
  double soft_p = 2.0;
  double diagnostic_p = 2.0;
  std::optional<double> tau;  // default: 1e-8 analytic, 10 * fd_step^2 sampled
};
double soft_density(const EnergyDensitySpec& spec, const Matrix3d& F);

struct EnergyReport {
  double soft = 0.0;
  bool rigid_feasible = true;
  double rigid = 0.0;  // 0 when feasible; the offending max distance otherwise
  double rigid_max_dist = 0.0;
  double rigid_diagnostic = 0.0;  // integral of dist^diagnostic_p over the stiff set
  double tau = 0.0;
};
EnergyReport energy(const VectorField3& u, const FiberLayout& layout,
                    const EnergyDensitySpec& spec, const QuadratureSpec& quad);

/// Same with an arbitrary stiff-region indicator on the cross-section
/// (e.g. the x1-layer pattern of the bending sequence) and the in-plane
/// breakpoints its edges induce.
EnergyReport energy_masked(const VectorField3& u,
                           const std::function<bool(const Vector2d&)>& rigid_mask,
                           const std::vector<double>& breaks_x, const std::vector<double>& breaks_y,
                           const EnergyDensitySpec& spec, const QuadratureSpec& quad);

/// Higher-regularity diagnostics for one sequence member:
///  - L^p norms of the in-plane second differences of u (11, 12, 22);
///  - the translation modulus rescaled by eps^{-p} (bounded iff the improved
///    modulus holds);
///  - the averaged field V(x') = (mean over x3 of grad' u | sigma(x')), its
///    L^p distance to SO(3) over the stiff part of U, and its L^p gap to the
///    x3-averaged gradient of the candidate limit over all of U.
struct RegularizedRow {
  double eps = 0.0;
  double second_diff_11 = 0.0;
  double second_diff_12 = 0.0;
  double second_diff_22 = 0.0;
  double second_diff_max = 0.0;
  double fk_rescaled_C = 0.0;
  double v_dist_rigid = 0.0;
  double v_gap_limit = 0.0;
};
RegularizedRow regularized_row(const VectorField3& u, const FiberLayout& layout, double p,
                               const std::vector<Vector2d>& xi_list, const Box2& U,
                               const VectorField3* limit = nullptr,
                               const ExtractionSpec& ext = {},
                               std::optional<QuadratureSpec> spec = std::nullopt,
                               int n_axial_avg = 8);

struct SweepMember {
  double eps = 0.0;
  VectorField3 u;
  FiberLayout layout;
};
struct RegularizedReport {
  double p = 0.0;
  std::vector<RegularizedRow> rows;
};
/// Runs regularized_row per member; xi_units are in units of each member's
/// eps (so the offsets shrink with the pattern).
RegularizedReport regularized_check(const std::vector<SweepMember>& members, double p,
                                    const std::vector<Vector2d>& xi_units, const Box2& U,
                                    const VectorField3* limit = nullptr);

/// Quadrature measure of {x in Q : dist(V(x), SO(3)) > gamma}.
double deviation_measure(const std::function<Matrix3d(const Vector3d&)>& V, double gamma,
                         const Box3& Q, int n0, int n1, int n2,
                         const std::vector<double>& breaks0 = {},
                         const std::vector<double>& breaks1 = {},
                         const std::vector<double>& breaks2 = {});

}  // namespace fiberlab
