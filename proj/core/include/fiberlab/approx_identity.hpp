#pragma once

#include "fiberlab/geometry.hpp"
#include "fiberlab/numerics.hpp"

#include <array>
#include <cstdint>

namespace fiberlab {

/// Piecewise-affine plane map phi that collapses every margin box to the
/// midpoint of its cell and tiles the plane with the translated fundamental
/// patch Z = [-alpha, 1-alpha)^2, split into
///   Z1 = [-a,a)^2            -> z / (2a)                (corner piece)
///   Z2 = [-a,a) x [a,1-a)    -> (z1/(2a), 1/2)          (vertical seam)
///   Z3 = [a,1-a)^2           -> (1/2, 1/2)              (plateau)
///   Z4 = [a,1-a) x [-a,a)    -> (1/2, z2/(2a))          (horizontal seam)
/// extended by phi(z + k) = phi(z) + k.  It is continuous, piecewise affine
/// with |grad| <= sqrt(2)/(2 alpha) < 1/alpha, and constant on every margin box.
Vector2d phi(const Vector2d& z, double alpha);

/// Piecewise-constant gradient of phi (columns d1 phi | d2 phi).
Matrix2d grad_phi(const Vector2d& z, double alpha);

/// Which piece of the fundamental patch z falls into (1..4 as above).
int phi_piece(const Vector2d& z, double alpha);

/// Frobenius norms of the four piece gradients, in piece order.
std::array<double, 4> phi_piece_norms(double alpha);

/// Rescaled map phi_eps(x') = eps * phi(x'/eps) + d_eps on a planar window U,
/// with d_eps fixed so that the mean of phi_eps over U equals the mean of the
/// identity.  d_eps = 0 in closed form whenever U's extents are whole
/// multiples of eps (phi - id is cell-periodic); otherwise it is computed by
/// kink-aligned quadrature, which is exact for piecewise-affine integrands.
class ApproxIdentity {
 public:
  static ApproxIdentity make(double alpha, double eps, const Box2& U);

  double alpha() const { return alpha_; }
  double epsilon() const { return eps_; }
  const Vector2d& d_eps() const { return d_; }
  const Box2& window() const { return U_; }

  Vector2d map(const Vector2d& x) const;        // phi_eps(x')
  Matrix2d grad(const Vector2d& x) const;       // piecewise-constant gradient
  /// Image of the translated cell eps*(k+Z): the half-open square
  /// eps*(k + [-1/2, 1/2)^2) + d_eps.
  Box2 image_square(CellIndex k) const;
  /// Collapsed value on the margin box of cell k: eps*(k + (1/2,1/2)) + d_eps.
  Vector2d collapsed(CellIndex k) const;

 private:
  double alpha_ = 0.25;
  double eps_ = 0.125;
  Vector2d d_{0.0, 0.0};
  Box2 U_;
};

/// Diagnostic report for the defining properties of phi_eps.
struct PhiReport {
  std::array<double, 4> piece_norms{};  // Frobenius norms of the piece gradients
  double grad_sup = 0.0;                // max over pieces
  double grad_bound = 0.0;              // 1/alpha
  bool constant_on_fibers = false;      // bit-identical value across each cross-section
  int fibers_checked = 0;
  bool images_disjoint = false;         // distinct cells map into disjoint squares
  bool images_contained = false;        // samples land in the predicted square
  int cells_checked = 0;
  double sup_distance = 0.0;            // sup_U |phi_eps - id|
};

/// Checks (i) the gradient bound, (ii) bitwise constancy on every interior
/// fiber cross-section, (iii) image containment/disjointness over interior
/// cells, (iv) the sup-distance to the identity (exact: attained at piece
/// vertices, all of which are enumerated).
PhiReport verify_properties(const ApproxIdentity& id, const FiberLayout& layout,
                            int samples_per_cell = 25, std::uint64_t seed = 1234);

}  // namespace fiberlab
