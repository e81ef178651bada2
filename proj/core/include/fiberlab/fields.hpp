#pragma once

#include "fiberlab/geometry.hpp"
#include "fiberlab/numerics.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace fiberlab {

/// Deformation field on a prismatic domain.  `value` is mandatory; `gradient`
/// (columns d1 u | d2 u | d3 u) and `hessian(x, i, j)` are optional analytic
/// evaluators — finite differences substitute when they are absent.
struct VectorField3 {
  enum class Kind { closed_form, sampled };

  Kind kind = Kind::closed_form;
  Domain3 domain;
  std::function<Vector3d(const Vector3d&)> value;
  std::function<Matrix3d(const Vector3d&)> gradient;                 // optional
  std::function<Vector3d(const Vector3d&, int, int)> hessian;        // optional, d_i d_j u
  double fd_step = 1e-5;  // default step for closed-form fields without analytic gradient

  Vector3d operator()(const Vector3d& x) const { return value(x); }
  bool has_gradient() const { return static_cast<bool>(gradient); }
};

VectorField3 closed_form(const Domain3& domain, std::function<Vector3d(const Vector3d&)> value,
                         std::function<Matrix3d(const Vector3d&)> gradient = nullptr);

/// Gradient of u at x: analytic when available, otherwise second-order finite
/// differences with step h (default: the field's fd_step), switching to
/// one-sided stencils within h of the domain boundary.  Signals when the
/// domain is too thin to host a three-point stencil.
Matrix3d grad(const VectorField3& u, const Vector3d& x);
Matrix3d fd_grad(const VectorField3& u, const Vector3d& x, double h);

/// Integration region for norms and energies.
struct Region {
  enum class Kind { domain, rigid, soft, box };
  Kind kind = Kind::domain;
  std::optional<FiberLayout> layout;  // rigid / soft masks
  std::optional<Box3> clip;           // kind == box

  static Region whole() { return {}; }
  static Region rigid(const FiberLayout& l) { return {Kind::rigid, l, std::nullopt}; }
  static Region soft(const FiberLayout& l) { return {Kind::soft, l, std::nullopt}; }
  static Region box(const Box3& b) { return {Kind::box, std::nullopt, b}; }
};

/// Panel counts per axis for the tensor midpoint rule.  `resolve` applies the
/// refinement policy: at least `per_unit/eps` panels per unit length in-plane
/// (so each alpha*eps margin band receives >= 2 panels per axis), n3 axial.
struct QuadratureSpec {
  int n1 = 16;
  int n2 = 16;
  int n3 = 8;

  static QuadratureSpec resolve(const Domain3& domain, double eps, int per_unit = 8, int n3 = 8);
};

/// In-plane panel breakpoints a layout induces inside [lo,hi] on `axis`:
/// cell boundaries, the piecewise-affine kink lines eps*(n ± alpha), and the
/// inner-square edges, so no panel straddles a mask edge or a kink.
std::vector<double> layout_breaks(const FiberLayout& layout, int axis, double lo, double hi,
                                  bool kinks = true, bool square_edges = true);

/// Tensor midpoint quadrature over the region's bounding box, panels aligned
/// to `align` (falling back to the region's own layout) and to the clip box.
Quadrature3 make_quadrature(const Domain3& domain, const Region& region, const QuadratureSpec& spec,
                            const FiberLayout* align = nullptr);

/// (integral of |f|^p over the region)^(1/p) for a scalar magnitude f.
double lp_norm_scalar(const std::function<double(const Vector3d&)>& f, double p,
                      const Region& region, const Domain3& domain, const QuadratureSpec& spec,
                      const FiberLayout* align = nullptr);

/// (integral of |u|^p)^(1/p), Euclidean pointwise norm.
double lp_norm(const VectorField3& u, double p, const Region& region, const QuadratureSpec& spec,
               const FiberLayout* align = nullptr);

/// (integral of |u - v|^p)^(1/p).
double lp_norm_diff(const VectorField3& u, const VectorField3& v, double p, const Region& region,
                    const QuadratureSpec& spec, const FiberLayout* align = nullptr);

/// Integral (not the norm) of |f(x'+xi) - f(x')|^p over the planar box U.
/// Both U and U+xi must lie inside `omega` (signals otherwise).  `breaks0/1`
/// refine panels; pass the lattice lines of a piecewise-constant field (and
/// their xi-shifted copies) to make the integral exact.
double translate_diff(const std::function<Vector3d(const Vector2d&)>& f, const Vector2d& xi,
                      double p, const Box2& U, const Box2& omega, int n0, int n1,
                      const std::vector<double>& breaks0 = {},
                      const std::vector<double>& breaks1 = {});

/// || d_i d_j u ||_{L^p(Omega)} via the analytic hessian when present, else
/// second-order central second differences with h = half the uniform grid
/// spacing (one-sided variants near the boundary).  The grid is deliberately
/// not kink-aligned: difference quotients across gradient creases are the
/// quantity of interest.
double second_diff_norm(const VectorField3& u, int i, int j, double p, const QuadratureSpec& spec);

/// Uniformly sampled field on a node-centered grid (nodes include the domain
/// boundary; spacing h_a = extent_a/(n_a-1)).  Evaluation is trilinear;
/// gradients fall back to finite differences with h = half the min spacing.
struct SampledGrid {
  Domain3 domain;
  int nx = 2, ny = 2, nz = 2;
  std::vector<Vector3d> values;  // index = (ix*ny + iy)*nz + iz

  static SampledGrid sample(const VectorField3& u, int nx, int ny, int nz);
  VectorField3 field() const;
  Vector3d spacing() const;

  void save(const std::string& path) const;
  static SampledGrid load(const std::string& path);
};

}  // namespace fiberlab
