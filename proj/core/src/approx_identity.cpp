#include "fiberlab/approx_identity.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace fiberlab {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 0.5)) throw std::invalid_argument("phi: alpha must lie in (0, 1/2)");
}

/// Reduce z to (k, w) with w = z - k in the fundamental patch [-a, 1-a)^2.
inline void reduce(const Vector2d& z, double alpha, Vector2d& k, Vector2d& w) {
  for (int c = 0; c < 2; ++c) {
    k[c] = std::floor(z[c] + alpha);
    w[c] = z[c] - k[c];
  }
}

}  // namespace

int phi_piece(const Vector2d& z, double alpha) {
  check_alpha(alpha);
  Vector2d k, w;
  reduce(z, alpha, k, w);
  const bool x_small = w[0] < alpha;
  const bool y_small = w[1] < alpha;
  if (x_small && y_small) return 1;
  if (x_small) return 2;
  if (!y_small) return 3;
  return 4;
}

Vector2d phi(const Vector2d& z, double alpha) {
  check_alpha(alpha);
  Vector2d k, w;
  reduce(z, alpha, k, w);
  const double inv = 1.0 / (2.0 * alpha);
  const bool x_small = w[0] < alpha;
  const bool y_small = w[1] < alpha;
  if (x_small && y_small) return k + inv * w;                       // Z1
  if (x_small) return k + Vector2d(inv * w[0], 0.5);                // Z2
  if (!y_small) return k + Vector2d(0.5, 0.5);                      // Z3
  return k + Vector2d(0.5, inv * w[1]);                             // Z4
}

Matrix2d grad_phi(const Vector2d& z, double alpha) {
  const int piece = phi_piece(z, alpha);
  const double inv = 1.0 / (2.0 * alpha);
  Matrix2d g = Matrix2d::Zero();
  switch (piece) {
    case 1:
      g(0, 0) = inv;
      g(1, 1) = inv;
      break;
    case 2:
      g(0, 0) = inv;
      break;
    case 3:
      break;
    case 4:
      g(1, 1) = inv;
      break;
  }
  return g;
}

std::array<double, 4> phi_piece_norms(double alpha) {
  check_alpha(alpha);
  const double inv = 1.0 / (2.0 * alpha);
  return {std::sqrt(2.0) * inv, inv, 0.0, inv};
}

ApproxIdentity ApproxIdentity::make(double alpha, double eps, const Box2& U) {
  check_alpha(alpha);
  if (!(eps > 0.0)) throw std::invalid_argument("ApproxIdentity: epsilon must be positive");
  if (!(U.width(0) > 0.0 && U.width(1) > 0.0)) {
    throw std::invalid_argument("ApproxIdentity: window must have positive extent");
  }
  ApproxIdentity id;
  id.alpha_ = alpha;
  id.eps_ = eps;
  id.U_ = U;
  id.d_ = Vector2d::Zero();

  // phi - id is cell-periodic, so its mean over any window whose extents are
  // whole multiples of eps vanishes and d_eps = 0 exactly.
  auto whole_cells = [&](int axis) {
    const double n = U.width(axis) / eps;
    return std::abs(n - std::round(n)) < 1e-9;
  };
  if (whole_cells(0) && whole_cells(1)) return id;

  // Otherwise integrate phi_eps - id with kink-aligned panels (midpoint rule is
  // exact on each affine piece).
  std::vector<double> bx, by;
  const long i0 = static_cast<long>(std::floor(U.lo[0] / eps)) - 1;
  const long i1 = static_cast<long>(std::ceil(U.hi[0] / eps)) + 1;
  for (long n = i0; n <= i1; ++n) {
    for (double off : {-alpha, 0.0, alpha}) {
      bx.push_back(eps * (static_cast<double>(n) + off));
      by.push_back(eps * (static_cast<double>(n) + off));
    }
  }
  const Quadrature2 quad = Quadrature2::on(U, 4, 4, bx, by);
  Vector2d mean_gap = Vector2d::Zero();
  for (int c = 0; c < 2; ++c) {
    mean_gap[c] = quad.integrate([&](const Vector2d& x) -> double {
      const Vector2d p = eps * phi(x / eps, alpha);
      return x[c] - p[c];
    });
  }
  id.d_ = mean_gap / U.area();
  return id;
}

Vector2d ApproxIdentity::map(const Vector2d& x) const {
  return eps_ * phi(x / eps_, alpha_) + d_;
}

Matrix2d ApproxIdentity::grad(const Vector2d& x) const { return grad_phi(x / eps_, alpha_); }

Box2 ApproxIdentity::image_square(CellIndex k) const {
  const Vector2d c(static_cast<double>(k.i), static_cast<double>(k.j));
  return Box2{eps_ * (c + Vector2d(-0.5, -0.5)) + d_, eps_ * (c + Vector2d(0.5, 0.5)) + d_};
}

Vector2d ApproxIdentity::collapsed(CellIndex k) const {
  return eps_ * Vector2d(static_cast<double>(k.i) + 0.5, static_cast<double>(k.j) + 0.5) + d_;
}

PhiReport verify_properties(const ApproxIdentity& id, const FiberLayout& layout,
                            int samples_per_cell, std::uint64_t seed) {
  if (std::abs(id.epsilon() - layout.epsilon()) > 1e-12 * layout.epsilon() ||
      std::abs(id.alpha() - layout.alpha()) > 1e-12) {
    throw std::invalid_argument("verify_properties: map and layout disagree on eps/alpha");
  }
  PhiReport rep;
  rep.piece_norms = phi_piece_norms(id.alpha());
  rep.grad_sup = *std::max_element(rep.piece_norms.begin(), rep.piece_norms.end());
  rep.grad_bound = 1.0 / id.alpha();

  const Box2& U = id.window();
  const double eps = id.epsilon();
  const std::vector<CellIndex> cells = interior_cells(layout, U);
  rep.cells_checked = static_cast<int>(cells.size());

  // (ii) bitwise constancy on every fiber cross-section.
  rep.constant_on_fibers = true;
  rep.fibers_checked = 0;
  Rng rng(seed);
  for (CellIndex k : cells) {
    const Box2 s = layout.inner_square(k);
    const Vector2d ref = id.map(layout.center(k));
    bool ok = true;
    auto same_bits = [&](const Vector2d& x) {
      const Vector2d v = id.map(x);
      return std::memcmp(v.data(), ref.data(), sizeof(double) * 2) == 0;
    };
    const double inset = 1e-9 * eps;
    for (const Vector2d& corner :
         {Vector2d(s.lo[0] + inset, s.lo[1] + inset), Vector2d(s.hi[0] - inset, s.lo[1] + inset),
          Vector2d(s.lo[0] + inset, s.hi[1] - inset), Vector2d(s.hi[0] - inset, s.hi[1] - inset)}) {
      ok = ok && same_bits(corner);
    }
    for (int n = 0; n < samples_per_cell; ++n) {
      const Vector2d x(rng.uniform(s.lo[0], s.hi[0]), rng.uniform(s.lo[1], s.hi[1]));
      ok = ok && same_bits(x);
    }
    rep.constant_on_fibers = rep.constant_on_fibers && ok;
    ++rep.fibers_checked;
  }

  // (iii) images of distinct translated cells are disjoint half-open squares;
  // samples of each translated cell land in the predicted square.
  rep.images_contained = true;
  for (CellIndex k : cells) {
    const Box2 img = id.image_square(k);
    const Vector2d lo = eps * Vector2d(static_cast<double>(k.i) - id.alpha(),
                                       static_cast<double>(k.j) - id.alpha());
    const Vector2d hi = eps * Vector2d(static_cast<double>(k.i) + 1.0 - id.alpha(),
                                       static_cast<double>(k.j) + 1.0 - id.alpha());
    for (int n = 0; n < samples_per_cell; ++n) {
      Vector2d x(rng.uniform(lo[0], hi[0]), rng.uniform(lo[1], hi[1]));
      x[0] = std::min(x[0], hi[0] - 1e-12 * eps);
      x[1] = std::min(x[1], hi[1] - 1e-12 * eps);
      const Vector2d y = id.map(x);
      const double tol = 1e-12 * eps;
      if (!(y[0] >= img.lo[0] - tol && y[0] < img.hi[0] + tol && y[1] >= img.lo[1] - tol &&
            y[1] < img.hi[1] + tol)) {
        rep.images_contained = false;
      }
    }
  }
  rep.images_disjoint = true;
  for (std::size_t a = 0; a < cells.size() && rep.images_disjoint; ++a) {
    for (std::size_t b = a + 1; b < cells.size(); ++b) {
      if (rect_intersection_area(id.image_square(cells[a]), id.image_square(cells[b])) > 0.0) {
        rep.images_disjoint = false;
        break;
      }
    }
  }

  // (iv) sup |phi_eps - id| over U.  The gap is affine on each piece, so the
  // sup is attained at a piece vertex, a kink/boundary intersection, or a
  // window corner; enumerate them all.
  std::vector<double> xs, ys;
  const long i0 = static_cast<long>(std::floor(U.lo[0] / eps)) - 1;
  const long i1 = static_cast<long>(std::ceil(U.hi[0] / eps)) + 1;
  for (long n = i0; n <= i1; ++n) {
    for (double off : {-id.alpha(), 0.0, id.alpha()}) {
      const double v = eps * (static_cast<double>(n) + off);
      if (v >= U.lo[0] && v <= U.hi[0]) xs.push_back(v);
      if (v >= U.lo[1] && v <= U.hi[1]) ys.push_back(v);
    }
  }
  xs.push_back(U.lo[0]);
  xs.push_back(U.hi[0]);
  ys.push_back(U.lo[1]);
  ys.push_back(U.hi[1]);
  double sup = 0.0;
  for (double x : xs) {
    for (double y : ys) {
      const Vector2d q(x, y);
      sup = std::max(sup, (id.map(q) - q).norm());
    }
  }
  rep.sup_distance = sup;
  return rep;
}

}  // namespace fiberlab
