#include "fiberlab/sequence_builder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace fiberlab {

namespace {

Vector2d clamp_to(const Box2& box, const Vector2d& v) {
  return Vector2d(std::clamp(v.x(), box.lo.x(), box.hi.x()),
                  std::clamp(v.y(), box.lo.y(), box.hi.y()));
}

}  // namespace

Vector2d ApproxDeformation::collapse_argument(const Vector2d& xp) const {
  return clamp_to(rf.domain.omega, id.map(xp) + a);
}

VectorField3 ApproxDeformation::field() const {
  VectorField3 u;
  u.kind = VectorField3::Kind::closed_form;
  u.domain = rf.domain;
  const ApproxDeformation self = *this;
  u.value = [self](const Vector3d& x) -> Vector3d {
    const Vector2d y = self.collapse_argument(Vector2d(x.x(), x.y()));
    return self.rf.R(y) * x + self.rf.b(y);
  };
  if (rf.dR && rf.db) {
    u.gradient = [self](const Vector3d& x) -> Matrix3d {
      const Vector2d xp(x.x(), x.y());
      const Vector2d raw = self.id.map(xp) + self.a;
      const Box2& w = self.rf.domain.omega;
      const Vector2d y = clamp_to(w, raw);
      Matrix2d J = self.id.grad(xp);
      for (int r = 0; r < 2; ++r) {
        if (!(raw[r] > w.lo[r] && raw[r] < w.hi[r])) J.row(r).setZero();
      }
      const Matrix3d R = self.rf.R(y);
      const auto dRy = self.rf.dR(y);
      const auto dby = self.rf.db(y);
      Matrix3d g;
      for (int i = 0; i < 2; ++i) {
        g.col(i) = (dRy[0] * J(0, i) + dRy[1] * J(1, i)) * x + R.col(i) +
                   dby[0] * J(0, i) + dby[1] * J(1, i);
      }
      g.col(2) = R.col(2);
      return g;
    };
  }
  return u;
}

Vector2d ApproxDeformation::collapsed_point(CellIndex k) const {
  return clamp_to(rf.domain.omega, id.collapsed(k) + a);
}

Matrix3d ApproxDeformation::fiber_rotation(CellIndex k) const { return rf.R(collapsed_point(k)); }

ApproxDeformation build(const RotationForm& rf, const FiberLayout& layout,
                        const ApproxIdentity& id, const Vector2d& a) {
  const double eps = layout.epsilon();
  if (!(a.norm() < eps))
    throw std::invalid_argument("build: translation must satisfy |a| < eps");
  if (std::abs(id.epsilon() - eps) > 1e-12 * eps ||
      std::abs(id.alpha() - layout.alpha()) > 1e-12)
    throw std::invalid_argument("build: identity-approximation and layout parameters disagree");
  return ApproxDeformation{rf, layout, id, a};
}

TranslationChoice select_translation(const RotationForm& rf, const FiberLayout& layout,
                                     const ApproxIdentity& id, double p, int M,
                                     std::uint64_t seed, std::optional<QuadratureSpec> spec) {
  if (M < 1) throw std::invalid_argument("select_translation: M >= 1 required");
  const double eps = layout.epsilon();
  const QuadratureSpec qs = spec ? *spec : QuadratureSpec::resolve(rf.domain, eps);
  Rng rng(Rng::mix(seed, 0x7261'6e73'6c61'7465ull,
                   std::bit_cast<std::uint64_t>(eps)));  // per-(seed, eps) stream

  TranslationChoice choice;
  choice.sample_norms.reserve(static_cast<std::size_t>(M));
  for (int m = 0; m < M; ++m) {
    const Vector2d a = rng.disk(eps);
    const ApproxDeformation ad = build(rf, layout, id, a);
    const VectorField3 u = ad.field();
    const double norm = lp_norm_scalar([&u](const Vector3d& x) { return grad(u, x).norm(); }, p,
                                       Region::whole(), u.domain, qs, &layout);
    choice.sample_norms.push_back(norm);
    choice.mean += norm;
    if (m == 0 || norm < choice.grad_norm) {
      choice.grad_norm = norm;
      choice.a = a;
    }
  }
  choice.mean /= static_cast<double>(M);
  return choice;
}

Vector3d BendingSequence::gamma(double t) const {
  return rho * Vector3d(std::sin(t / rho), 0.0, 1.0 - std::cos(t / rho));
}
Vector3d BendingSequence::gamma_prime(double t) const {
  return Vector3d(std::cos(t / rho), 0.0, std::sin(t / rho));
}
Vector3d BendingSequence::nu(double t) const {
  return Vector3d(std::sin(t / rho), 0.0, -std::cos(t / rho));  // e2 x gamma'
}
Vector3d BendingSequence::nu_prime(double t) const { return gamma_prime(t) / rho; }

bool BendingSequence::rigid_layer(double x1) const {
  const double q = x1 / epsilon;
  const double fr = q - std::floor(q);
  return fr >= alpha && fr < 1.0 - alpha;
}

std::vector<double> BendingSequence::layer_breaks() const {
  std::vector<double> out;
  const double lo = domain.omega.lo.x();
  const double hi = domain.omega.hi.x();
  const long n0 = static_cast<long>(std::floor(lo / epsilon)) - 1;
  const long n1 = static_cast<long>(std::ceil(hi / epsilon)) + 1;
  for (long n = n0; n <= n1; ++n) {
    for (double off : {alpha, 1.0 - alpha}) {
      const double x = epsilon * (static_cast<double>(n) + off);
      if (x > lo && x < hi) out.push_back(x);
    }
  }
  return out;
}

VectorField3 BendingSequence::u_eps() const {
  VectorField3 u;
  u.kind = VectorField3::Kind::closed_form;
  u.domain = domain;
  const BendingSequence self = *this;
  const auto locate = [self](double x1, long& j, double& lambda, bool& on_layer, long& i) {
    const double q = x1 / self.epsilon;
    i = static_cast<long>(std::floor(q));
    const double fr = q - static_cast<double>(i);
    if (fr >= self.alpha && fr < 1.0 - self.alpha) {
      on_layer = true;
      j = 0;
      lambda = 0.0;
    } else {
      on_layer = false;
      j = (fr < self.alpha) ? i : i + 1;
      lambda = (q - static_cast<double>(j) + self.alpha) / (2.0 * self.alpha);
    }
  };
  u.value = [self, locate](const Vector3d& x) -> Vector3d {
    long j = 0, i = 0;
    double lambda = 0.0;
    bool on_layer = false;
    locate(x.x(), j, lambda, on_layer, i);
    const Vector3d e1(1, 0, 0), e2(0, 1, 0);
    if (on_layer) {
      const double anchor = self.epsilon * static_cast<double>(i);
      return anchor * e1 + x.y() * e2 + self.gamma(x.z()) + (x.x() - anchor) * self.nu(x.z());
    }
    const double span = (1.0 - self.alpha) * (1.0 - lambda) + self.alpha * lambda;
    return x.y() * e2 + self.gamma(x.z()) +
           self.epsilon * ((static_cast<double>(j) - 1.0 + lambda) * e1 + span * self.nu(x.z()));
  };
  u.gradient = [self, locate](const Vector3d& x) -> Matrix3d {
    long j = 0, i = 0;
    double lambda = 0.0;
    bool on_layer = false;
    locate(x.x(), j, lambda, on_layer, i);
    Matrix3d g;
    g.col(1) = Vector3d(0, 1, 0);
    if (on_layer) {
      const double anchor = self.epsilon * static_cast<double>(i);
      g.col(0) = self.nu(x.z());
      g.col(2) = self.gamma_prime(x.z()) + (x.x() - anchor) * self.nu_prime(x.z());
    } else {
      g.col(0) = (Vector3d(1, 0, 0) + (2.0 * self.alpha - 1.0) * self.nu(x.z())) /
                 (2.0 * self.alpha);
      const double span = (1.0 - self.alpha) * (1.0 - lambda) + self.alpha * lambda;
      g.col(2) = self.gamma_prime(x.z()) + self.epsilon * span * self.nu_prime(x.z());
    }
    return g;
  };
  return u;
}

VectorField3 BendingSequence::limit() const {
  VectorField3 u;
  u.kind = VectorField3::Kind::closed_form;
  u.domain = domain;
  const BendingSequence self = *this;
  u.value = [self](const Vector3d& x) -> Vector3d {
    return Vector3d(x.x(), x.y(), 0.0) + self.gamma(x.z());
  };
  u.gradient = [self](const Vector3d& x) -> Matrix3d {
    Matrix3d g = Matrix3d::Identity();
    g.col(2) = self.gamma_prime(x.z());
    return g;
  };
  u.hessian = [self](const Vector3d& x, int i, int j) -> Vector3d {
    if (i == 2 && j == 2) {
      const double t = x.z() / self.rho;
      return Vector3d(-std::sin(t), 0.0, std::cos(t)) / self.rho;
    }
    return Vector3d::Zero();
  };
  return u;
}

BendingSequence bending_counterexample(double rho, double eps, double alpha,
                                       const Domain3& domain) {
  if (!(rho > domain.height / M_PI))
    throw std::invalid_argument("bending_counterexample: need rho > L/pi for an injective arc");
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("bending_counterexample: eps must lie in (0,1)");
  if (!(alpha > 0.0 && alpha < 0.5))
    throw std::invalid_argument("bending_counterexample: alpha must lie in (0, 1/2)");
  return BendingSequence{rho, eps, alpha, domain};
}

VectorField3 perturb_beta(const ApproxDeformation& ad, double beta, double p,
                          const VectorField3* psi) {
  if (!(beta > 0.0)) throw std::invalid_argument("perturb_beta: beta > 0 required");
  if (!(p >= 1.0)) throw std::invalid_argument("perturb_beta: p >= 1 required");
  const VectorField3 base = ad.field();
  const VectorField3 bump = psi ? *psi : default_beta_bump(ad.rf.domain);
  const double scale = std::pow(ad.layout.epsilon(), beta / p);
  VectorField3 u;
  u.kind = VectorField3::Kind::closed_form;
  u.domain = base.domain;
  u.value = [base, bump, scale](const Vector3d& x) -> Vector3d {
    return base.value(x) + scale * bump.value(x);
  };
  u.gradient = [base, bump, scale](const Vector3d& x) -> Matrix3d {
    return grad(base, x) + scale * grad(bump, x);
  };
  return u;
}

VectorField3 default_beta_bump(const Domain3& domain) {
  const double w = domain.omega.width(0);
  const double k = M_PI / w;
  VectorField3 psi;
  psi.kind = VectorField3::Kind::closed_form;
  psi.domain = domain;
  psi.value = [k](const Vector3d& x) { return Vector3d(0.0, 0.0, std::sin(k * x.x()) / k); };
  psi.gradient = [k](const Vector3d& x) {
    Matrix3d g = Matrix3d::Zero();
    g(2, 0) = std::cos(k * x.x());
    return g;
  };
  psi.hessian = [k](const Vector3d& x, int i, int j) -> Vector3d {
    if (i == 0 && j == 0) return Vector3d(0.0, 0.0, -k * std::sin(k * x.x()));
    return Vector3d::Zero();
  };
  return psi;
}

PlaneGrid PlaneGrid::make(const Box2& domain, int nx, int ny, int comps) {
  if (nx < 2 || ny < 2 || comps < 1)
    throw std::invalid_argument("PlaneGrid: need nx, ny >= 2 and comps >= 1");
  PlaneGrid g;
  g.domain = domain;
  g.nx = nx;
  g.ny = ny;
  g.comps = comps;
  g.values.assign(static_cast<std::size_t>(nx) * ny * comps, 0.0);
  return g;
}

double& PlaneGrid::at(int ix, int iy, int c) {
  return values[(static_cast<std::size_t>(ix) * ny + iy) * comps + c];
}
double PlaneGrid::at(int ix, int iy, int c) const {
  return values[(static_cast<std::size_t>(ix) * ny + iy) * comps + c];
}

Eigen::VectorXd PlaneGrid::sample(const Vector2d& x) const {
  const double tx = std::clamp((x.x() - domain.lo.x()) / domain.width(0) * (nx - 1), 0.0,
                               static_cast<double>(nx - 1));
  const double ty = std::clamp((x.y() - domain.lo.y()) / domain.width(1) * (ny - 1), 0.0,
                               static_cast<double>(ny - 1));
  const int ix = std::min(static_cast<int>(tx), nx - 2);
  const int iy = std::min(static_cast<int>(ty), ny - 2);
  const double fx = tx - ix, fy = ty - iy;
  Eigen::VectorXd out(comps);
  for (int c = 0; c < comps; ++c) {
    const double v00 = at(ix, iy, c), v10 = at(ix + 1, iy, c);
    const double v01 = at(ix, iy + 1, c), v11 = at(ix + 1, iy + 1, c);
    out[c] = (1 - fx) * ((1 - fy) * v00 + fy * v01) + fx * ((1 - fy) * v10 + fy * v11);
  }
  return out;
}

PlaneGrid gaussian_smooth(const PlaneGrid& grid, double sigma_nodes) {
  if (sigma_nodes <= 0.0) return grid;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma_nodes)));
  std::vector<double> kernel(static_cast<std::size_t>(radius) + 1);
  for (int d = 0; d <= radius; ++d)
    kernel[static_cast<std::size_t>(d)] = std::exp(-0.5 * d * d / (sigma_nodes * sigma_nodes));

  PlaneGrid tmp = grid;
  PlaneGrid out = grid;
  // Pass along x, then along y; weights renormalized over in-range taps.
  for (int iy = 0; iy < grid.ny; ++iy)
    for (int ix = 0; ix < grid.nx; ++ix)
      for (int c = 0; c < grid.comps; ++c) {
        double num = 0.0, den = 0.0;
        for (int d = -radius; d <= radius; ++d) {
          const int sx = ix + d;
          if (sx < 0 || sx >= grid.nx) continue;
          const double w = kernel[static_cast<std::size_t>(std::abs(d))];
          num += w * grid.at(sx, iy, c);
          den += w;
        }
        tmp.at(ix, iy, c) = num / den;
      }
  for (int iy = 0; iy < grid.ny; ++iy)
    for (int ix = 0; ix < grid.nx; ++ix)
      for (int c = 0; c < grid.comps; ++c) {
        double num = 0.0, den = 0.0;
        for (int d = -radius; d <= radius; ++d) {
          const int sy = iy + d;
          if (sy < 0 || sy >= grid.ny) continue;
          const double w = kernel[static_cast<std::size_t>(std::abs(d))];
          num += w * tmp.at(ix, sy, c);
          den += w;
        }
        out.at(ix, iy, c) = num / den;
      }
  return out;
}

RotationForm rotation_form_from_samples(const Domain3& domain, const PlaneGrid& rotations,
                                        const PlaneGrid& offsets, double sigma_nodes) {
  if (rotations.comps != 9)
    throw std::invalid_argument("rotation_form_from_samples: rotation grid needs 9 components");
  if (offsets.comps != 3)
    throw std::invalid_argument("rotation_form_from_samples: offset grid needs 3 components");
  const PlaneGrid Rg = gaussian_smooth(rotations, sigma_nodes);
  const PlaneGrid bg = gaussian_smooth(offsets, sigma_nodes);
  const double hx = 0.5 * Rg.domain.width(0) / (Rg.nx - 1);
  const double hy = 0.5 * Rg.domain.width(1) / (Rg.ny - 1);

  RotationForm rf;
  rf.domain = domain;
  rf.R = [Rg](const Vector2d& p) -> Matrix3d {
    const Eigen::VectorXd v = Rg.sample(p);
    return Eigen::Map<const Matrix3d>(v.data());  // column-major entries
  };
  rf.b = [bg](const Vector2d& p) -> Vector3d {
    const Eigen::VectorXd v = bg.sample(p);
    return Vector3d(v[0], v[1], v[2]);
  };
  auto rot = rf.R;
  auto off = rf.b;
  rf.dR = [rot, hx, hy](const Vector2d& p) {
    return std::array<Matrix3d, 2>{
        (rot(p + Vector2d(hx, 0)) - rot(p - Vector2d(hx, 0))) / (2.0 * hx),
        (rot(p + Vector2d(0, hy)) - rot(p - Vector2d(0, hy))) / (2.0 * hy)};
  };
  rf.db = [off, hx, hy](const Vector2d& p) {
    return std::array<Vector3d, 2>{
        (off(p + Vector2d(hx, 0)) - off(p - Vector2d(hx, 0))) / (2.0 * hx),
        (off(p + Vector2d(0, hy)) - off(p - Vector2d(0, hy))) / (2.0 * hy)};
  };
  return rf;
}

}  // namespace fiberlab
