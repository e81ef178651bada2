#include "fiberlab/limit_deformations.hpp"

#include <cmath>
#include <stdexcept>

namespace fiberlab {

namespace {

Vector2d plane(const Vector3d& x) { return Vector2d(x.x(), x.y()); }

std::array<Vector3d, 2> fd_plane_partials(const std::function<Vector3d(const Vector2d&)>& f,
                                          const Vector2d& x) {
  const double h = 1e-6 * std::max(1.0, x.cwiseAbs().maxCoeff());
  std::array<Vector3d, 2> out;
  for (int i = 0; i < 2; ++i) {
    Vector2d hi = x, lo = x;
    hi[i] += h;
    lo[i] -= h;
    out[i] = (f(hi) - f(lo)) / (2.0 * h);
  }
  return out;
}

}  // namespace

VectorField3 DirectorForm::deformation() const {
  VectorField3 u;
  u.kind = VectorField3::Kind::closed_form;
  u.domain = domain;
  auto sig = sigma;
  auto drift = d;
  u.value = [sig, drift](const Vector3d& x) { return x.z() * sig(plane(x)) + drift(plane(x)); };
  if (dsigma && dd) {
    auto ds = dsigma;
    auto dD = dd;
    u.gradient = [sig, ds, dD](const Vector3d& x) {
      const Vector2d p = plane(x);
      const auto s1 = ds(p);
      const auto d1 = dD(p);
      Matrix3d g;
      g.col(0) = x.z() * s1[0] + d1[0];
      g.col(1) = x.z() * s1[1] + d1[1];
      g.col(2) = sig(p);
      return g;
    };
  }
  if (ddsigma && ddd && dsigma) {
    auto ds = dsigma;
    auto dds = ddsigma;
    auto dDD = ddd;
    u.hessian = [ds, dds, dDD](const Vector3d& x, int i, int j) -> Vector3d {
      if (i > j) std::swap(i, j);
      const Vector2d p = plane(x);
      if (j == 2) {
        if (i == 2) return Vector3d::Zero();  // d33 u = 0
        return ds(p)[i];                      // d3 di u = di sigma
      }
      const auto s2 = dds(p);
      const auto dd2 = dDD(p);
      const int idx = (i == j) ? i : 2;  // (11, 22, 12)
      return x.z() * s2[idx] + dd2[idx];
    };
  }
  return u;
}

std::array<Vector3d, 2> DirectorForm::sigma_partials(const Vector2d& x) const {
  if (dsigma) return dsigma(x);
  return fd_plane_partials(sigma, x);
}

std::array<Vector3d, 2> DirectorForm::d_partials(const Vector2d& x) const {
  if (dd) return dd(x);
  return fd_plane_partials(d, x);
}

VectorField3 RotationForm::deformation() const {
  VectorField3 u;
  u.kind = VectorField3::Kind::closed_form;
  u.domain = domain;
  auto rot = R;
  auto shift = b;
  u.value = [rot, shift](const Vector3d& x) -> Vector3d {
    return rot(plane(x)) * x + shift(plane(x));
  };
  if (dR && db) {
    auto dr = dR;
    auto dbv = db;
    u.gradient = [rot, dr, dbv](const Vector3d& x) {
      const Vector2d p = plane(x);
      const Matrix3d r = rot(p);
      const auto r1 = dr(p);
      const auto b1 = dbv(p);
      Matrix3d g;
      g.col(0) = r1[0] * x + r.col(0) + b1[0];
      g.col(1) = r1[1] * x + r.col(1) + b1[1];
      g.col(2) = r.col(2);
      return g;
    };
  }
  return u;
}

RotationForm RotationForm::constant(const Domain3& domain, const Matrix3d& R0, const Vector3d& b0) {
  if (((R0.transpose() * R0) - Matrix3d::Identity()).norm() > 1e-10 || R0.determinant() < 0.0)
    throw std::invalid_argument("RotationForm::constant: R0 is not a rotation");
  RotationForm rf;
  rf.domain = domain;
  rf.R = [R0](const Vector2d&) { return R0; };
  rf.b = [b0](const Vector2d&) { return b0; };
  rf.dR = [](const Vector2d&) {
    return std::array<Matrix3d, 2>{Matrix3d::Zero(), Matrix3d::Zero()};
  };
  rf.db = [](const Vector2d&) {
    return std::array<Vector3d, 2>{Vector3d::Zero(), Vector3d::Zero()};
  };
  return rf;
}

Domain3 default_domain(PresetKind kind) {
  switch (kind) {
    case PresetKind::twist:
      return Domain3{Box2{{0.0, 0.0}, {4.0, 1.0}}, 1.0};
    case PresetKind::trophy:
      return Domain3{Box2{{-1.0, -1.0}, {1.0, 1.0}}, 4.0};
    default:
      return Domain3{Box2{{-1.0, -1.0}, {1.0, 1.0}}, 1.0};
  }
}

std::string preset_name(PresetKind kind) {
  switch (kind) {
    case PresetKind::paraboloid: return "paraboloid";
    case PresetKind::shear: return "shear";
    case PresetKind::twist: return "twist";
    case PresetKind::tyre: return "tyre";
    case PresetKind::hedgehog: return "hedgehog";
    case PresetKind::trophy: return "trophy";
    case PresetKind::rigid_motion: return "rigid";
    case PresetKind::bending_limit: return "bending_limit";
  }
  return "unknown";
}

std::optional<PresetKind> preset_from_name(const std::string& name) {
  if (name == "paraboloid") return PresetKind::paraboloid;
  if (name == "shear") return PresetKind::shear;
  if (name == "twist") return PresetKind::twist;
  if (name == "tyre") return PresetKind::tyre;
  if (name == "hedgehog") return PresetKind::hedgehog;
  if (name == "trophy") return PresetKind::trophy;
  if (name == "rigid") return PresetKind::rigid_motion;
  if (name == "bending_limit") return PresetKind::bending_limit;
  return std::nullopt;
}

DirectorForm preset(const PresetSpec& spec, const Domain3& domain) {
  DirectorForm df;
  df.domain = domain;
  switch (spec.kind) {
    case PresetKind::paraboloid: {
      df.sigma = [](const Vector2d&) { return Vector3d(0, 0, 1); };
      df.d = [](const Vector2d& p) {
        return Vector3d(p.x(), p.y(), -p.x() * p.x() - p.y() * p.y());
      };
      df.dsigma = [](const Vector2d&) {
        return std::array<Vector3d, 2>{Vector3d::Zero(), Vector3d::Zero()};
      };
      df.dd = [](const Vector2d& p) {
        return std::array<Vector3d, 2>{Vector3d(1, 0, -2.0 * p.x()), Vector3d(0, 1, -2.0 * p.y())};
      };
      df.ddsigma = [](const Vector2d&) {
        return std::array<Vector3d, 3>{Vector3d::Zero(), Vector3d::Zero(), Vector3d::Zero()};
      };
      df.ddd = [](const Vector2d&) {
        return std::array<Vector3d, 3>{Vector3d(0, 0, -2), Vector3d(0, 0, -2), Vector3d::Zero()};
      };
      break;
    }
    case PresetKind::shear: {
      const double g = spec.gamma;
      df.sigma = [](const Vector2d&) { return Vector3d(0, 0, 1); };
      df.d = [g](const Vector2d& p) { return Vector3d(p.x(), g * p.x() + p.y(), 0.0); };
      df.dsigma = [](const Vector2d&) {
        return std::array<Vector3d, 2>{Vector3d::Zero(), Vector3d::Zero()};
      };
      df.dd = [g](const Vector2d&) {
        return std::array<Vector3d, 2>{Vector3d(1, g, 0), Vector3d(0, 1, 0)};
      };
      df.ddsigma = [](const Vector2d&) {
        return std::array<Vector3d, 3>{Vector3d::Zero(), Vector3d::Zero(), Vector3d::Zero()};
      };
      df.ddd = [](const Vector2d&) {
        return std::array<Vector3d, 3>{Vector3d::Zero(), Vector3d::Zero(), Vector3d::Zero()};
      };
      break;
    }
    case PresetKind::twist: {
      const double w = 1.0 / M_PI;  // angle t = x1 / pi
      df.sigma = [w](const Vector2d& p) {
        const double t = p.x() * w;
        return Vector3d(0.0, -std::sin(t), std::cos(t));
      };
      df.d = [w](const Vector2d& p) {
        const double t = p.x() * w;
        return Vector3d(p.x(), p.y() * std::cos(t), p.y() * std::sin(t));
      };
      df.dsigma = [w](const Vector2d& p) {
        const double t = p.x() * w;
        return std::array<Vector3d, 2>{Vector3d(0.0, -w * std::cos(t), -w * std::sin(t)),
                                       Vector3d::Zero()};
      };
      df.dd = [w](const Vector2d& p) {
        const double t = p.x() * w;
        return std::array<Vector3d, 2>{
            Vector3d(1.0, -w * p.y() * std::sin(t), w * p.y() * std::cos(t)),
            Vector3d(0.0, std::cos(t), std::sin(t))};
      };
      df.ddsigma = [w](const Vector2d& p) {
        const double t = p.x() * w;
        return std::array<Vector3d, 3>{Vector3d(0.0, w * w * std::sin(t), -w * w * std::cos(t)),
                                       Vector3d::Zero(), Vector3d::Zero()};
      };
      df.ddd = [w](const Vector2d& p) {
        const double t = p.x() * w;
        return std::array<Vector3d, 3>{
            Vector3d(0.0, -w * w * p.y() * std::cos(t), -w * w * p.y() * std::sin(t)),
            Vector3d::Zero(), Vector3d(0.0, -w * std::sin(t), w * std::cos(t))};
      };
      break;
    }
    case PresetKind::tyre: {
      const double r = spec.r;
      const double x1max = std::max(std::abs(domain.omega.lo.x()), std::abs(domain.omega.hi.x()));
      if (r <= x1max)
        throw std::invalid_argument("preset(tyre): radius must exceed max |x1| on the domain");
      df.sigma = [r](const Vector2d& p) {
        const double s = std::sqrt(r * r - p.x() * p.x());
        return Vector3d(p.x() / r, 0.0, s / r);
      };
      df.d = [r](const Vector2d& p) {
        const double s = std::sqrt(r * r - p.x() * p.x());
        return Vector3d(p.x(), p.y() + std::exp(p.y()), s);
      };
      df.dsigma = [r](const Vector2d& p) {
        const double s = std::sqrt(r * r - p.x() * p.x());
        return std::array<Vector3d, 2>{Vector3d(1.0 / r, 0.0, -p.x() / (s * r)), Vector3d::Zero()};
      };
      df.dd = [r](const Vector2d& p) {
        const double s = std::sqrt(r * r - p.x() * p.x());
        return std::array<Vector3d, 2>{Vector3d(1.0, 0.0, -p.x() / s),
                                       Vector3d(0.0, 1.0 + std::exp(p.y()), 0.0)};
      };
      df.ddsigma = [r](const Vector2d& p) {
        const double s = std::sqrt(r * r - p.x() * p.x());
        const double spp = -r * r / (s * s * s);
        return std::array<Vector3d, 3>{Vector3d(0.0, 0.0, spp / r), Vector3d::Zero(),
                                       Vector3d::Zero()};
      };
      df.ddd = [r](const Vector2d& p) {
        const double s = std::sqrt(r * r - p.x() * p.x());
        const double spp = -r * r / (s * s * s);
        return std::array<Vector3d, 3>{Vector3d(0.0, 0.0, spp),
                                       Vector3d(0.0, std::exp(p.y()), 0.0), Vector3d::Zero()};
      };
      break;
    }
    case PresetKind::hedgehog: {
      df.sigma = [](const Vector2d& p) {
        const double w = std::sqrt(4.0 * p.squaredNorm() + 1.0);
        return Vector3d(2.0 * p.x() / w, 2.0 * p.y() / w, 1.0 / w);
      };
      df.d = [](const Vector2d& p) {
        return Vector3d(p.x(), p.y(), -p.x() * p.x() - p.y() * p.y());
      };
      df.dsigma = [](const Vector2d& p) {
        const Vector3d n(2.0 * p.x(), 2.0 * p.y(), 1.0);
        const double w = n.norm();
        const double w3 = w * w * w;
        const Vector3d n1(2.0, 0.0, 0.0), n2(0.0, 2.0, 0.0);
        return std::array<Vector3d, 2>{n1 / w - n * (4.0 * p.x() / w3),
                                       n2 / w - n * (4.0 * p.y() / w3)};
      };
      df.dd = [](const Vector2d& p) {
        return std::array<Vector3d, 2>{Vector3d(1, 0, -2.0 * p.x()), Vector3d(0, 1, -2.0 * p.y())};
      };
      break;
    }
    case PresetKind::trophy: {
      df.sigma = [](const Vector2d& p) {
        const double w = std::sqrt(2.0 * (p.squaredNorm() + 1.0));
        return Vector3d((-p.x() - p.y()) / w, (p.x() - p.y()) / w, std::sqrt(2.0) / w);
      };
      df.d = [](const Vector2d& p) { return Vector3d(p.x(), p.y(), 0.0); };
      df.dsigma = [](const Vector2d& p) {
        const Vector3d n(-p.x() - p.y(), p.x() - p.y(), std::sqrt(2.0));
        const double w = std::sqrt(2.0 * (p.squaredNorm() + 1.0));
        const double w3 = w * w * w;
        const Vector3d n1(-1.0, 1.0, 0.0), n2(-1.0, -1.0, 0.0);
        return std::array<Vector3d, 2>{n1 / w - n * (2.0 * p.x() / w3),
                                       n2 / w - n * (2.0 * p.y() / w3)};
      };
      df.dd = [](const Vector2d&) {
        return std::array<Vector3d, 2>{Vector3d(1, 0, 0), Vector3d(0, 1, 0)};
      };
      break;
    }
    case PresetKind::rigid_motion: {
      const Matrix3d R0 = spec.R0;
      const Vector3d b0 = spec.b0;
      if (((R0.transpose() * R0) - Matrix3d::Identity()).norm() > 1e-10 || R0.determinant() < 0.0)
        throw std::invalid_argument("preset(rigid): R0 is not a rotation");
      df.sigma = [R0](const Vector2d&) -> Vector3d { return R0.col(2); };
      df.d = [R0, b0](const Vector2d& p) -> Vector3d {
        return p.x() * R0.col(0) + p.y() * R0.col(1) + b0;
      };
      df.dsigma = [](const Vector2d&) {
        return std::array<Vector3d, 2>{Vector3d::Zero(), Vector3d::Zero()};
      };
      df.dd = [R0](const Vector2d&) {
        return std::array<Vector3d, 2>{Vector3d(R0.col(0)), Vector3d(R0.col(1))};
      };
      df.ddsigma = [](const Vector2d&) {
        return std::array<Vector3d, 3>{Vector3d::Zero(), Vector3d::Zero(), Vector3d::Zero()};
      };
      df.ddd = [](const Vector2d&) {
        return std::array<Vector3d, 3>{Vector3d::Zero(), Vector3d::Zero(), Vector3d::Zero()};
      };
      break;
    }
    case PresetKind::bending_limit:
      throw std::invalid_argument(
          "preset(bending_limit): this limit has an x3-dependent fiber direction and no director "
          "form; build it with bending_counterexample()");
  }
  return df;
}

DirectorForm preset(PresetKind kind) {
  PresetSpec spec;
  spec.kind = kind;
  return preset(spec, default_domain(kind));
}

namespace {

Matrix3d lift_matrix(LiftKind kind, const Vector3d& s, double eta) {
  const double q2 = s.x() * s.x() + s.y() * s.y();
  if (!(q2 >= eta * eta))
    throw std::domain_error("lift: direction too close to a pole (sigma1^2 + sigma2^2 < eta^2)");
  const double q = std::sqrt(q2);
  Matrix3d m;
  m.col(2) = s;
  if (kind == LiftKind::horizontal)
    m.col(1) = Vector3d(-s.y(), s.x(), 0.0) / q;
  else
    m.col(1) = Vector3d(-s.x() * s.z(), -s.y() * s.z(), 1.0 - s.z() * s.z()) / q;
  m.col(0) = m.col(1).cross(m.col(2));
  return m;
}

}  // namespace

Matrix3d lift(LiftKind kind, const Vector3d& sigma, double eta) {
  return lift_matrix(kind, sigma, eta);
}
Matrix3d lift_R(const Vector3d& sigma, double eta) {
  return lift_matrix(LiftKind::horizontal, sigma, eta);
}
Matrix3d lift_S(const Vector3d& sigma, double eta) {
  return lift_matrix(LiftKind::vertical, sigma, eta);
}

std::pair<Matrix3d, Matrix3d> lift_with_derivative(LiftKind kind, const Vector3d& s,
                                                   const Vector3d& ds, double eta) {
  const Matrix3d m = lift_matrix(kind, s, eta);
  const double q2 = s.x() * s.x() + s.y() * s.y();
  const double q = std::sqrt(q2);
  const double dq = (s.x() * ds.x() + s.y() * ds.y()) / q;
  Vector3d v, dv;
  if (kind == LiftKind::horizontal) {
    v = Vector3d(-s.y(), s.x(), 0.0);
    dv = Vector3d(-ds.y(), ds.x(), 0.0);
  } else {
    v = Vector3d(-s.x() * s.z(), -s.y() * s.z(), 1.0 - s.z() * s.z());
    dv = Vector3d(-ds.x() * s.z() - s.x() * ds.z(), -ds.y() * s.z() - s.y() * ds.z(),
                  -2.0 * s.z() * ds.z());
  }
  Matrix3d dm;
  dm.col(2) = ds;
  dm.col(1) = dv / q - v * (dq / q2);
  dm.col(0) = dm.col(1).cross(m.col(2)) + m.col(1).cross(dm.col(2));
  return {m, dm};
}

namespace {

/// Rotation sending the unit vector v to e3 (minimal-angle; pi about e1 when v = -e3).
Matrix3d rotation_to_e3(const Vector3d& v) {
  const Vector3d e3(0, 0, 1);
  const double c = v.dot(e3);
  if (c < -1.0 + 1e-14) {
    Matrix3d m;
    m << 1, 0, 0, 0, -1, 0, 0, 0, -1;  // pi about e1
    return m;
  }
  const Vector3d axis = v.cross(e3);
  Matrix3d k;
  k << 0, -axis.z(), axis.y(), axis.z(), 0, -axis.x(), -axis.y(), axis.x(), 0;
  return Matrix3d::Identity() + k + k * k / (1.0 + c);
}

}  // namespace

const std::vector<Matrix3d>& pre_rotation_candidates() {
  static const std::vector<Matrix3d> cands = [] {
    std::vector<Vector3d> dirs;
    for (int axis = 0; axis < 3; ++axis)
      for (int sgn : {1, -1}) dirs.push_back(sgn * Vector3d::Unit(axis));
    for (int i = -1; i <= 1; ++i)
      for (int j = -1; j <= 1; ++j)
        for (int k = -1; k <= 1; ++k) {
          const int nz = std::abs(i) + std::abs(j) + std::abs(k);
          if (nz == 2) dirs.push_back(Vector3d(i, j, k).normalized());
        }
    for (int i : {-1, 1})
      for (int j : {-1, 1})
        for (int k : {-1, 1}) dirs.push_back(Vector3d(i, j, k).normalized());
    std::vector<Matrix3d> qs;
    qs.reserve(dirs.size());
    for (const auto& v : dirs) qs.push_back(rotation_to_e3(v));
    return qs;
  }();
  return cands;
}

Matrix3d select_pre_rotation(const DirectorForm& df, int grid, double eta) {
  const auto& cands = pre_rotation_candidates();
  const Box2& w = df.domain.omega;
  std::vector<Vector3d> samples;
  samples.reserve(static_cast<size_t>(grid) * grid);
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      const Vector2d p(w.lo.x() + (i + 0.5) / grid * w.width(0),
                       w.lo.y() + (j + 0.5) / grid * w.width(1));
      samples.push_back(df.sigma(p));
    }
  double best = -1.0;
  size_t best_idx = 0;
  for (size_t c = 0; c < cands.size(); ++c) {
    double worst = 2.0;
    for (const auto& s : samples) {
      const Vector3d qs = cands[c] * s;
      worst = std::min(worst, qs.x() * qs.x() + qs.y() * qs.y());
      if (worst <= best) break;
    }
    if (worst > best) {  // strict: first candidate wins ties
      best = worst;
      best_idx = c;
    }
  }
  if (best < eta * eta)
    throw std::domain_error(
        "select_pre_rotation: no candidate keeps the rotated directions away from the poles");
  return cands[best_idx];
}

RotationForm to_rotation_form(const DirectorForm& df, const LiftOptions& opts) {
  const Matrix3d Q =
      opts.pre_rotation ? *opts.pre_rotation : select_pre_rotation(df, opts.selection_grid, opts.eta);
  if (((Q.transpose() * Q) - Matrix3d::Identity()).norm() > 1e-10 || Q.determinant() < 0.0)
    throw std::invalid_argument("to_rotation_form: pre_rotation is not a rotation");
  const Matrix3d Qt = Q.transpose();
  const LiftKind kind = opts.kind;
  const double eta = opts.eta;

  RotationForm rf;
  rf.domain = df.domain;
  auto sig = df.sigma;
  rf.R = [Q, Qt, sig, kind, eta](const Vector2d& p) -> Matrix3d {
    return Qt * lift_matrix(kind, Q * sig(p), eta);
  };
  auto rot = rf.R;
  auto drift = df.d;
  rf.b = [rot, drift](const Vector2d& p) -> Vector3d {
    const Matrix3d r = rot(p);
    return drift(p) - p.x() * r.col(0) - p.y() * r.col(1);
  };

  const DirectorForm captured = df;
  rf.dR = [Q, Qt, captured, kind, eta](const Vector2d& p) {
    const Vector3d s = captured.sigma(p);
    const auto ds = captured.sigma_partials(p);
    std::array<Matrix3d, 2> out;
    for (int i = 0; i < 2; ++i) {
      auto [m, dm] = lift_with_derivative(kind, Q * s, Q * ds[i], eta);
      (void)m;
      out[i] = Qt * dm;
    }
    return out;
  };
  auto dR = rf.dR;
  rf.db = [rot, dR, captured](const Vector2d& p) {
    const Matrix3d r = rot(p);
    const auto r1 = dR(p);
    const auto d1 = captured.d_partials(p);
    return std::array<Vector3d, 2>{
        d1[0] - r.col(0) - p.x() * r1[0].col(0) - p.y() * r1[0].col(1),
        d1[1] - r.col(1) - p.x() * r1[1].col(0) - p.y() * r1[1].col(1)};
  };
  return rf;
}

MembershipReport membership_A0(const VectorField3& u, double tol, int n_plane, int n_axial) {
  MembershipReport rep;
  rep.tol = tol;
  const Box2& w = u.domain.omega;
  const double L = u.domain.height;
  for (int i = 0; i < n_plane; ++i)
    for (int j = 0; j < n_plane; ++j) {
      const Vector2d p(w.lo.x() + (i + 0.5) / n_plane * w.width(0),
                       w.lo.y() + (j + 0.5) / n_plane * w.width(1));
      Vector3d first;
      for (int k = 0; k < n_axial; ++k) {
        const double x3 = (n_axial == 1) ? 0.5 * L : L * k / (n_axial - 1);
        const Vector3d d3u = grad(u, Vector3d(p.x(), p.y(), x3)).col(2);
        rep.unit_deviation = std::max(rep.unit_deviation, std::abs(d3u.norm() - 1.0));
        if (k == 0)
          first = d3u;
        else
          rep.x3_dependence = std::max(rep.x3_dependence, (d3u - first).norm());
      }
    }
  rep.pass = rep.x3_dependence <= tol && rep.unit_deviation <= tol;
  return rep;
}

LayeredReport membership_B0(const VectorField3& u, double tol, int n1, int n23) {
  LayeredReport rep;
  rep.tol = tol;
  const Box2& w = u.domain.omega;
  const double L = u.domain.height;
  const double h2 = w.width(1) / (4.0 * n23);
  const double h3 = L / (4.0 * n23);
  for (int i = 0; i < n1; ++i) {
    const double x1 = w.lo.x() + (i + 0.5) / n1 * w.width(0);
    for (int j = 0; j < n23; ++j)
      for (int k = 0; k < n23; ++k) {
        const double x2 = w.lo.y() + (j + 0.5) / n23 * w.width(1);
        const double x3 = L * (k + 0.5) / n23;
        const Vector3d x(x1, x2, x3);
        const auto at = [&](double dy, double dz) {
          return u.value(Vector3d(x1, x2 + dy, x3 + dz));
        };
        const Vector3d u0 = at(0, 0);
        rep.affine_x2 = std::max(
            rep.affine_x2, (at(h2, 0) - 2.0 * u0 + at(-h2, 0)).norm() / (h2 * h2));
        rep.affine_x3 = std::max(
            rep.affine_x3, (at(0, h3) - 2.0 * u0 + at(0, -h3)).norm() / (h3 * h3));
        rep.mixed = std::max(
            rep.mixed, (at(h2, h3) - at(h2, 0) - at(0, h3) + u0).norm() / (h2 * h3));
        const Matrix3d g = grad(u, x);
        const Vector3d c2 = g.col(1), c3 = g.col(2);
        rep.frame = std::max({rep.frame, std::abs(c2.norm() - 1.0), std::abs(c3.norm() - 1.0),
                              std::abs(c2.dot(c3))});
      }
  }
  rep.pass =
      rep.affine_x2 <= tol && rep.affine_x3 <= tol && rep.mixed <= tol && rep.frame <= tol;
  return rep;
}

IncompressibilityReport incompressibility(const DirectorForm& df, const QuadratureSpec& spec) {
  IncompressibilityReport rep;
  const VectorField3 u = df.deformation();
  const Quadrature3 q3 = Quadrature3::on(df.domain.box(), spec.n1, spec.n2, spec.n3);
  const QuadAxis& ax = q3.axis(0);
  const QuadAxis& ay = q3.axis(1);
  const QuadAxis& az = q3.axis(2);
  for (std::size_t i = 0; i < ax.size(); ++i)
    for (std::size_t j = 0; j < ay.size(); ++j) {
      for (std::size_t k = 0; k < az.size(); ++k) {
        const Vector3d x(ax.mid[i], ay.mid[j], az.mid[k]);
        rep.max_det_deviation =
            std::max(rep.max_det_deviation, std::abs(grad(u, x).determinant() - 1.0));
      }
      const auto ds = df.sigma_partials(Vector2d(ax.mid[i], ay.mid[j]));
      rep.max_parallel_residual =
          std::max(rep.max_parallel_residual, ds[0].cross(ds[1]).norm());
    }
  return rep;
}

}  // namespace fiberlab
