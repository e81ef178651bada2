#include "fiberlab/rigidity_analysis.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fiberlab {

Matrix3d project_SO3(const Matrix3d& F) {
  if (!F.allFinite()) throw std::domain_error("project_SO3: non-finite input");
  const double det = F.determinant();
  if (!(det > 0.0))
    throw std::domain_error("project_SO3: determinant must be positive, got " +
                            std::to_string(det));
  Eigen::JacobiSVD<Matrix3d> svd(F, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector3d s = svd.singularValues();
  if (!(s(2) > 0.0) || !s.allFinite())
    throw std::domain_error("project_SO3: rank-deficient input");
  Matrix3d d = Matrix3d::Identity();
  d(2, 2) = ((svd.matrixU() * svd.matrixV().transpose()).determinant() > 0.0) ? 1.0 : -1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

double dist_SO3(const Matrix3d& F) {
  Eigen::JacobiSVD<Matrix3d> svd(F);
  const Vector3d s = svd.singularValues();
  const double last = (F.determinant() >= 0.0) ? 1.0 : -1.0;
  const double d0 = s(0) - 1.0, d1 = s(1) - 1.0, d2 = s(2) - last;
  return std::sqrt(d0 * d0 + d1 * d1 + d2 * d2);
}

void PiecewiseRotationField::insert(CellIndex k, const Matrix3d& R, const Vector3d& b) {
  if (((R.transpose() * R) - Matrix3d::Identity()).norm() > 1e-10 || !(R.determinant() > 0.0)) {
    std::ostringstream msg;
    msg << "PiecewiseRotationField: entry at cell (" << k.i << ", " << k.j
        << ") is not a rotation";
    throw std::invalid_argument(msg.str());
  }
  entries_[k] = {R, b};
}

const Matrix3d& PiecewiseRotationField::rotation(CellIndex k) const {
  const auto it = entries_.find(k);
  if (it == entries_.end()) {
    std::ostringstream msg;
    msg << "PiecewiseRotationField: no entry at cell (" << k.i << ", " << k.j << ")";
    throw std::out_of_range(msg.str());
  }
  return it->second.first;
}

const Vector3d& PiecewiseRotationField::translation(CellIndex k) const {
  const auto it = entries_.find(k);
  if (it == entries_.end()) {
    std::ostringstream msg;
    msg << "PiecewiseRotationField: no entry at cell (" << k.i << ", " << k.j << ")";
    throw std::out_of_range(msg.str());
  }
  return it->second.second;
}

std::vector<CellIndex> PiecewiseRotationField::cells() const {
  std::vector<CellIndex> out;
  out.reserve(entries_.size());
  for (const auto& [k, v] : entries_) out.push_back(k);
  return out;
}

Matrix3d PiecewiseRotationField::rotation_at(const Vector2d& xp) const {
  return rotation(cell_of(xp, layout_));
}

Vector3d PiecewiseRotationField::sigma(const Vector2d& xp) const {
  return rotation_at(xp).col(2);
}

Vector3d PiecewiseRotationField::w(const Vector3d& x) const {
  const auto it = entries_.find(cell_of(Vector2d(x.x(), x.y()), layout_));
  if (it == entries_.end())
    throw std::out_of_range("PiecewiseRotationField::w: point outside the covered cells");
  return it->second.first * x + it->second.second;
}

Box2 PiecewiseRotationField::covered_box() const {
  if (entries_.empty())
    throw std::logic_error("PiecewiseRotationField::covered_box: no cells stored");
  long i0 = std::numeric_limits<long>::max(), i1 = std::numeric_limits<long>::min();
  long j0 = i0, j1 = i1;
  for (const auto& [k, v] : entries_) {
    i0 = std::min(i0, k.i);
    i1 = std::max(i1, k.i);
    j0 = std::min(j0, k.j);
    j1 = std::max(j1, k.j);
  }
  for (long i = i0; i <= i1; ++i)
    for (long j = j0; j <= j1; ++j) {
      if (!has(CellIndex{i, j})) {
        std::ostringstream msg;
        msg << "PiecewiseRotationField::covered_box: covered cells are not a full rectangle "
               "(missing ("
            << i << ", " << j << "))";
        throw std::logic_error(msg.str());
      }
    }
  const double eps = layout_.epsilon();
  return Box2{Vector2d(eps * static_cast<double>(i0), eps * static_cast<double>(j0)),
              Vector2d(eps * static_cast<double>(i1 + 1), eps * static_cast<double>(j1 + 1))};
}

PiecewiseRotationField extract_rotations(const VectorField3& u, const FiberLayout& layout,
                                         const Domain3& domain, const ExtractionSpec& spec) {
  if (spec.n_cross < 1 || spec.n_axial < 1)
    throw std::invalid_argument("extract_rotations: sampling counts must be >= 1");
  const std::vector<CellIndex> cells = interior_cells(layout, domain.omega);
  if (cells.empty())
    throw std::invalid_argument(
        "extract_rotations: no interior cells (eps too large for the cross-section)");
  PiecewiseRotationField prf(layout);
  const double L = domain.height;
  for (const CellIndex k : cells) {
    const Box2 s = layout.inner_square(k);
    Matrix3d avg = Matrix3d::Zero();
    int count = 0;
    for (int ix = 0; ix < spec.n_cross; ++ix)
      for (int iy = 0; iy < spec.n_cross; ++iy)
        for (int iz = 0; iz < spec.n_axial; ++iz) {
          const Vector3d x(s.lo.x() + (ix + 0.5) / spec.n_cross * s.width(0),
                           s.lo.y() + (iy + 0.5) / spec.n_cross * s.width(1),
                           (iz + 0.5) / spec.n_axial * L);
          avg += grad(u, x);
          ++count;
        }
    avg /= static_cast<double>(count);
    Matrix3d R;
    try {
      R = project_SO3(avg);
    } catch (const std::domain_error& e) {
      std::ostringstream msg;
      msg << "extract_rotations: projection failed at cell (" << k.i << ", " << k.j
          << "): " << e.what();
      throw std::domain_error(msg.str());
    }
    Vector3d b = Vector3d::Zero();
    for (int ix = 0; ix < spec.n_cross; ++ix)
      for (int iy = 0; iy < spec.n_cross; ++iy)
        for (int iz = 0; iz < spec.n_axial; ++iz) {
          const Vector3d x(s.lo.x() + (ix + 0.5) / spec.n_cross * s.width(0),
                           s.lo.y() + (iy + 0.5) / spec.n_cross * s.width(1),
                           (iz + 0.5) / spec.n_axial * L);
          b += u.value(x) - R * x;
        }
    b /= static_cast<double>(count);
    prf.insert(k, R, b);
  }
  return prf;
}

double piecewise_rigid_error(const VectorField3& u, const PiecewiseRotationField& prf, double p,
                             const QuadratureSpec& spec) {
  if (!(p >= 1.0)) throw std::invalid_argument("piecewise_rigid_error: p >= 1 required");
  const FiberLayout& layout = prf.layout();
  const Quadrature3 q = make_quadrature(u.domain, Region::whole(), spec, &layout);
  const double integral = q.integrate([&](const Vector3d& x) -> double {
    const CellIndex k = cell_of(Vector2d(x.x(), x.y()), layout);
    if (!prf.has(k)) return 0.0;
    const Vector3d diff =
        u.value(x) - (prf.rotation(k) * x + prf.translation(k));
    return std::pow(diff.norm(), p);
  });
  return std::pow(std::max(integral, 0.0), 1.0 / p);
}

namespace {

/// Lattice lines eps*n and their xi-shifted copies inside (lo, hi): the panel
/// boundaries on which |sigma(.+xi) - sigma|^p is piecewise constant.
std::vector<double> lattice_breaks(double eps, double shift, double lo, double hi) {
  std::vector<double> out;
  for (double off : {0.0, -shift}) {
    const long n0 = static_cast<long>(std::floor((lo - off) / eps)) - 1;
    const long n1 = static_cast<long>(std::ceil((hi - off) / eps)) + 1;
    for (long n = n0; n <= n1; ++n) {
      const double x = eps * static_cast<double>(n) + off;
      if (x > lo && x < hi) out.push_back(x);
    }
  }
  return out;
}

}  // namespace

FkReport fk_modulus(const PiecewiseRotationField& prf, const std::vector<Vector2d>& xi_list,
                    double p, const Box2& U) {
  if (!(p >= 1.0)) throw std::invalid_argument("fk_modulus: p >= 1 required");
  const double eps = prf.layout().epsilon();
  const Box2 covered = prf.covered_box();
  FkReport report;
  report.eps = eps;
  report.p = p;
  report.U = U;
  const auto sigma = [&prf](const Vector2d& xp) { return prf.sigma(xp); };
  for (const Vector2d& xi : xi_list) {
    FkRow row;
    row.xi = xi;
    if (xi.norm() == 0.0) {
      row.value = 0.0;
    } else {
      row.value = translate_diff(sigma, xi, p, U, covered, 1, 1,
                                 lattice_breaks(eps, xi.x(), U.lo.x(), U.hi.x()),
                                 lattice_breaks(eps, xi.y(), U.lo.y(), U.hi.y()));
    }
    report.rows.push_back(row);
  }
  for (const FkRow& row : report.rows) {
    const double denom = std::pow(row.xi.norm(), p) + std::pow(eps, p);
    report.fitted_C = std::max(report.fitted_C, row.value / denom);
  }
  for (FkRow& row : report.rows) {
    const double denom = std::pow(row.xi.norm(), p) + std::pow(eps, p);
    row.slack = report.fitted_C * denom - row.value;
  }
  return report;
}

double difference_quotient_norm(const std::function<Vector3d(const Vector2d&)>& Sigma,
                                const std::vector<Vector2d>& xi_list, double p, const Box2& U,
                                const Box2& omega, int n0, int n1) {
  if (!(p >= 1.0)) throw std::invalid_argument("difference_quotient_norm: p >= 1 required");
  double worst = 0.0;
  for (const Vector2d& xi : xi_list) {
    const double len = xi.norm();
    if (len == 0.0)
      throw std::invalid_argument("difference_quotient_norm: offsets must be nonzero");
    const double integral = translate_diff(Sigma, xi, p, U, omega, n0, n1);
    worst = std::max(worst, std::pow(integral, 1.0 / p) / len);
  }
  return worst;
}

double lemma31_rhs(double p, double L1, double L2, double L3, double m, const Matrix3d& A1,
                   const Matrix3d& A2) {
  if (!(p >= 1.0)) throw std::invalid_argument("lemma31_rhs: p >= 1 required");
  if (!(L1 > 0.0 && L2 > 0.0 && L3 > 0.0))
    throw std::invalid_argument("lemma31_rhs: side lengths must be positive");
  const double jump = ((A2 - A1) * Vector3d(0, 0, 1)).norm();
  return std::pow(L3, p + 1.0) * L2 /
         (std::pow(2.0, p) * (p + 1.0) * std::pow(1.0 + m * m, 0.5 * p) * std::pow(L1, p - 1.0)) *
         std::pow(jump, p);
}

std::function<Vector3d(const Vector3d&)> lemma31_interpolant(const AffineTraceConfig& cfg) {
  const AffineTraceConfig c = cfg;
  return [c](const Vector3d& x) -> Vector3d {
    const double y2 = x.y() - c.m * x.x();
    const double s = x.x() / c.L1;
    return (1.0 - s) * c.w1(c.face1(y2, x.z())) + s * c.w2(c.face2(y2, x.z()));
  };
}

Lemma31Report lemma31_verify(const std::function<Vector3d(const Vector3d&)>& v,
                             const AffineTraceConfig& cfg, int n) {
  if (n < 2) throw std::invalid_argument("lemma31_verify: n >= 2 required");
  Lemma31Report rep;
  const int n_trace = 9;
  for (int j = 0; j < n_trace; ++j)
    for (int k = 0; k < n_trace; ++k) {
      const double y2 = cfg.L2 * (j + 0.5) / n_trace;
      const double y3 = cfg.L3 * (k + 0.5) / n_trace;
      const Vector3d f1 = cfg.face1(y2, y3);
      const Vector3d f2 = cfg.face2(y2, y3);
      rep.trace_residual = std::max({rep.trace_residual, (v(f1) - cfg.w1(f1)).norm(),
                                     (v(f2) - cfg.w2(f2)).norm()});
    }
  if (rep.trace_residual > 1e-8)
    throw std::invalid_argument("lemma31_verify: field violates the affine face traces (residual " +
                                std::to_string(rep.trace_residual) + ")");

  const double fac = std::pow(1.0 + cfg.m * cfg.m, 0.5 * cfg.p);
  const double h = 1e-6 * cfg.L1;
  const Quadrature3 q = Quadrature3::on(
      Box3{Vector3d::Zero(), Vector3d(cfg.L1, cfg.L2, cfg.L3)}, n, n, n);
  const AffineTraceConfig c = cfg;
  rep.lhs = q.integrate([&v, c, h, fac](const Vector3d& y) -> double {
    const auto at = [&](double y1) {
      return v(Vector3d(y1, c.m * y1 + y.y(), y.z()));
    };
    const Vector3d dy1 = (at(y.x() + h) - at(y.x() - h)) / (2.0 * h);
    return std::pow(dy1.norm(), c.p) / fac;
  });
  rep.rhs = lemma31_rhs(cfg.p, cfg.L1, cfg.L2, cfg.L3, cfg.m, cfg.A1, cfg.A2);
  rep.ratio = (rep.rhs > 0.0) ? rep.lhs / rep.rhs
                              : (rep.lhs <= 1e-20 ? 1.0 : std::numeric_limits<double>::infinity());
  return rep;
}

Lemma31Report lemma31_brute_force(const AffineTraceConfig& cfg, int n, int max_sweeps,
                                  double tol) {
  if (cfg.p != 2.0)
    throw std::invalid_argument("lemma31_brute_force: closed-form node updates need p = 2");
  if (n < 3) throw std::invalid_argument("lemma31_brute_force: n >= 3 required");

  const double h1 = cfg.L1 / (n - 1);
  // Node values in sheared coordinates; the x1-lines decouple, so only the
  // trapezoid cross weights and the per-line boundary values matter.
  std::vector<Vector3d> grid(static_cast<std::size_t>(n) * n * n);
  const auto idx = [n](int i, int j, int k) {
    return (static_cast<std::size_t>(i) * n + j) * n + k;
  };
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      const double y2 = cfg.L2 * j / (n - 1);
      const double y3 = cfg.L3 * k / (n - 1);
      const Vector3d lo = cfg.w1(cfg.face1(y2, y3));
      const Vector3d hi = cfg.w2(cfg.face2(y2, y3));
      for (int i = 0; i < n; ++i) {
        if (i == 0)
          grid[idx(i, j, k)] = lo;
        else if (i == n - 1)
          grid[idx(i, j, k)] = hi;
        else
          grid[idx(i, j, k)] = Vector3d::Zero();  // deliberately far from optimal
      }
    }
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double change = 0.0;
    for (int i = 1; i < n - 1; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const Vector3d best = 0.5 * (grid[idx(i - 1, j, k)] + grid[idx(i + 1, j, k)]);
          change = std::max(change, (best - grid[idx(i, j, k)]).norm());
          grid[idx(i, j, k)] = best;
        }
    if (change < tol) break;
  }

  const auto cross_weight = [n](int j, double extent) {
    const double h = extent / (n - 1);
    return (j == 0 || j == n - 1) ? 0.5 * h : h;
  };
  Lemma31Report rep;
  const double fac = 1.0 + cfg.m * cfg.m;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      const double w = cross_weight(j, cfg.L2) * cross_weight(k, cfg.L3);
      double line = 0.0;
      for (int i = 0; i + 1 < n; ++i) {
        const double slope =
            (grid[idx(i + 1, j, k)] - grid[idx(i, j, k)]).norm() / h1;
        line += h1 * slope * slope;
      }
      rep.lhs += w * line / fac;
    }
  rep.rhs = lemma31_rhs(cfg.p, cfg.L1, cfg.L2, cfg.L3, cfg.m, cfg.A1, cfg.A2);
  rep.ratio = (rep.rhs > 0.0) ? rep.lhs / rep.rhs
                              : (rep.lhs <= 1e-20 ? 1.0 : std::numeric_limits<double>::infinity());
  return rep;
}

double soft_density(const EnergyDensitySpec& spec, const Matrix3d& F) {
  if (spec.soft == EnergyDensitySpec::Soft::dist_p)
    return std::pow(dist_SO3(F), spec.soft_p);
  return std::pow((F.transpose() * F - Matrix3d::Identity()).norm(), 0.5 * spec.soft_p);
}

EnergyReport energy_masked(const VectorField3& u,
                           const std::function<bool(const Vector2d&)>& rigid_mask,
                           const std::vector<double>& breaks_x, const std::vector<double>& breaks_y,
                           const EnergyDensitySpec& spec, const QuadratureSpec& quad) {
  EnergyReport rep;
  rep.tau = spec.tau.value_or(u.gradient ? 1e-8 : 10.0 * u.fd_step * u.fd_step);
  const Box3 box = u.domain.box();
  const Quadrature3 q = Quadrature3::on(box, quad.n1, quad.n2, quad.n3, breaks_x, breaks_y);
  rep.soft = q.integrate([&](const Vector3d& x) -> double {
    return rigid_mask(Vector2d(x.x(), x.y())) ? 0.0 : soft_density(spec, grad(u, x));
  });
  rep.rigid_diagnostic = q.integrate([&](const Vector3d& x) -> double {
    if (!rigid_mask(Vector2d(x.x(), x.y()))) return 0.0;
    return std::pow(dist_SO3(grad(u, x)), spec.diagnostic_p);
  });
  // Max over the same nodes; separate serial pass so the max needs no custom
  // reduction.
  const QuadAxis& ax = q.axis(0);
  const QuadAxis& ay = q.axis(1);
  const QuadAxis& az = q.axis(2);
  std::vector<double> partial(ax.size(), 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(ax.size()); ++i) {
    double worst = 0.0;
    for (std::size_t j = 0; j < ay.size(); ++j) {
      if (!rigid_mask(Vector2d(ax.mid[static_cast<std::size_t>(i)], ay.mid[j]))) continue;
      for (std::size_t k = 0; k < az.size(); ++k) {
        worst = std::max(
            worst, dist_SO3(grad(u, Vector3d(ax.mid[static_cast<std::size_t>(i)], ay.mid[j],
                                             az.mid[k]))));
      }
    }
    partial[static_cast<std::size_t>(i)] = worst;
  }
  for (double v : partial) rep.rigid_max_dist = std::max(rep.rigid_max_dist, v);
  rep.rigid_feasible = rep.rigid_max_dist <= rep.tau;
  rep.rigid = rep.rigid_feasible ? 0.0 : rep.rigid_max_dist;
  return rep;
}

EnergyReport energy(const VectorField3& u, const FiberLayout& layout,
                    const EnergyDensitySpec& spec, const QuadratureSpec& quad) {
  const Box3 box = u.domain.box();
  return energy_masked(
      u, [&layout](const Vector2d& xp) { return is_rigid(xp, layout); },
      layout_breaks(layout, 0, box.lo.x(), box.hi.x()),
      layout_breaks(layout, 1, box.lo.y(), box.hi.y()), spec, quad);
}

RegularizedRow regularized_row(const VectorField3& u, const FiberLayout& layout, double p,
                               const std::vector<Vector2d>& xi_list, const Box2& U,
                               const VectorField3* limit, const ExtractionSpec& ext,
                               std::optional<QuadratureSpec> spec, int n_axial_avg) {
  RegularizedRow row;
  row.eps = layout.epsilon();
  const QuadratureSpec qs =
      spec ? *spec : QuadratureSpec::resolve(u.domain, layout.epsilon());
  row.second_diff_11 = second_diff_norm(u, 0, 0, p, qs);
  row.second_diff_12 = second_diff_norm(u, 0, 1, p, qs);
  row.second_diff_22 = second_diff_norm(u, 1, 1, p, qs);
  row.second_diff_max =
      std::max({row.second_diff_11, row.second_diff_12, row.second_diff_22});

  const PiecewiseRotationField prf = extract_rotations(u, layout, u.domain, ext);
  const FkReport fk = fk_modulus(prf, xi_list, p, U);
  double rescaled = 0.0;
  for (const FkRow& r : fk.rows) {
    const double denom = std::pow(row.eps, p) * (std::pow(r.xi.norm(), p) + std::pow(row.eps, p));
    rescaled = std::max(rescaled, r.value / denom);
  }
  row.fk_rescaled_C = rescaled;

  const double L = u.domain.height;
  const auto V = [&](const Vector2d& xp) -> Matrix3d {
    Matrix3d m = Matrix3d::Zero();
    for (int t = 0; t < n_axial_avg; ++t) {
      const Matrix3d g = grad(u, Vector3d(xp.x(), xp.y(), L * (t + 0.5) / n_axial_avg));
      m.col(0) += g.col(0);
      m.col(1) += g.col(1);
    }
    m.col(0) /= n_axial_avg;
    m.col(1) /= n_axial_avg;
    m.col(2) = prf.sigma(xp);
    return m;
  };
  const Quadrature2 q2 = Quadrature2::on(
      U, qs.n1, qs.n2, layout_breaks(layout, 0, U.lo.x(), U.hi.x()),
      layout_breaks(layout, 1, U.lo.y(), U.hi.y()));
  const double rigid_int = q2.integrate([&](const Vector2d& xp) -> double {
    if (!is_rigid(xp, layout)) return 0.0;
    return std::pow(dist_SO3(V(xp)), p);
  });
  row.v_dist_rigid = std::pow(std::max(rigid_int, 0.0), 1.0 / p);
  if (limit) {
    const VectorField3 lim = *limit;
    const double gap_int = q2.integrate([&](const Vector2d& xp) -> double {
      Matrix3d g = Matrix3d::Zero();
      for (int t = 0; t < n_axial_avg; ++t)
        g += grad(lim, Vector3d(xp.x(), xp.y(), L * (t + 0.5) / n_axial_avg));
      g /= n_axial_avg;
      return std::pow((V(xp) - g).norm(), p);
    });
    row.v_gap_limit = std::pow(std::max(gap_int, 0.0), 1.0 / p);
  }
  return row;
}

RegularizedReport regularized_check(const std::vector<SweepMember>& members, double p,
                                    const std::vector<Vector2d>& xi_units, const Box2& U,
                                    const VectorField3* limit) {
  RegularizedReport rep;
  rep.p = p;
  for (const SweepMember& m : members) {
    std::vector<Vector2d> xi;
    xi.reserve(xi_units.size());
    for (const Vector2d& v : xi_units) xi.push_back(m.eps * v);
    rep.rows.push_back(regularized_row(m.u, m.layout, p, xi, U, limit));
  }
  return rep;
}

double deviation_measure(const std::function<Matrix3d(const Vector3d&)>& V, double gamma,
                         const Box3& Q, int n0, int n1, int n2,
                         const std::vector<double>& breaks0, const std::vector<double>& breaks1,
                         const std::vector<double>& breaks2) {
  if (!(gamma > 0.0)) throw std::invalid_argument("deviation_measure: gamma > 0 required");
  const Quadrature3 q = Quadrature3::on(Q, n0, n1, n2, breaks0, breaks1, breaks2);
  return q.integrate(
      [&](const Vector3d& x) -> double { return dist_SO3(V(x)) > gamma ? 1.0 : 0.0; });
}

}  // namespace fiberlab
