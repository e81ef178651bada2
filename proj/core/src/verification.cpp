#include "fiberlab/verification.hpp"

#include <Eigen/Geometry>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "fiberlab/approx_identity.hpp"
#include "fiberlab/fields.hpp"
#include "fiberlab/geometry.hpp"
#include "fiberlab/limit_deformations.hpp"
#include "fiberlab/reports.hpp"
#include "fiberlab/rigidity_analysis.hpp"
#include "fiberlab/sequence_builder.hpp"

namespace fiberlab {

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

VerifyConfig VerifyConfig::from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("config: top-level JSON object required");

  VerifyConfig cfg;
  bool saw_version = false;
  for (const auto& [key, value] : doc.items()) {
    const auto number = [&key, &value](double lo, double hi) -> double {
      if (!value.is_number())
        throw std::invalid_argument("config: key '" + key + "' must be a number");
      const double v = value.get<double>();
      if (!(v >= lo && v <= hi))
        throw std::invalid_argument("config: key '" + key + "' out of range [" +
                                    format_double(lo) + ", " + format_double(hi) + "]");
      return v;
    };
    const auto integer = [&key, &value](long lo, long hi) -> long {
      if (!value.is_number_integer())
        throw std::invalid_argument("config: key '" + key + "' must be an integer");
      const long v = value.get<long>();
      if (v < lo || v > hi)
        throw std::invalid_argument("config: key '" + key + "' out of range");
      return v;
    };
    if (key == "schema_version") {
      cfg.schema_version = static_cast<int>(integer(1, 1));
      saw_version = true;
    } else if (key == "p") {
      cfg.p = number(1.0, 16.0);
    } else if (key == "alpha") {
      cfg.alpha = number(1e-3, 0.499);
    } else if (key == "delta") {
      cfg.delta = number(1e-3, 0.999);
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(integer(0, std::numeric_limits<long>::max()));
    } else if (key == "rigid_samples") {
      cfg.rigid_samples = static_cast<int>(integer(1, 100000000));
    } else if (key == "lift_samples") {
      cfg.lift_samples = static_cast<int>(integer(1, 100000000));
    } else if (key == "slab_configs") {
      cfg.slab_configs = static_cast<int>(integer(1, 1000000));
    } else if (key == "slab_fields") {
      cfg.slab_fields = static_cast<int>(integer(1, 1000000));
    } else if (key == "rotation_samples") {
      cfg.rotation_samples = static_cast<int>(integer(1, 1000000));
    } else if (key == "rotation_grid") {
      cfg.rotation_grid = static_cast<int>(integer(1, 100000000));
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  if (!saw_version) throw std::invalid_argument("config: missing required key 'schema_version'");
  if (!(cfg.delta + 2.0 * cfg.alpha < 1.0))
    throw std::invalid_argument("config: need delta + 2*alpha < 1");
  return cfg;
}

std::string VerifyConfig::to_json() const {
  nlohmann::ordered_json j;
  j["schema_version"] = schema_version;
  j["p"] = p;
  j["alpha"] = alpha;
  j["delta"] = delta;
  j["seed"] = seed;
  j["rigid_samples"] = rigid_samples;
  j["lift_samples"] = lift_samples;
  j["slab_configs"] = slab_configs;
  j["slab_fields"] = slab_fields;
  j["rotation_samples"] = rotation_samples;
  j["rotation_grid"] = rotation_grid;
  return j.dump(2);
}

bool VerificationReport::all_pass() const {
  return std::all_of(results.begin(), results.end(),
                     [](const CriterionResult& r) { return r.pass; });
}

// ---------------------------------------------------------------------------
// Brute-force nearest-rotation oracle (criterion 11)
// ---------------------------------------------------------------------------

double dist_SO3_grid(const Matrix3d& F, int samples, std::uint64_t seed) {
  Rng rng(seed);
  Matrix3d best = Matrix3d::Identity();
  double best_v = (F - best).norm();
  for (int s = 0; s < samples; ++s) {
    // Uniform rotation from three uniforms (subgroup-algorithm quaternion).
    const double u1 = rng.uniform();
    const double u2 = rng.uniform();
    const double u3 = rng.uniform();
    const double a = std::sqrt(1.0 - u1);
    const double b = std::sqrt(u1);
    const double t2 = 2.0 * M_PI * u2;
    const double t3 = 2.0 * M_PI * u3;
    const Eigen::Quaterniond q(b * std::cos(t3), a * std::sin(t2), a * std::cos(t2),
                               b * std::sin(t3));
    const Matrix3d R = q.toRotationMatrix();
    const double v = (F - R).norm();
    if (v < best_v) {
      best_v = v;
      best = R;
    }
  }
  // Axis-angle coordinate descent with step halving from the best grid point.
  double step = 0.1;
  while (step > 1e-7) {
    bool moved = true;
    while (moved) {
      moved = false;
      for (int axis = 0; axis < 3; ++axis) {
        for (const double sgn : {1.0, -1.0}) {
          const Matrix3d cand =
              best * Eigen::AngleAxisd(sgn * step, Vector3d::Unit(axis)).toRotationMatrix();
          const double v = (F - cand).norm();
          if (v < best_v) {
            best_v = v;
            best = cand;
            moved = true;
          }
        }
      }
    }
    step *= 0.5;
  }
  return best_v;
}

// ---------------------------------------------------------------------------
// Criterion bodies
// ---------------------------------------------------------------------------

namespace {

using Outcome = std::pair<bool, std::string>;

constexpr std::array<double, 3> kEpsSweep{0.125, 0.0625, 0.03125};

struct PresetCase {
  PresetKind kind;
  double gamma;
};

const std::array<PresetCase, 3>& standard_cases() {
  static const std::array<PresetCase, 3> cases{{{PresetKind::shear, 1.0},
                                                {PresetKind::twist, 1.0},
                                                {PresetKind::paraboloid, 1.0}}};
  return cases;
}

FiberLayout standard_layout(const VerifyConfig& cfg, double eps) {
  return FiberLayout::periodic_centered(eps, cfg.alpha, cfg.delta);
}

ApproxDeformation sequence_member(PresetKind kind, double eps, const VerifyConfig& cfg,
                                  double gamma = 1.0) {
  PresetSpec ps;
  ps.kind = kind;
  ps.gamma = gamma;
  const Domain3 dom = default_domain(kind);
  const DirectorForm df = preset(ps, dom);
  const RotationForm rf = to_rotation_form(df);
  const FiberLayout layout = standard_layout(cfg, eps);
  const ApproxIdentity id = ApproxIdentity::make(cfg.alpha, eps, dom.omega);
  return build(rf, layout, id, Vector2d::Zero());
}

std::vector<Vector2d> offset_list(double eps, std::initializer_list<double> multiples) {
  std::vector<Vector2d> xi;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (const double mult : multiples) {
    const double t = mult * eps;
    xi.emplace_back(t, 0.0);
    xi.emplace_back(0.0, t);
    xi.emplace_back(t * inv_sqrt2, t * inv_sqrt2);
  }
  return xi;
}

// 1. Built sequence members are exactly rigid on the stiff set.
Outcome exact_fiber_rigidity(const VerifyConfig& cfg) {
  double worst = 0.0;
  std::uint64_t sub = 0;
  for (const PresetCase& pc : standard_cases()) {
    for (const double eps : kEpsSweep) {
      const ApproxDeformation ad = sequence_member(pc.kind, eps, cfg, pc.gamma);
      const VectorField3 u = ad.field();
      const Box2 om = ad.rf.domain.omega;
      Rng rng(Rng::mix(cfg.seed, 1, sub++));
      long draws = 0;
      int got = 0;
      while (got < cfg.rigid_samples) {
        if (++draws > 400L * cfg.rigid_samples)
          throw std::runtime_error("stiff-set rejection sampling stalled");
        const Vector2d xp(rng.uniform(om.lo.x(), om.hi.x()), rng.uniform(om.lo.y(), om.hi.y()));
        if (!is_rigid(xp, ad.layout)) continue;
        const double x3 = rng.uniform(0.0, ad.rf.domain.height);
        worst = std::max(worst, dist_SO3(grad(u, Vector3d(xp.x(), xp.y(), x3))));
        ++got;
      }
    }
  }
  return {worst <= 1e-10,
          "max stiff-set distance to SO(3) = " + format_double(worst) + " (tol 1e-10)"};
}

// 2. The members converge to their limit at a first-order rate.
Outcome limit_convergence(const VerifyConfig& cfg) {
  bool ok = true;
  std::string detail;
  for (const PresetCase& pc : standard_cases()) {
    std::vector<std::pair<double, double>> pts;
    double prev = std::numeric_limits<double>::infinity();
    bool decreasing = true;
    for (const double eps : kEpsSweep) {
      const ApproxDeformation ad = sequence_member(pc.kind, eps, cfg, pc.gamma);
      QuadratureSpec qs;
      qs.n1 = 8;
      qs.n2 = 8;
      qs.n3 = 6;
      const double v =
          lp_norm_diff(ad.field(), ad.rf.deformation(), cfg.p, Region::whole(), qs, &ad.layout);
      decreasing = decreasing && v < prev;
      prev = v;
      pts.emplace_back(eps, v);
    }
    const RateFit fit = fit_rate(preset_name(pc.kind), pts);
    ok = ok && decreasing && fit.slope >= 0.9;
    if (!detail.empty()) detail += ", ";
    detail += preset_name(pc.kind) + (decreasing ? " slope " : " NOT DECREASING, slope ") +
              format_double(fit.slope);
  }
  return {ok, detail + " (need decreasing, slope >= 0.9)"};
}

// 3. Properties of the collapsing near-identity map.
Outcome collapse_map(const VerifyConfig& cfg) {
  const Box2 U{{-1.0, -1.0}, {1.0, 1.0}};
  const double eps0 = 0.125;
  const FiberLayout layout = standard_layout(cfg, eps0);
  const ApproxIdentity id = ApproxIdentity::make(cfg.alpha, eps0, U);
  const PhiReport rep = verify_properties(id, layout, 25, cfg.seed);
  const double expected = std::sqrt(2.0) / (2.0 * cfg.alpha);

  bool ok = std::abs(rep.grad_sup - expected) <= 1e-12 && rep.grad_sup < rep.grad_bound &&
            rep.constant_on_fibers && rep.images_disjoint && rep.images_contained;

  // Sup-distance decay measured on an 8x8-cell window (the map is
  // cell-periodic, so the sup matches any larger window exactly).
  std::vector<std::pair<double, double>> pts;
  for (const double eps : {0.125, 0.0625, 0.03125, 0.015625, 0.0078125}) {
    const Box2 W{{0.0, 0.0}, {8.0 * eps, 8.0 * eps}};
    const ApproxIdentity idw = ApproxIdentity::make(cfg.alpha, eps, W);
    const FiberLayout lw = standard_layout(cfg, eps);
    pts.emplace_back(eps, verify_properties(idw, lw, 4, cfg.seed).sup_distance);
  }
  const RateFit fit = fit_rate("sup-distance", pts);
  ok = ok && std::abs(fit.slope - 1.0) <= 0.1;

  return {ok, "grad sup = " + format_double(rep.grad_sup) + " (want " + format_double(expected) +
                  "), constant-on-fibers " + (rep.constant_on_fibers ? "yes" : "NO") +
                  ", images disjoint " + (rep.images_disjoint ? "yes" : "NO") +
                  ", sup-distance slope " + format_double(fit.slope)};
}

// 4. Both rotation lifts are rotations with the prescribed third column.
Outcome rotation_lifts(const VerifyConfig& cfg) {
  Rng rng(Rng::mix(cfg.seed, 4, 0));
  double worst_orth = 0.0;
  double worst_det = 0.0;
  double worst_dir = 0.0;
  long draws = 0;
  int got = 0;
  while (got < cfg.lift_samples) {
    if (++draws > 400L * cfg.lift_samples)
      throw std::runtime_error("director sampling stalled");
    const Vector3d s = rng.unit_vector();
    if (s.x() * s.x() + s.y() * s.y() < 1e-2) continue;
    for (const LiftKind kind : {LiftKind::horizontal, LiftKind::vertical}) {
      const Matrix3d R = lift(kind, s);
      worst_orth = std::max(worst_orth, (R.transpose() * R - Matrix3d::Identity()).norm());
      worst_det = std::max(worst_det, std::abs(R.determinant() - 1.0));
      worst_dir = std::max(worst_dir, (R.col(2) - s).norm());
    }
    ++got;
  }
  const double separation = (lift_R(Vector3d(1.0, 0.0, 0.0)) - lift_S(Vector3d(1.0, 0.0, 0.0))).norm();
  const bool ok =
      worst_orth <= 1e-12 && worst_det <= 1e-12 && worst_dir <= 1e-12 && separation >= 0.1;
  return {ok, "max residuals: orthogonality " + format_double(worst_orth) + ", det " +
                  format_double(worst_det) + ", third column " + format_double(worst_dir) +
                  "; lift separation at (1,0,0) = " + format_double(separation)};
}

// 5. Volume preservation and the parallel-directions dichotomy of the gallery.
Outcome incompressibility_gallery(const VerifyConfig& cfg) {
  (void)cfg;
  QuadratureSpec qs;
  qs.n1 = 12;
  qs.n2 = 12;
  qs.n3 = 5;
  const auto report = [&qs](PresetKind kind) { return incompressibility(preset(kind), qs); };

  const IncompressibilityReport para = report(PresetKind::paraboloid);
  const IncompressibilityReport shear = report(PresetKind::shear);
  const IncompressibilityReport twist = report(PresetKind::twist);
  const IncompressibilityReport hedge = report(PresetKind::hedgehog);
  const IncompressibilityReport trophy = report(PresetKind::trophy);
  const IncompressibilityReport tyre = report(PresetKind::tyre);

  const auto exact = [](const IncompressibilityReport& r) {
    return r.max_det_deviation <= 1e-10 && r.max_parallel_residual <= 1e-10;
  };
  const bool ok = exact(para) && exact(shear) && exact(twist) &&
                  hedge.max_parallel_residual >= 0.1 && trophy.max_parallel_residual >= 0.1 &&
                  tyre.max_parallel_residual <= 1e-10 && tyre.max_det_deviation >= 0.1;
  return {ok, "volume-exact max |det-1| = " +
                  format_double(std::max({para.max_det_deviation, shear.max_det_deviation,
                                          twist.max_det_deviation})) +
                  "; hedgehog/trophy parallel residual = " +
                  format_double(hedge.max_parallel_residual) + "/" +
                  format_double(trophy.max_parallel_residual) +
                  "; tyre parallel " + format_double(tyre.max_parallel_residual) + ", |det-1| " +
                  format_double(tyre.max_det_deviation)};
}

// 6. The slab lower bound holds for random admissible data, and the discrete
//    minimizer attains it for the centered axial family.
Outcome slab_lower_bound(const VerifyConfig& cfg) {
  Rng rng(Rng::mix(cfg.seed, 6, 0));
  const std::array<double, 3> p_cycle{1.5, 2.0, 4.0};
  double min_ratio = std::numeric_limits<double>::infinity();

  for (int c = 0; c < cfg.slab_configs; ++c) {
    AffineTraceConfig tc;
    tc.p = p_cycle[static_cast<std::size_t>(c) % 3];
    tc.m = rng.uniform(-1.0, 1.0);
    tc.L1 = rng.uniform(0.5, 2.0);
    tc.L2 = rng.uniform(0.5, 2.0);
    tc.L3 = rng.uniform(0.5, 2.0);
    do {
      for (int r = 0; r < 3; ++r)
        for (int cc = 0; cc < 3; ++cc) {
          tc.A1(r, cc) = rng.uniform(-1.0, 1.0);
          tc.A2(r, cc) = rng.uniform(-1.0, 1.0);
        }
    } while (((tc.A2 - tc.A1).col(2)).norm() < 0.1);
    for (int r = 0; r < 3; ++r) {
      tc.b1[r] = rng.uniform(-1.0, 1.0);
      tc.b2[r] = rng.uniform(-1.0, 1.0);
    }

    const auto interp = lemma31_interpolant(tc);
    for (int f = 0; f < cfg.slab_fields; ++f) {
      std::function<Vector3d(const Vector3d&)> v;
      if (f == 0) {
        v = interp;
      } else {
        // Trace-respecting perturbation: a sin profile vanishing on both
        // faces times a smooth random field of the in-face coordinates.
        std::array<std::array<double, 4>, 3> co{};
        for (auto& row : co)
          for (double& e : row) e = rng.uniform(-0.5, 0.5);
        const double L1 = tc.L1;
        const double m = tc.m;
        v = [interp, co, L1, m](const Vector3d& x) -> Vector3d {
          const double y2 = x.y() - m * x.x();
          const double y3 = x.z();
          const double s = std::sin(M_PI * x.x() / L1);
          Vector3d bump;
          for (int k = 0; k < 3; ++k)
            bump[k] =
                s * (co[k][0] + co[k][1] * y2 + co[k][2] * y3 + co[k][3] * std::sin(y2 + 2.0 * y3));
          return interp(x) + bump;
        };
      }
      min_ratio = std::min(min_ratio, lemma31_verify(v, tc, 25).ratio);
    }
  }
  bool ok = min_ratio >= 0.98;

  // Centered axial-difference family: the discrete minimizer on a 17^3 grid
  // must come within 5% of the closed-form bound.
  Rng rng2(Rng::mix(cfg.seed, 6, 1));
  const std::array<Vector3d, 4> gs{Vector3d(1.0, 0.0, 0.0), Vector3d(0.0, 0.0, 1.0),
                                   Vector3d(1.0, -2.0, 0.5), Vector3d(0.3, 0.3, 1.0)};
  double worst_gap = 0.0;
  for (const Vector3d& g : gs) {
    AffineTraceConfig tc;  // p = 2, unit cube, m = 0
    for (int r = 0; r < 3; ++r)
      for (int cc = 0; cc < 3; ++cc) tc.A1(r, cc) = rng2.uniform(-1.0, 1.0);
    tc.A2 = tc.A1 + g * Vector3d::UnitZ().transpose();
    for (int r = 0; r < 3; ++r) tc.b1[r] = rng2.uniform(-1.0, 1.0);
    tc.b2 = tc.b1 - 0.5 * g - tc.A1.col(0);
    const Lemma31Report rep = lemma31_brute_force(tc, 17);
    worst_gap = std::max(worst_gap, std::abs(rep.ratio - 1.0));
  }
  ok = ok && worst_gap <= 0.05;

  return {ok, "min lhs/rhs over random fields = " + format_double(min_ratio) +
                  " (need >= 0.98); worst discrete-minimizer gap = " + format_double(worst_gap) +
                  " (need <= 0.05)"};
}

// 7. The fitted translation-modulus constant is sweep-stable.
Outcome translation_modulus(const VerifyConfig& cfg) {
  const Box2 U{{0.6, 0.15}, {2.6, 0.35}};
  std::vector<double> constants;
  std::string detail = "fitted C:";
  for (const double eps : {0.125, 0.0625, 0.03125, 0.015625}) {
    const ApproxDeformation ad = sequence_member(PresetKind::twist, eps, cfg);
    const VectorField3 u = ad.field();
    const PiecewiseRotationField prf = extract_rotations(u, ad.layout, ad.rf.domain);
    const FkReport fk = fk_modulus(prf, offset_list(eps, {1.0, 2.0, 4.0}), cfg.p, U);
    constants.push_back(fk.fitted_C);
    detail += " " + format_double(fk.fitted_C);
  }
  const double lo = *std::min_element(constants.begin(), constants.end());
  const double hi = *std::max_element(constants.begin(), constants.end());
  const bool ok = lo > 0.0 && hi / lo <= 2.0;
  return {ok, detail + "; max/min = " + format_double(lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity()) + " (need <= 2)"};
}

// 8. The layer-bending family: stiff energy of order eps^p, and a limit that
//    leaves the admissible class while staying layered-affine in x2.
Outcome bending_check(const VerifyConfig& cfg) {
  const Domain3 dom{Box2{{0.0, 0.0}, {1.0, 1.0}}, 1.0};
  const double rho = 2.0;
  std::vector<std::pair<double, double>> pts;
  for (const double eps : {0.125, 0.0625, 0.03125, 0.015625, 0.0078125}) {
    const BendingSequence bs = bending_counterexample(rho, eps, cfg.alpha, dom);
    EnergyDensitySpec sd;
    sd.soft_p = cfg.p;
    sd.diagnostic_p = cfg.p;
    QuadratureSpec quad;
    quad.n1 = 8;
    quad.n2 = 2;
    quad.n3 = 8;
    const auto mask = [bs](const Vector2d& xp) { return bs.rigid_layer(xp.x()); };
    const EnergyReport er = energy_masked(bs.u_eps(), mask, bs.layer_breaks(), {}, sd, quad);
    pts.emplace_back(eps, er.rigid_diagnostic);
  }
  const RateFit fit = fit_rate("stiff-energy", pts);
  bool ok = fit.slope >= cfg.p - 0.15 && fit.slope <= cfg.p + 0.15;

  const BendingSequence bs = bending_counterexample(rho, 0.125, cfg.alpha, dom);
  const VectorField3 lim = bs.limit();
  const double witness = (bs.gamma_prime(0.0) - bs.gamma_prime(0.5 * dom.height)).norm();
  const MembershipReport a0 = membership_A0(lim);
  const LayeredReport layered = membership_B0(lim);
  ok = ok && !a0.pass && a0.x3_dependence >= 0.1 && witness >= 0.1;
  ok = ok && layered.affine_x2 <= 1e-8 && layered.mixed <= 1e-8 && layered.frame <= 1e-8 &&
       layered.affine_x3 >= 0.1;

  return {ok, "stiff-energy slope " + format_double(fit.slope) + " (want " +
                  format_double(cfg.p) + " +- 0.15); axial-variation witness " +
                  format_double(witness) + "; layered x2/x3 second differences " +
                  format_double(layered.affine_x2) + "/" + format_double(layered.affine_x3)};
}

// 9. Subcritical perturbations leave the diagnostics unchanged and decay at
//    the imposed rate on the stiff set.
Outcome perturbation_regime(const VerifyConfig& cfg) {
  const double beta = 3.0 * cfg.p;
  const Box2 U{{0.6, 0.15}, {2.6, 0.35}};
  double worst_err_ratio = 1.0;
  double worst_c_ratio = 1.0;
  std::vector<std::pair<double, double>> pts;
  for (const double eps : kEpsSweep) {
    const ApproxDeformation ad = sequence_member(PresetKind::twist, eps, cfg);
    const VectorField3 base = ad.field();
    const VectorField3 pert = perturb_beta(ad, beta, cfg.p);
    QuadratureSpec qs;
    qs.n1 = 4;
    qs.n2 = 4;
    qs.n3 = 6;
    const PiecewiseRotationField prf_b = extract_rotations(base, ad.layout, ad.rf.domain);
    const PiecewiseRotationField prf_p = extract_rotations(pert, ad.layout, ad.rf.domain);
    const double err_b = piecewise_rigid_error(base, prf_b, cfg.p, qs);
    const double err_p = piecewise_rigid_error(pert, prf_p, cfg.p, qs);
    const double r_err = err_p / err_b;
    worst_err_ratio = std::max({worst_err_ratio, r_err, 1.0 / r_err});

    const std::vector<Vector2d> xi = offset_list(eps, {1.0, 2.0});
    const double c_b = fk_modulus(prf_b, xi, cfg.p, U).fitted_C;
    const double c_p = fk_modulus(prf_p, xi, cfg.p, U).fitted_C;
    const double r_c = c_p / c_b;
    worst_c_ratio = std::max({worst_c_ratio, r_c, 1.0 / r_c});

    EnergyDensitySpec sd;
    sd.soft_p = cfg.p;
    sd.diagnostic_p = cfg.p;
    const EnergyReport er = energy(pert, ad.layout, sd, qs);
    pts.emplace_back(eps, er.rigid_diagnostic);
  }
  const RateFit fit = fit_rate("stiff-distance-energy", pts);
  const bool ok =
      worst_err_ratio <= 2.0 && worst_c_ratio <= 2.0 && fit.slope >= beta - 0.3;
  return {ok, "piecewise-rigid-error ratio <= " + format_double(worst_err_ratio) +
                  ", fitted-C ratio <= " + format_double(worst_c_ratio) +
                  " (need <= 2); stiff dist^p slope " + format_double(fit.slope) + " (need >= " +
                  format_double(beta - 0.3) + ")"};
}

// 10. Second-difference and rescaled-modulus diagnostics: bounded for exactly
//     rigid sequences, growing for the genuinely oscillating one.
Outcome regularization_diagnostics(const VerifyConfig& cfg) {
  const std::vector<Vector2d> xi_units{
      {1.0, 0.0}, {0.0, 1.0}, {1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)}};

  const Domain3 dom = default_domain(PresetKind::paraboloid);
  const Matrix3d R0 = lift_R(Vector3d(1.0, 1.0, 1.0).normalized());
  const Vector3d b0(0.1, -0.2, 0.3);
  std::vector<SweepMember> constant_members;
  for (const double eps : kEpsSweep) {
    const FiberLayout layout = standard_layout(cfg, eps);
    const ApproxIdentity id = ApproxIdentity::make(cfg.alpha, eps, dom.omega);
    constant_members.push_back(
        {eps, build(RotationForm::constant(dom, R0, b0), layout, id, Vector2d::Zero()).field(),
         layout});
  }
  const RegularizedReport constant_rep =
      regularized_check(constant_members, cfg.p, xi_units, Box2{{-0.5, -0.5}, {0.5, 0.5}});
  bool ok = true;
  double constant_worst = 0.0;
  for (const RegularizedRow& row : constant_rep.rows) {
    constant_worst = std::max({constant_worst, row.second_diff_max, row.fk_rescaled_C});
    ok = ok && row.second_diff_max <= 1e-6 && row.fk_rescaled_C <= 1e-6;
  }

  std::vector<SweepMember> twist_members;
  for (const double eps : kEpsSweep) {
    const ApproxDeformation ad = sequence_member(PresetKind::twist, eps, cfg);
    twist_members.push_back({eps, ad.field(), ad.layout});
  }
  const RegularizedReport twist_rep =
      regularized_check(twist_members, cfg.p, xi_units, Box2{{0.6, 0.15}, {2.6, 0.35}});
  double min_growth = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < twist_rep.rows.size(); ++i) {
    min_growth = std::min(
        min_growth, twist_rep.rows[i + 1].second_diff_max / twist_rep.rows[i].second_diff_max);
  }
  ok = ok && min_growth >= 1.5;

  return {ok, "rigid-sequence diagnostics max = " + format_double(constant_worst) +
                  " (need <= 1e-6); oscillating second-difference growth factor >= " +
                  format_double(min_growth) + " per halving (need >= 1.5)"};
}

// 11. The SVD distance agrees with the SVD-free brute-force oracle.
Outcome nearest_rotation_oracle(const VerifyConfig& cfg) {
  Rng rng(Rng::mix(cfg.seed, 11, 0));
  double worst = 0.0;
  long draws = 0;
  int got = 0;
  while (got < cfg.rotation_samples) {
    if (++draws > 400L * cfg.rotation_samples)
      throw std::runtime_error("matrix sampling stalled");
    Matrix3d F;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) F(r, c) = rng.uniform(-1.0, 1.0);
    if (F.determinant() <= 0.0) continue;
    const double fast = dist_SO3(F);
    const double brute =
        dist_SO3_grid(F, cfg.rotation_grid, Rng::mix(cfg.seed, 11, 1000 + static_cast<std::uint64_t>(got)));
    worst = std::max(worst, std::abs(fast - brute));
    ++got;
  }
  return {worst <= 2e-2,
          "max |dist - brute force| = " + format_double(worst) + " (tol 2e-2)"};
}

CriterionResult guard(int id, const std::string& name, const std::function<Outcome()>& body) {
  CriterionResult result;
  result.id = id;
  result.name = name;
  try {
    const Outcome out = body();
    result.pass = out.first;
    result.detail = out.second;
  } catch (const std::exception& e) {
    result.pass = false;
    result.detail = std::string("exception: ") + e.what();
  }
  return result;
}

std::string render(const VerifyConfig& cfg, const std::vector<CriterionResult>& results) {
  std::ostringstream out;
  out << "acceptance report (schema " << cfg.schema_version << ")\n";
  out << "config: p=" << format_double(cfg.p) << " alpha=" << format_double(cfg.alpha)
      << " delta=" << format_double(cfg.delta) << " seed=" << cfg.seed << "\n";
  for (const CriterionResult& r : results) {
    out << "C" << r.id << ' ' << r.name << ": " << (r.pass ? "PASS" : "FAIL") << " :: "
        << r.detail << "\n";
  }
  return out.str();
}

}  // namespace

VerificationReport run_once(const VerifyConfig& config) {
  VerificationReport rep;
  rep.config = config;
  rep.results.push_back(
      guard(1, "exact-fiber-rigidity", [&config] { return exact_fiber_rigidity(config); }));
  rep.results.push_back(
      guard(2, "limit-convergence", [&config] { return limit_convergence(config); }));
  rep.results.push_back(guard(3, "collapse-map", [&config] { return collapse_map(config); }));
  rep.results.push_back(guard(4, "rotation-lifts", [&config] { return rotation_lifts(config); }));
  rep.results.push_back(guard(5, "incompressibility-gallery",
                              [&config] { return incompressibility_gallery(config); }));
  rep.results.push_back(
      guard(6, "slab-lower-bound", [&config] { return slab_lower_bound(config); }));
  rep.results.push_back(
      guard(7, "translation-modulus", [&config] { return translation_modulus(config); }));
  rep.results.push_back(
      guard(8, "bending-counterexample", [&config] { return bending_check(config); }));
  rep.results.push_back(
      guard(9, "perturbation-regime", [&config] { return perturbation_regime(config); }));
  rep.results.push_back(guard(10, "regularization-diagnostics",
                              [&config] { return regularization_diagnostics(config); }));
  rep.results.push_back(
      guard(11, "nearest-rotation-oracle", [&config] { return nearest_rotation_oracle(config); }));
  rep.canonical = render(config, rep.results);
  return rep;
}

VerificationReport run_verification(const VerifyConfig& config) {
  VerificationReport first = run_once(config);
  const VerificationReport second = run_once(config);
  const bool identical = first.canonical == second.canonical;
  CriterionResult c12;
  c12.id = 12;
  c12.name = "repeat-run-determinism";
  c12.pass = identical;
  c12.detail = identical ? "two full runs byte-identical (" +
                               std::to_string(first.canonical.size()) + " bytes)"
                         : "renderings of the two runs differ";
  first.results.push_back(c12);
  first.canonical = render(config, first.results);
  return first;
}

}  // namespace fiberlab
