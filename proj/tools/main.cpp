// fiberlab — command-line laboratory for stiff-fiber deformation sequences.

#include "CLI11.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fiberlab/approx_identity.hpp"
#include "fiberlab/fields.hpp"
#include "fiberlab/geometry.hpp"
#include "fiberlab/limit_deformations.hpp"
#include "fiberlab/mesh_export.hpp"
#include "fiberlab/reports.hpp"
#include "fiberlab/rigidity_analysis.hpp"
#include "fiberlab/sequence_builder.hpp"
#include "fiberlab/verification.hpp"

namespace {

using namespace fiberlab;

int g_exit_code = 0;

[[noreturn]] void flag_error(const std::string& flag, const std::string& why) {
  throw CLI::ValidationError(flag, why);
}

std::vector<double> parse_doubles(const std::string& flag, const std::string& text,
                                  std::size_t expect) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string piece;
  while (std::getline(ss, piece, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(piece, &used));
      if (used != piece.size()) flag_error(flag, "bad number '" + piece + "'");
    } catch (const std::exception&) {
      flag_error(flag, "bad number '" + piece + "'");
    }
  }
  if (expect != 0 && out.size() != expect)
    flag_error(flag, "expected " + std::to_string(expect) + " comma-separated numbers");
  return out;
}

double parse_eps_flag(const std::string& flag, const std::string& text) {
  try {
    return parse_epsilon(text);
  } catch (const std::exception& e) {
    flag_error(flag, e.what());
  }
}

std::vector<double> parse_eps_list_flag(const std::string& flag, const std::string& text) {
  try {
    return parse_epsilon_list(text);
  } catch (const std::exception& e) {
    flag_error(flag, e.what());
  }
}

Box2 parse_box(const std::string& flag, const std::string& text) {
  const std::vector<double> v = parse_doubles(flag, text, 4);
  if (!(v[0] < v[2] && v[1] < v[3])) flag_error(flag, "need x0 < x1 and y0 < y1");
  return Box2{{v[0], v[1]}, {v[2], v[3]}};
}

Matrix3d parse_matrix(const std::string& flag, const std::string& text) {
  const std::vector<double> v = parse_doubles(flag, text, 9);
  Matrix3d m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = v[static_cast<std::size_t>(3 * r + c)];
  return m;
}

Vector3d parse_vec3(const std::string& flag, const std::string& text) {
  const std::vector<double> v = parse_doubles(flag, text, 3);
  return Vector3d(v[0], v[1], v[2]);
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
    if (!content.empty() && content.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + out_path + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("write to '" + out_path + "' failed");
}

PresetKind preset_flag(const std::string& flag, const std::string& name) {
  const std::optional<PresetKind> kind = preset_from_name(name);
  if (!kind) flag_error(flag, "unknown preset '" + name + "'");
  return *kind;
}

struct LayoutOpts {
  std::string eps = "1/8";
  double alpha = 0.25;
  double delta = 0.4;
  std::string mode = "periodic";
  std::uint64_t seed = 7;
  std::string center;

  void attach(CLI::App* cmd) {
    cmd->add_option("--eps", eps, "pattern period, rational like 1/8 or decimal");
    cmd->add_option("--alpha", alpha, "margin parameter in (0, 1/2)");
    cmd->add_option("--delta", delta, "stiff-square side fraction");
    cmd->add_option("--mode", mode, "center placement: periodic | jittered")
        ->check(CLI::IsMember({"periodic", "jittered"}));
    cmd->add_option("--seed", seed, "seed for jittered centers");
    cmd->add_option("--center", center, "periodic center a as 'ax,ay' (default 0.5,0.5)");
  }

  FiberLayout build() const {
    const double e = parse_eps_flag("--eps", eps);
    if (mode == "jittered") {
      if (!center.empty()) flag_error("--center", "only valid with --mode periodic");
      return FiberLayout::jittered(e, alpha, delta, seed);
    }
    if (!center.empty()) {
      const std::vector<double> c = parse_doubles("--center", center, 2);
      return FiberLayout::periodic(e, alpha, delta, Vector2d(c[0], c[1]));
    }
    return FiberLayout::periodic_centered(e, alpha, delta);
  }
};

/// Builds a sequence member u_eps for a director-form preset.
ApproxDeformation build_member(PresetKind kind, double gamma, double r, const FiberLayout& layout,
                               const Vector2d& a) {
  PresetSpec ps;
  ps.kind = kind;
  ps.gamma = gamma;
  ps.r = r;
  const Domain3 dom = default_domain(kind);
  const DirectorForm df = preset(ps, dom);
  const RotationForm rf = to_rotation_form(df);
  const ApproxIdentity id = ApproxIdentity::make(layout.alpha(), layout.epsilon(), dom.omega);
  return build(rf, layout, id, a);
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

void add_geometry(CLI::App& app) {
  auto* cmd = app.add_subcommand("geometry", "inspect a fiber layout and its derived quantities");
  auto opts = std::make_shared<LayoutOpts>();
  opts->attach(cmd);
  auto omega = std::make_shared<std::string>("-1,-1,1,1");
  auto height = std::make_shared<double>(1.0);
  auto out = std::make_shared<std::string>();
  cmd->add_option("--omega", *omega, "cross-section rectangle x0,y0,x1,y1");
  cmd->add_option("--height", *height, "axial extent")->check(CLI::PositiveNumber);
  cmd->add_option("--out", *out, "output path (default: stdout)");
  cmd->callback([opts, omega, height, out] {
    const FiberLayout layout = opts->build();
    const Box2 om = parse_box("--omega", *omega);
    const Domain3 dom{om, *height};
    const SlopeInfo slope = slope_bound(layout);
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["layout"] = nlohmann::ordered_json::parse(to_json(layout));
    j["omega"] = {om.lo.x(), om.lo.y(), om.hi.x(), om.hi.y()};
    j["height"] = *height;
    j["cells_intersecting"] = cells_intersecting(layout, om).size();
    j["interior_cells"] = interior_cells(layout, om).size();
    j["rigid_volume_fraction"] = rigid_volume_fraction(layout, dom);
    j["slope_bound"] = slope.bound;
    j["realized_slope"] = slope.realized;
    emit(*out, j.dump(2) + "\n");
  });
}

void add_phi_report(CLI::App& app) {
  auto* cmd = app.add_subcommand("phi-report", "verify the collapsing near-identity map");
  auto opts = std::make_shared<LayoutOpts>();
  opts->attach(cmd);
  auto omega = std::make_shared<std::string>("-1,-1,1,1");
  auto samples = std::make_shared<int>(25);
  auto out = std::make_shared<std::string>();
  cmd->add_option("--omega", *omega, "window rectangle x0,y0,x1,y1");
  cmd->add_option("--samples", *samples, "random samples per cell")->check(CLI::PositiveNumber);
  cmd->add_option("--out", *out, "output path (default: stdout)");
  cmd->callback([opts, omega, samples, out] {
    const FiberLayout layout = opts->build();
    const Box2 om = parse_box("--omega", *omega);
    const ApproxIdentity id = ApproxIdentity::make(layout.alpha(), layout.epsilon(), om);
    const PhiReport rep = verify_properties(id, layout, *samples, opts->seed);
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["eps"] = layout.epsilon();
    j["alpha"] = layout.alpha();
    j["d_eps"] = {id.d_eps().x(), id.d_eps().y()};
    j["piece_grad_norms"] = rep.piece_norms;
    j["grad_sup"] = rep.grad_sup;
    j["grad_bound"] = rep.grad_bound;
    j["constant_on_fibers"] = rep.constant_on_fibers;
    j["fibers_checked"] = rep.fibers_checked;
    j["images_disjoint"] = rep.images_disjoint;
    j["images_contained"] = rep.images_contained;
    j["cells_checked"] = rep.cells_checked;
    j["sup_distance"] = rep.sup_distance;
    emit(*out, j.dump(2) + "\n");
  });
}

struct MeshOpts {
  std::string format = "obj";
  std::string out;
  int resolution = 48;
  double gamma = 1.0;
  double r = 1.5;
  double rho = 2.0;
  std::vector<std::string> fibers;
  double fiber_row = std::numeric_limits<double>::quiet_NaN();
  int fiber_count = 8;
};

void run_mesh_export(const std::string& preset_arg, const MeshOpts& m) {
  const PresetKind kind = preset_flag("preset", preset_arg);
  if (m.resolution < 2) flag_error("--resolution", "need at least 2 grid points per axis");

  VectorField3 u;
  Domain3 dom;
  if (kind == PresetKind::bending_limit) {
    dom = Domain3{Box2{{0.0, 0.0}, {1.0, 1.0}}, 1.0};
    u = bending_counterexample(m.rho, 0.125, 0.25, dom).limit();
  } else {
    PresetSpec ps;
    ps.kind = kind;
    ps.gamma = m.gamma;
    ps.r = m.r;
    dom = default_domain(kind);
    u = preset(ps, dom).deformation();
  }

  std::vector<Vector2d> fiber_points;
  for (const std::string& f : m.fibers) {
    const std::vector<double> v = parse_doubles("--fiber", f, 2);
    fiber_points.emplace_back(v[0], v[1]);
  }
  if (!std::isnan(m.fiber_row)) {
    if (m.fiber_count < 1) flag_error("--fiber-count", "need at least 1");
    const double w = dom.omega.width(0);
    for (int i = 0; i < m.fiber_count; ++i)
      fiber_points.emplace_back(dom.omega.lo.x() + w * (i + 0.5) / m.fiber_count, m.fiber_row);
  }

  std::string path = m.out;
  if (path.empty()) path = preset_name(kind) + "." + m.format;
  const MeshFormat fmt = (m.format == "vtk") ? MeshFormat::vtk : MeshFormat::obj;
  export_mesh(u, dom, m.resolution, fmt, path, fiber_points);
  std::cout << "wrote " << path << " (" << m.format << ", resolution " << m.resolution;
  if (!fiber_points.empty()) std::cout << ", " << fiber_points.size() << " fiber lines";
  std::cout << ")\n";
}

void attach_mesh_opts(CLI::App* cmd, const std::shared_ptr<MeshOpts>& m, bool full) {
  cmd->add_option("--export,--format", m->format, "mesh format: obj | vtk")
      ->check(CLI::IsMember({"obj", "vtk"}));
  cmd->add_option("--out", m->out, "output path (default: <preset>.<format>)");
  cmd->add_option("--resolution", m->resolution, "grid points per axis (>= 2)");
  cmd->add_option("--gamma", m->gamma, "shear coefficient");
  cmd->add_option("--r", m->r, "tyre radius");
  cmd->add_option("--rho", m->rho, "bending arc radius");
  if (full) {
    cmd->add_option("--fiber", m->fibers, "add a fiber polyline at 'x1,x2' (repeatable)");
    cmd->add_option("--fiber-row", m->fiber_row, "add a row of fiber polylines at this x2");
    cmd->add_option("--fiber-count", m->fiber_count, "fibers in the row (default 8)");
  }
}

void add_demo(CLI::App& app) {
  auto* cmd = app.add_subcommand("demo", "export the deformed shape of a gallery preset");
  auto preset_arg = std::make_shared<std::string>();
  auto m = std::make_shared<MeshOpts>();
  cmd->add_option("preset", *preset_arg,
                  "paraboloid | shear | twist | tyre | hedgehog | trophy | rigid | bending_limit")
      ->required();
  attach_mesh_opts(cmd, m, false);
  cmd->callback([preset_arg, m] { run_mesh_export(*preset_arg, *m); });
}

void add_export_mesh(CLI::App& app) {
  auto* cmd = app.add_subcommand("export-mesh", "deformed boundary mesh with optional fiber lines");
  auto preset_arg = std::make_shared<std::string>();
  auto m = std::make_shared<MeshOpts>();
  cmd->add_option("preset", *preset_arg, "gallery preset name")->required();
  attach_mesh_opts(cmd, m, true);
  cmd->callback([preset_arg, m] { run_mesh_export(*preset_arg, *m); });
}

void add_approximate(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "approximate", "build one sequence member and select its translation offset");
  auto opts = std::make_shared<LayoutOpts>();
  opts->attach(cmd);
  auto preset_arg = std::make_shared<std::string>("paraboloid");
  auto gamma = std::make_shared<double>(1.0);
  auto r = std::make_shared<double>(1.5);
  auto p = std::make_shared<double>(4.0);
  auto samples = std::make_shared<int>(32);
  auto no_select = std::make_shared<bool>(false);
  auto out = std::make_shared<std::string>();
  cmd->add_option("preset", *preset_arg, "director-form preset name");
  cmd->add_option("--gamma", *gamma, "shear coefficient");
  cmd->add_option("--r", *r, "tyre radius");
  cmd->add_option("--p", *p, "integrability exponent")->check(CLI::PositiveNumber);
  cmd->add_option("--samples", *samples, "translation candidates")->check(CLI::PositiveNumber);
  cmd->add_flag("--no-select", *no_select, "skip translation selection (use a = 0)");
  cmd->add_option("--out", *out, "output path (default: stdout)");
  cmd->callback([opts, preset_arg, gamma, r, p, samples, no_select, out] {
    const PresetKind kind = preset_flag("preset", *preset_arg);
    const FiberLayout layout = opts->build();
    ApproxDeformation ad = build_member(kind, *gamma, *r, layout, Vector2d::Zero());

    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["preset"] = preset_name(kind);
    j["eps"] = layout.epsilon();
    j["p"] = *p;
    if (!*no_select) {
      QuadratureSpec qs;
      qs.n1 = 6;
      qs.n2 = 6;
      qs.n3 = 4;
      const TranslationChoice tc =
          select_translation(ad.rf, layout, ad.id, *p, *samples, opts->seed, qs);
      ad = build(ad.rf, layout, ad.id, tc.a);
      j["translation"] = {tc.a.x(), tc.a.y()};
      j["grad_norm"] = tc.grad_norm;
      j["sample_mean"] = tc.mean;
      j["min_le_mean"] = tc.grad_norm <= tc.mean;
    } else {
      j["translation"] = {0.0, 0.0};
    }

    // Spot-check exact stiff-set rigidity of the built member.
    const VectorField3 u = ad.field();
    Rng rng(Rng::mix(opts->seed, 0x6d656d62u, 0));
    const Box2 om = ad.rf.domain.omega;
    double worst = 0.0;
    int got = 0;
    long draws = 0;
    while (got < 200 && ++draws < 100000) {
      const Vector2d xp(rng.uniform(om.lo.x(), om.hi.x()), rng.uniform(om.lo.y(), om.hi.y()));
      if (!is_rigid(xp, layout)) continue;
      const double x3 = rng.uniform(0.0, ad.rf.domain.height);
      worst = std::max(worst, dist_SO3(grad(u, Vector3d(xp.x(), xp.y(), x3))));
      ++got;
    }
    j["stiff_sample_max_dist"] = worst;
    emit(*out, j.dump(2) + "\n");
  });
}

void add_converge(CLI::App& app) {
  auto* cmd = app.add_subcommand("converge", "distance-to-limit sweep with a fitted rate");
  auto opts = std::make_shared<LayoutOpts>();
  opts->attach(cmd);
  cmd->get_option("--eps")->description("comma-separated eps list, e.g. 1/8,1/16,1/32");
  auto preset_arg = std::make_shared<std::string>("twist");
  auto gamma = std::make_shared<double>(1.0);
  auto r = std::make_shared<double>(1.5);
  auto p = std::make_shared<double>(4.0);
  auto out = std::make_shared<std::string>();
  auto json_out = std::make_shared<bool>(false);
  cmd->add_option("--preset", *preset_arg, "director-form preset name");
  cmd->add_option("--gamma", *gamma, "shear coefficient");
  cmd->add_option("--r", *r, "tyre radius");
  cmd->add_option("--p", *p, "integrability exponent")->check(CLI::PositiveNumber);
  cmd->add_option("--out", *out, "output path (default: stdout)");
  cmd->add_flag("--json", *json_out, "emit JSON instead of CSV");
  cmd->callback([opts, preset_arg, gamma, r, p, out, json_out] {
    const PresetKind kind = preset_flag("--preset", *preset_arg);
    const std::vector<double> eps_list = parse_eps_list_flag("--eps", opts->eps);
    ConvergenceReport rep;
    for (const double eps : eps_list) {
      LayoutOpts lo = *opts;
      lo.eps = format_double(eps);
      const FiberLayout layout = lo.build();
      const ApproxDeformation ad = build_member(kind, *gamma, *r, layout, Vector2d::Zero());
      QuadratureSpec qs;
      qs.n1 = 8;
      qs.n2 = 8;
      qs.n3 = 6;
      const double v =
          lp_norm_diff(ad.field(), ad.rf.deformation(), *p, Region::whole(), qs, &layout);
      rep.add(eps, "limit_lp_distance", v);
    }
    rep.fit("limit_lp_distance");
    emit(*out, *json_out ? rep.to_json() + "\n" : rep.to_csv());
  });
}

void add_counterexample(CLI::App& app) {
  auto* cmd = app.add_subcommand("counterexample", "escape routes from the admissible class");
  cmd->require_subcommand(1);

  // bending: layered isometric bending with an x3-dependent limit director.
  auto* bend = cmd->add_subcommand("bending", "layer-bending sequence and its limit");
  auto rho = std::make_shared<double>(2.0);
  auto alpha_b = std::make_shared<double>(0.25);
  auto p_b = std::make_shared<double>(4.0);
  auto eps_b = std::make_shared<std::string>("1/8,1/16,1/32,1/64,1/128");
  auto out_b = std::make_shared<std::string>();
  auto json_b = std::make_shared<bool>(false);
  bend->add_option("--rho", *rho, "arc radius (> L/pi)");
  bend->add_option("--alpha", *alpha_b, "layer margin");
  bend->add_option("--p", *p_b, "integrability exponent")->check(CLI::PositiveNumber);
  bend->add_option("--eps", *eps_b, "comma-separated eps list");
  bend->add_option("--out", *out_b, "output path (default: stdout)");
  bend->add_flag("--json", *json_b, "emit JSON instead of CSV");
  bend->callback([rho, alpha_b, p_b, eps_b, out_b, json_b] {
    const Domain3 dom{Box2{{0.0, 0.0}, {1.0, 1.0}}, 1.0};
    ConvergenceReport rep;
    for (const double eps : parse_eps_list_flag("--eps", *eps_b)) {
      const BendingSequence bs = bending_counterexample(*rho, eps, *alpha_b, dom);
      EnergyDensitySpec sd;
      sd.soft_p = *p_b;
      sd.diagnostic_p = *p_b;
      QuadratureSpec quad;
      quad.n1 = 8;
      quad.n2 = 2;
      quad.n3 = 8;
      const auto mask = [bs](const Vector2d& xp) { return bs.rigid_layer(xp.x()); };
      const EnergyReport er = energy_masked(bs.u_eps(), mask, bs.layer_breaks(), {}, sd, quad);
      rep.add(eps, "stiff_energy", er.rigid_diagnostic);
    }
    const RateFit fit = rep.fit("stiff_energy");
    const BendingSequence bs =
        bending_counterexample(*rho, parse_eps_list_flag("--eps", *eps_b).front(), *alpha_b, dom);
    const MembershipReport a0 = membership_A0(bs.limit());
    const LayeredReport lay = membership_B0(bs.limit());
    rep.verdicts.push_back({"stiff_energy_rate_p",
                            std::abs(fit.slope - *p_b) <= 0.15,
                            "slope " + format_double(fit.slope)});
    rep.verdicts.push_back({"limit_leaves_admissible_class", !a0.pass,
                            "axial director variation " + format_double(a0.x3_dependence)});
    rep.verdicts.push_back({"limit_layered_affine_in_x2_only",
                            lay.affine_x2 <= 1e-8 && lay.affine_x3 >= 0.1,
                            "x2 " + format_double(lay.affine_x2) + ", x3 " +
                                format_double(lay.affine_x3)});
    emit(*out_b, *json_b ? rep.to_json() + "\n" : rep.to_csv());
  });

  // beta: subcritical volume-order perturbations of a built sequence.
  auto* beta = cmd->add_subcommand("beta", "perturbed sequences at a prescribed decay order");
  auto opts = std::make_shared<LayoutOpts>();
  opts->attach(beta);
  beta->get_option("--eps")->description("comma-separated eps list");
  opts->eps = "1/8,1/16,1/32";
  auto preset_arg = std::make_shared<std::string>("twist");
  auto p_x = std::make_shared<double>(4.0);
  auto beta_x = std::make_shared<double>(0.0);
  auto out_x = std::make_shared<std::string>();
  auto json_x = std::make_shared<bool>(false);
  beta->add_option("--preset", *preset_arg, "director-form preset name");
  beta->add_option("--p", *p_x, "integrability exponent")->check(CLI::PositiveNumber);
  beta->add_option("--beta", *beta_x, "perturbation order (default 3p)");
  beta->add_option("--out", *out_x, "output path (default: stdout)");
  beta->add_flag("--json", *json_x, "emit JSON instead of CSV");
  beta->callback([opts, preset_arg, p_x, beta_x, out_x, json_x] {
    const PresetKind kind = preset_flag("--preset", *preset_arg);
    const double b = (*beta_x > 0.0) ? *beta_x : 3.0 * (*p_x);
    ConvergenceReport rep;
    for (const double eps : parse_eps_list_flag("--eps", opts->eps)) {
      LayoutOpts lo = *opts;
      lo.eps = format_double(eps);
      const FiberLayout layout = lo.build();
      const ApproxDeformation ad = build_member(kind, 1.0, 1.5, layout, Vector2d::Zero());
      const VectorField3 base = ad.field();
      const VectorField3 pert = perturb_beta(ad, b, *p_x);
      QuadratureSpec qs;
      qs.n1 = 4;
      qs.n2 = 4;
      qs.n3 = 6;
      const PiecewiseRotationField prf_b = extract_rotations(base, layout, ad.rf.domain);
      const PiecewiseRotationField prf_p = extract_rotations(pert, layout, ad.rf.domain);
      rep.add(eps, "pw_rigid_error_base", piecewise_rigid_error(base, prf_b, *p_x, qs));
      rep.add(eps, "pw_rigid_error_perturbed", piecewise_rigid_error(pert, prf_p, *p_x, qs));
      EnergyDensitySpec sd;
      sd.soft_p = *p_x;
      sd.diagnostic_p = *p_x;
      rep.add(eps, "stiff_distance_energy", energy(pert, layout, sd, qs).rigid_diagnostic);
    }
    const RateFit fit = rep.fit("stiff_distance_energy");
    rep.verdicts.push_back({"stiff_energy_rate_beta", fit.slope >= b - 0.3,
                            "slope " + format_double(fit.slope) + " (want >= " +
                                format_double(b - 0.3) + ")"});
    emit(*out_x, *json_x ? rep.to_json() + "\n" : rep.to_csv());
  });
}

void add_lemma31(CLI::App& app) {
  auto* cmd =
      app.add_subcommand("lemma31", "slab lower bound: interpolant and discrete minimizer");
  auto p = std::make_shared<double>(2.0);
  auto m = std::make_shared<double>(0.0);
  auto L = std::make_shared<std::string>("1,1,1");
  auto A1 = std::make_shared<std::string>();
  auto A2 = std::make_shared<std::string>();
  auto b1 = std::make_shared<std::string>();
  auto b2 = std::make_shared<std::string>();
  auto n = std::make_shared<int>(25);
  auto brute = std::make_shared<bool>(false);
  auto grid = std::make_shared<int>(17);
  auto out = std::make_shared<std::string>();
  cmd->add_option("--p", *p, "integrability exponent")->check(CLI::PositiveNumber);
  cmd->add_option("--m", *m, "slab shear slope");
  cmd->add_option("--L", *L, "edge lengths L1,L2,L3");
  cmd->add_option("--A1", *A1, "left trace matrix, 9 row-major entries (default 0)");
  cmd->add_option("--A2", *A2, "right trace matrix, 9 row-major entries (default e1*e3^T)");
  cmd->add_option("--b1", *b1, "left trace offset (default 0)");
  cmd->add_option("--b2", *b2, "right trace offset (default -L3/2 * (A2-A1)e3 - A1e1*L1)");
  cmd->add_option("--n", *n, "quadrature panels per axis")->check(CLI::PositiveNumber);
  cmd->add_flag("--brute-force", *brute, "also run the p=2 discrete minimizer");
  cmd->add_option("--grid", *grid, "brute-force grid nodes per axis");
  cmd->add_option("--out", *out, "output path (default: stdout)");
  cmd->callback([p, m, L, A1, A2, b1, b2, n, brute, grid, out] {
    AffineTraceConfig tc;
    tc.p = *p;
    tc.m = *m;
    const std::vector<double> ls = parse_doubles("--L", *L, 3);
    if (!(ls[0] > 0 && ls[1] > 0 && ls[2] > 0)) flag_error("--L", "edge lengths must be positive");
    tc.L1 = ls[0];
    tc.L2 = ls[1];
    tc.L3 = ls[2];
    tc.A1 = A1->empty() ? Matrix3d::Zero() : parse_matrix("--A1", *A1);
    tc.A2 = A2->empty() ? (tc.A1 + Vector3d::UnitX() * Vector3d::UnitZ().transpose()).eval()
                        : parse_matrix("--A2", *A2);
    tc.b1 = b1->empty() ? Vector3d::Zero() : parse_vec3("--b1", *b1);
    tc.b2 = b2->empty() ? (tc.b1 - 0.5 * tc.L3 * ((tc.A2 - tc.A1) * Vector3d::UnitZ()) -
                           tc.L1 * (tc.A1 * Vector3d::UnitX()))
                              .eval()
                        : parse_vec3("--b2", *b2);

    std::vector<Lemma31Case> cases;
    cases.push_back({"interpolant", lemma31_verify(lemma31_interpolant(tc), tc, *n)});
    if (*brute) cases.push_back({"brute_force", lemma31_brute_force(tc, *grid)});
    emit(*out, lemma31_to_csv(cases));
  });
}

void add_verify(CLI::App& app) {
  auto* cmd = app.add_subcommand("verify", "run the full acceptance battery (twice)");
  auto config_path = std::make_shared<std::string>();
  auto report_path = std::make_shared<std::string>();
  auto p = std::make_shared<double>(-1.0);
  auto alpha = std::make_shared<double>(-1.0);
  auto delta = std::make_shared<double>(-1.0);
  auto seed = std::make_shared<std::int64_t>(-1);
  cmd->add_option("--config", *config_path, "JSON config file (schema_version required)");
  cmd->add_option("--report", *report_path, "write the report text here as well");
  cmd->add_option("--p", *p, "override integrability exponent");
  cmd->add_option("--alpha", *alpha, "override margin parameter");
  cmd->add_option("--delta", *delta, "override stiff-square side fraction");
  cmd->add_option("--seed", *seed, "override seed");
  cmd->callback([config_path, report_path, p, alpha, delta, seed] {
    VerifyConfig cfg;
    if (!config_path->empty()) {
      std::ifstream in(*config_path, std::ios::binary);
      if (!in) flag_error("--config", "cannot open '" + *config_path + "'");
      std::stringstream ss;
      ss << in.rdbuf();
      try {
        cfg = VerifyConfig::from_json(ss.str());
      } catch (const std::exception& e) {
        flag_error("--config", e.what());
      }
    }
    if (*p > 0.0) cfg.p = *p;
    if (*alpha > 0.0) cfg.alpha = *alpha;
    if (*delta > 0.0) cfg.delta = *delta;
    if (*seed >= 0) cfg.seed = static_cast<std::uint64_t>(*seed);

    const VerificationReport rep = run_verification(cfg);
    std::cout << rep.canonical;
    if (!report_path->empty()) emit(*report_path, rep.canonical);
    g_exit_code = rep.all_pass() ? 0 : 1;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fiberlab — stiff-fiber deformation sequences, limits, and diagnostics"};
  app.require_subcommand(1);

  add_geometry(app);
  add_phi_report(app);
  add_demo(app);
  add_approximate(app);
  add_converge(app);
  add_verify(app);
  add_counterexample(app);
  add_lemma31(app);
  add_export_mesh(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // --help exits 0; every parse/validation error is a usage error
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return g_exit_code;
}
