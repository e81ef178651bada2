#include "fiberlab/geometry.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace fiberlab {

namespace {

constexpr double kEdgeTol = 1e-12;

bool point_in_polygon(const std::vector<Vector2d>& poly, const Vector2d& p) {
  // Even-odd rule.  Points exactly on an edge may resolve either way; the
  // cross-section boundary is a null set for every integral that uses this.
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vector2d& a = poly[j];
    const Vector2d& b = poly[i];
    const bool crosses = (b[1] > p[1]) != (a[1] > p[1]);
    if (crosses) {
      const double t = (p[1] - b[1]) / (a[1] - b[1]);
      const double xc = b[0] + t * (a[0] - b[0]);
      if (p[0] < xc) inside = !inside;
    }
  }
  return inside;
}

}  // namespace

Domain3::Domain3(const Box2& w, double L) : omega(w), height(L) {
  if (!(w.hi[0] > w.lo[0]) || !(w.hi[1] > w.lo[1])) {
    throw std::invalid_argument("Domain3: cross-section must have positive extent");
  }
  if (!(L > 0.0)) throw std::invalid_argument("Domain3: height must be positive");
}

void FiberLayout::validate() const {
  if (!(eps_ > 0.0)) throw std::invalid_argument("FiberLayout: epsilon must be positive");
  if (!(alpha_ > 0.0 && alpha_ < 0.5)) {
    throw std::invalid_argument("FiberLayout: alpha must lie in (0, 1/2)");
  }
  if (!(delta_ > 0.0)) throw std::invalid_argument("FiberLayout: delta must be positive");
  if (!(delta_ + 2.0 * alpha_ < 1.0)) {
    throw std::invalid_argument("FiberLayout: need delta + 2*alpha < 1");
  }
  if (mode_ == CenterMode::periodic) {
    const double lo = alpha_ + 0.5 * delta_;
    const double hi = 1.0 - alpha_ - 0.5 * delta_;
    for (int c = 0; c < 2; ++c) {
      if (!(a_[c] >= lo && a_[c] < hi)) {
        throw std::invalid_argument("FiberLayout: center outside admissible window");
      }
    }
  }
  if (shape_ == FiberShape::polygon) {
    if (mode_ != CenterMode::periodic) {
      throw std::invalid_argument("FiberLayout: polygon cross-sections require periodic centers");
    }
    if (polygon_.size() < 3) throw std::invalid_argument("FiberLayout: polygon needs >= 3 vertices");
    for (const Vector2d& v : polygon_) {
      if (!(v[0] >= alpha_ - kEdgeTol && v[0] <= 1.0 - alpha_ + kEdgeTol && v[1] >= alpha_ - kEdgeTol &&
            v[1] <= 1.0 - alpha_ + kEdgeTol)) {
        throw std::invalid_argument("FiberLayout: polygon vertex outside the margin box");
      }
    }
    // The inner square must be covered: check its corners (sufficient for the
    // convex shapes this supports; sampled edges guard mild non-convexity).
    for (int cx = -1; cx <= 1; cx += 2) {
      for (int cy = -1; cy <= 1; cy += 2) {
        const Vector2d corner = a_ + 0.5 * delta_ * Vector2d(cx, cy) * (1.0 - 1e-9);
        if (!point_in_polygon(polygon_, corner)) {
          throw std::invalid_argument("FiberLayout: polygon does not contain the inner square");
        }
      }
    }
  }
}

FiberLayout FiberLayout::periodic(double eps, double alpha, double delta, const Vector2d& a) {
  FiberLayout l;
  l.eps_ = eps;
  l.alpha_ = alpha;
  l.delta_ = delta;
  l.mode_ = CenterMode::periodic;
  l.shape_ = FiberShape::square;
  l.a_ = a;
  l.validate();
  return l;
}

FiberLayout FiberLayout::periodic_centered(double eps, double alpha, double delta) {
  return periodic(eps, alpha, delta, Vector2d(0.5, 0.5));
}

FiberLayout FiberLayout::jittered(double eps, double alpha, double delta, std::uint64_t seed) {
  FiberLayout l;
  l.eps_ = eps;
  l.alpha_ = alpha;
  l.delta_ = delta;
  l.mode_ = CenterMode::jittered;
  l.shape_ = FiberShape::square;
  l.seed_ = seed;
  l.a_ = Vector2d(0.5, 0.5);
  l.validate();
  return l;
}

FiberLayout FiberLayout::polygonal(double eps, double alpha, double delta, const Vector2d& a,
                                   std::vector<Vector2d> cell_polygon) {
  FiberLayout l;
  l.eps_ = eps;
  l.alpha_ = alpha;
  l.delta_ = delta;
  l.mode_ = CenterMode::periodic;
  l.shape_ = FiberShape::polygon;
  l.a_ = a;
  l.polygon_ = std::move(cell_polygon);
  l.validate();
  return l;
}

Vector2d FiberLayout::unit_center(CellIndex k) const {
  if (mode_ == CenterMode::periodic) return a_;
  const double lo = alpha_ + 0.5 * delta_;
  const double hi = 1.0 - alpha_ - 0.5 * delta_;
  const std::uint64_t h1 =
      Rng::mix(seed_, static_cast<std::uint64_t>(k.i), static_cast<std::uint64_t>(k.j));
  const std::uint64_t h2 = Rng::mix(h1, 0x5bf03635ull, 0xc4f5a1c3ull);
  const double u1 = static_cast<double>(h1 >> 11) * 0x1.0p-53;
  const double u2 = static_cast<double>(h2 >> 11) * 0x1.0p-53;
  return {lo + (hi - lo) * u1, lo + (hi - lo) * u2};
}

Vector2d FiberLayout::center(CellIndex k) const {
  const Vector2d a = unit_center(k);
  return eps_ * Vector2d(static_cast<double>(k.i) + a[0], static_cast<double>(k.j) + a[1]);
}

Box2 FiberLayout::inner_square(CellIndex k) const {
  const Vector2d c = center(k);
  const double h = 0.5 * eps_ * delta_;
  return Box2{{c[0] - h, c[1] - h}, {c[0] + h, c[1] + h}};
}

Box2 FiberLayout::cell(CellIndex k) const {
  return Box2{{eps_ * static_cast<double>(k.i), eps_ * static_cast<double>(k.j)},
              {eps_ * static_cast<double>(k.i + 1), eps_ * static_cast<double>(k.j + 1)}};
}

Box2 FiberLayout::margin_box(CellIndex k) const {
  return Box2{{eps_ * (static_cast<double>(k.i) + alpha_), eps_ * (static_cast<double>(k.j) + alpha_)},
              {eps_ * (static_cast<double>(k.i + 1) - alpha_),
               eps_ * (static_cast<double>(k.j + 1) - alpha_)}};
}

std::vector<Vector2d> FiberLayout::cross_section(CellIndex k) const {
  if (shape_ == FiberShape::square) {
    const Box2 s = inner_square(k);
    return {{s.lo[0], s.lo[1]}, {s.hi[0], s.lo[1]}, {s.hi[0], s.hi[1]}, {s.lo[0], s.hi[1]}};
  }
  std::vector<Vector2d> out;
  out.reserve(polygon_.size());
  for (const Vector2d& v : polygon_) {
    out.push_back(eps_ * (Vector2d(static_cast<double>(k.i), static_cast<double>(k.j)) + v));
  }
  return out;
}

CellIndex cell_of(const Vector2d& x, const FiberLayout& layout) {
  const double eps = layout.epsilon();
  return {static_cast<long>(std::floor(x[0] / eps)), static_cast<long>(std::floor(x[1] / eps))};
}

bool is_rigid(const Vector2d& x, const FiberLayout& layout) {
  const CellIndex k = cell_of(x, layout);
  if (layout.shape() == FiberShape::square) return layout.inner_square(k).contains(x);
  return point_in_polygon(layout.cross_section(k), x);
}

bool is_rigid(const Vector3d& x, const FiberLayout& layout) {
  return is_rigid(Vector2d(x[0], x[1]), layout);
}

std::vector<CellIndex> cells_intersecting(const FiberLayout& layout, const Box2& omega) {
  const double eps = layout.epsilon();
  std::vector<CellIndex> out;
  const long i0 = static_cast<long>(std::floor(omega.lo[0] / eps));
  const long i1 = static_cast<long>(std::ceil(omega.hi[0] / eps));
  const long j0 = static_cast<long>(std::floor(omega.lo[1] / eps));
  const long j1 = static_cast<long>(std::ceil(omega.hi[1] / eps));
  for (long i = i0; i < i1; ++i) {
    for (long j = j0; j < j1; ++j) {
      const Box2 c = layout.cell({i, j});
      if (c.lo[0] < omega.hi[0] && c.hi[0] > omega.lo[0] && c.lo[1] < omega.hi[1] &&
          c.hi[1] > omega.lo[1]) {
        out.push_back({i, j});
      }
    }
  }
  return out;
}

std::vector<CellIndex> interior_cells(const FiberLayout& layout, const Box2& omega) {
  std::vector<CellIndex> out;
  const double tol = 1e-9 * layout.epsilon();
  for (CellIndex k : cells_intersecting(layout, omega)) {
    const Box2 c = layout.cell(k);
    if (c.lo[0] >= omega.lo[0] - tol && c.lo[1] >= omega.lo[1] - tol &&
        c.hi[0] <= omega.hi[0] + tol && c.hi[1] <= omega.hi[1] + tol) {
      out.push_back(k);
    }
  }
  return out;
}

double rect_intersection_area(const Box2& a, const Box2& b) {
  const double w = std::min(a.hi[0], b.hi[0]) - std::max(a.lo[0], b.lo[0]);
  const double h = std::min(a.hi[1], b.hi[1]) - std::max(a.lo[1], b.lo[1]);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double clipped_polygon_area(const std::vector<Vector2d>& poly, const Box2& clip) {
  // Sutherland–Hodgman against the four half-planes of the rectangle.
  std::vector<Vector2d> cur = poly;
  auto clip_halfplane = [&cur](auto inside, auto intersect) {
    std::vector<Vector2d> next;
    const std::size_t n = cur.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vector2d& p = cur[i];
      const Vector2d& q = cur[(i + 1) % n];
      const bool pi = inside(p);
      const bool qi = inside(q);
      if (pi) next.push_back(p);
      if (pi != qi) next.push_back(intersect(p, q));
    }
    cur = std::move(next);
  };
  for (int axis = 0; axis < 2; ++axis) {
    for (int side = 0; side < 2; ++side) {
      const double bound = side == 0 ? clip.lo[axis] : clip.hi[axis];
      const double sign = side == 0 ? 1.0 : -1.0;
      clip_halfplane(
          [axis, bound, sign](const Vector2d& p) { return sign * (p[axis] - bound) >= 0.0; },
          [axis, bound](const Vector2d& p, const Vector2d& q) {
            const double t = (bound - p[axis]) / (q[axis] - p[axis]);
            return Vector2d(p + t * (q - p));
          });
      if (cur.empty()) return 0.0;
    }
  }
  double twice = 0.0;
  for (std::size_t i = 0, n = cur.size(); i < n; ++i) {
    const Vector2d& p = cur[i];
    const Vector2d& q = cur[(i + 1) % n];
    twice += p[0] * q[1] - q[0] * p[1];
  }
  return 0.5 * std::abs(twice);
}

double rigid_volume_fraction(const FiberLayout& layout, const Domain3& domain) {
  const Box2& omega = domain.omega;
  const std::vector<CellIndex> cells = cells_intersecting(layout, omega);
  if (cells.empty()) {
    throw std::invalid_argument("rigid_volume_fraction: no lattice cell intersects the cross-section");
  }
  double area = 0.0;
  for (CellIndex k : cells) {
    if (layout.shape() == FiberShape::square) {
      area += rect_intersection_area(layout.inner_square(k), omega);
    } else {
      area += clipped_polygon_area(layout.cross_section(k), omega);
    }
  }
  return area / omega.area();
}

SlopeInfo slope_bound(const FiberLayout& layout, long window) {
  SlopeInfo info;
  info.bound = layout.max_slope_bound();
  info.realized = 0.0;
  if (layout.center_mode() == CenterMode::jittered) {
    for (long i = 0; i < window; ++i) {
      for (long j = 0; j < window; ++j) {
        for (Direction dir : {Direction::right, Direction::up}) {
          const Connector c = connector(layout, {i, j}, dir, ConnectorVariant::gap);
          info.realized = std::max(info.realized, std::abs(c.m));
        }
      }
    }
  }
  return info;
}

Connector connector(const FiberLayout& layout, CellIndex k, Direction dir, ConnectorVariant variant,
                    const std::optional<Box2>& within) {
  const CellIndex kn =
      dir == Direction::right ? CellIndex{k.i + 1, k.j} : CellIndex{k.i, k.j + 1};
  if (within) {
    const double tol = 1e-9 * layout.epsilon();
    for (CellIndex q : {k, kn}) {
      const Box2 c = layout.cell(q);
      if (!within->contains_box(c, tol)) {
        throw std::invalid_argument("connector: neighbor cell lies outside the given region");
      }
    }
  }
  const double eps = layout.epsilon();
  const double half = variant == ConnectorVariant::gap ? 0.5 * eps * layout.delta()
                                                       : 0.25 * eps * layout.delta();
  const int s = dir == Direction::right ? 0 : 1;  // spanning axis
  const int t = 1 - s;                            // transverse axis
  const Vector2d ca = layout.center(k);
  const Vector2d cb = layout.center(kn);

  Connector c;
  c.direction = dir;
  c.variant = variant;
  c.mu = variant == ConnectorVariant::overlap ? 0.25 * eps * layout.delta() : 0.0;
  c.L2 = 2.0 * half;
  const double lo = ca[s] + half;           // spanning coordinate of the first joined edge
  const double hi = cb[s] - half;           // spanning coordinate of the second joined edge
  c.L1 = hi - lo;
  if (!(c.L1 > 0.0)) throw std::logic_error("connector: non-positive span");
  c.m = (cb[t] - ca[t]) / c.L1;
  c.anchor[s] = lo;
  c.anchor[t] = ca[t] - half;
  return c;
}

std::string to_json(const FiberLayout& layout) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["epsilon"] = layout.epsilon();
  j["alpha"] = layout.alpha();
  j["delta"] = layout.delta();
  j["center_mode"] = layout.center_mode() == CenterMode::periodic ? "periodic" : "jittered";
  j["center"] = {layout.periodic_center()[0], layout.periodic_center()[1]};
  j["seed"] = layout.seed();
  j["shape"] = layout.shape() == FiberShape::square ? "square" : "polygon";
  if (layout.shape() == FiberShape::polygon) {
    nlohmann::json poly = nlohmann::json::array();
    for (const Vector2d& v : layout.cell_polygon()) poly.push_back({v[0], v[1]});
    j["polygon"] = poly;
  }
  return j.dump(2) + "\n";
}

FiberLayout layout_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  static const std::set<std::string> known = {"schema_version", "epsilon", "alpha", "delta",
                                              "center_mode",    "center",  "seed",  "shape",
                                              "polygon"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) {
      throw std::invalid_argument("layout_from_json: unknown key '" + it.key() + "'");
    }
  }
  if (j.at("schema_version").get<int>() != 1) {
    throw std::invalid_argument("layout_from_json: unsupported schema_version");
  }
  const double eps = j.at("epsilon").get<double>();
  const double alpha = j.at("alpha").get<double>();
  const double delta = j.at("delta").get<double>();
  const std::string mode = j.at("center_mode").get<std::string>();
  const std::string shape = j.value("shape", std::string("square"));
  if (mode == "jittered") {
    if (shape != "square") throw std::invalid_argument("layout_from_json: jittered implies square");
    return FiberLayout::jittered(eps, alpha, delta, j.at("seed").get<std::uint64_t>());
  }
  if (mode != "periodic") throw std::invalid_argument("layout_from_json: bad center_mode");
  const auto& c = j.at("center");
  const Vector2d a(c.at(0).get<double>(), c.at(1).get<double>());
  if (shape == "square") return FiberLayout::periodic(eps, alpha, delta, a);
  if (shape != "polygon") throw std::invalid_argument("layout_from_json: bad shape");
  std::vector<Vector2d> poly;
  for (const auto& v : j.at("polygon")) poly.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
  return FiberLayout::polygonal(eps, alpha, delta, a, std::move(poly));
}

}  // namespace fiberlab
