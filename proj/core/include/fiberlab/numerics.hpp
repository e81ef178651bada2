#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace fiberlab {

using Eigen::Matrix2d;
using Eigen::Matrix3d;
using Eigen::Vector2d;
using Eigen::Vector3d;

/// Axis-aligned planar box. `lo` inclusive, `hi` exclusive wherever set
/// membership matters (matching the half-open cell convention).
struct Box2 {
  Vector2d lo{0.0, 0.0};
  Vector2d hi{1.0, 1.0};

  double width(int axis) const { return hi[axis] - lo[axis]; }
  double area() const { return width(0) * width(1); }
  bool contains(const Vector2d& x) const {
    return x[0] >= lo[0] && x[0] < hi[0] && x[1] >= lo[1] && x[1] < hi[1];
  }
  bool contains_box(const Box2& inner, double tol = 0.0) const {
    return inner.lo[0] >= lo[0] - tol && inner.lo[1] >= lo[1] - tol &&
           inner.hi[0] <= hi[0] + tol && inner.hi[1] <= hi[1] + tol;
  }
};

struct Box3 {
  Vector3d lo{0.0, 0.0, 0.0};
  Vector3d hi{1.0, 1.0, 1.0};

  double width(int axis) const { return hi[axis] - lo[axis]; }
  double volume() const { return width(0) * width(1) * width(2); }
  bool contains(const Vector3d& x) const {
    for (int a = 0; a < 3; ++a) {
      if (x[a] < lo[a] || x[a] >= hi[a]) return false;
    }
    return true;
  }
};

/// Deterministic PRNG (splitmix64 core). Identical streams on every platform
/// and toolchain, so every seeded quantity in reports and tests is
/// reproducible bit for bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform on the unit sphere.
  Vector3d unit_vector();

  /// Uniform in the open disk of radius `r` (rejection-free polar sampling).
  Vector2d disk(double r);

  /// Order-independent mixing of a seed with a lattice index, used for
  /// per-cell jitter that does not depend on query order.
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c);

 private:
  std::uint64_t state_;
};

/// One quadrature axis: midpoints and panel widths.
struct QuadAxis {
  std::vector<double> mid;
  std::vector<double> weight;
  std::size_t size() const { return mid.size(); }
};

/// Sorted panel boundaries on [lo,hi]: `n` uniform panels refined by the
/// sorted-deduplicated `extra` breakpoints that fall strictly inside.
std::vector<double> axis_breaks(double lo, double hi, int n, const std::vector<double>& extra = {});

QuadAxis axis_midpoints(const std::vector<double>& breaks);

/// Tensor-product midpoint rule on a box. Panels may be evaluated
/// concurrently; the reduction order is fixed (per-slice partials summed in
/// index order), so results do not depend on thread count.
class Quadrature2 {
 public:
  Quadrature2(QuadAxis a0, QuadAxis a1) : ax_{std::move(a0), std::move(a1)} {}

  static Quadrature2 on(const Box2& box, int n0, int n1,
                        const std::vector<double>& extra0 = {},
                        const std::vector<double>& extra1 = {});

  template <class F>
  double integrate(F&& f) const {
    const QuadAxis& A = ax_[0];
    const QuadAxis& B = ax_[1];
    std::vector<double> partial(A.size(), 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(A.size()); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < B.size(); ++j) {
        s += B.weight[j] * f(Vector2d(A.mid[static_cast<std::size_t>(i)], B.mid[j]));
      }
      partial[static_cast<std::size_t>(i)] = s * A.weight[static_cast<std::size_t>(i)];
    }
    double total = 0.0;
    for (double v : partial) total += v;
    return total;
  }

  const QuadAxis& axis(int a) const { return ax_[a]; }

 private:
  QuadAxis ax_[2];
};

class Quadrature3 {
 public:
  Quadrature3(QuadAxis a0, QuadAxis a1, QuadAxis a2)
      : ax_{std::move(a0), std::move(a1), std::move(a2)} {}

  static Quadrature3 on(const Box3& box, int n0, int n1, int n2,
                        const std::vector<double>& extra0 = {},
                        const std::vector<double>& extra1 = {},
                        const std::vector<double>& extra2 = {});

  template <class F>
  double integrate(F&& f) const {
    const QuadAxis& A = ax_[0];
    const QuadAxis& B = ax_[1];
    const QuadAxis& C = ax_[2];
    std::vector<double> partial(A.size(), 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(A.size()); ++i) {
      const double x = A.mid[static_cast<std::size_t>(i)];
      double si = 0.0;
      for (std::size_t j = 0; j < B.size(); ++j) {
        double sj = 0.0;
        for (std::size_t k = 0; k < C.size(); ++k) {
          sj += C.weight[k] * f(Vector3d(x, B.mid[j], C.mid[k]));
        }
        si += B.weight[j] * sj;
      }
      partial[static_cast<std::size_t>(i)] = si * A.weight[static_cast<std::size_t>(i)];
    }
    double total = 0.0;
    for (double v : partial) total += v;
    return total;
  }

  const QuadAxis& axis(int a) const { return ax_[a]; }
  std::size_t node_count() const { return ax_[0].size() * ax_[1].size() * ax_[2].size(); }

 private:
  QuadAxis ax_[3];
};

}  // namespace fiberlab
