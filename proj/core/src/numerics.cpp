#include "fiberlab/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace fiberlab {

Vector3d Rng::unit_vector() {
  const double z = 1.0 - 2.0 * uniform();
  const double phi = 2.0 * M_PI * uniform();
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

Vector2d Rng::disk(double r) {
  const double rho = r * std::sqrt(uniform());
  const double phi = 2.0 * M_PI * uniform();
  return {rho * std::cos(phi), rho * std::sin(phi)};
}

std::uint64_t Rng::mix(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  auto scramble = [](std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  };
  std::uint64_t h = scramble(a + 0x9E3779B97F4A7C15ull);
  h = scramble(h ^ (b + 0x9E3779B97F4A7C15ull));
  h = scramble(h ^ (c + 0x9E3779B97F4A7C15ull));
  return h;
}

std::vector<double> axis_breaks(double lo, double hi, int n, const std::vector<double>& extra) {
  if (!(hi > lo)) throw std::invalid_argument("axis_breaks: empty interval");
  if (n < 1) throw std::invalid_argument("axis_breaks: need at least one panel");
  std::vector<double> b;
  b.reserve(static_cast<std::size_t>(n) + extra.size() + 1);
  for (int i = 0; i <= n; ++i) {
    b.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n));
  }
  // Keep endpoints exact so unions of adjacent boxes tile without gaps.
  b.front() = lo;
  b.back() = hi;
  for (double e : extra) {
    if (e > lo && e < hi) b.push_back(e);
  }
  std::sort(b.begin(), b.end());
  // Drop near-duplicate breakpoints; panels below ~1e-12*(hi-lo) add noise only.
  const double min_w = 1e-12 * (hi - lo);
  std::vector<double> out;
  out.reserve(b.size());
  out.push_back(b.front());
  for (double v : b) {
    if (v - out.back() > min_w) out.push_back(v);
  }
  if (out.back() != hi) out.back() = hi;
  return out;
}

QuadAxis axis_midpoints(const std::vector<double>& breaks) {
  QuadAxis ax;
  ax.mid.reserve(breaks.size() - 1);
  ax.weight.reserve(breaks.size() - 1);
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    ax.mid.push_back(0.5 * (breaks[i] + breaks[i + 1]));
    ax.weight.push_back(breaks[i + 1] - breaks[i]);
  }
  return ax;
}

Quadrature2 Quadrature2::on(const Box2& box, int n0, int n1, const std::vector<double>& extra0,
                            const std::vector<double>& extra1) {
  return Quadrature2(axis_midpoints(axis_breaks(box.lo[0], box.hi[0], n0, extra0)),
                     axis_midpoints(axis_breaks(box.lo[1], box.hi[1], n1, extra1)));
}

Quadrature3 Quadrature3::on(const Box3& box, int n0, int n1, int n2,
                            const std::vector<double>& extra0, const std::vector<double>& extra1,
                            const std::vector<double>& extra2) {
  return Quadrature3(axis_midpoints(axis_breaks(box.lo[0], box.hi[0], n0, extra0)),
                     axis_midpoints(axis_breaks(box.lo[1], box.hi[1], n1, extra1)),
                     axis_midpoints(axis_breaks(box.lo[2], box.hi[2], n2, extra2)));
}

}  // namespace fiberlab
