#pragma once

// Synthetic test images.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "vdcs/image.hpp"
#include "vdcs/random.hpp"

namespace vdcs {

/// Number of nonzero entries of the discrete gradient.
inline std::size_t gradient_sparsity(const Image& f, double tol = 0.0) {
  const auto g = gradient(f);
  std::size_t count = 0;
  for (const auto& v : g.dx) count += std::abs(v) > tol;
  for (const auto& v : g.dy) count += std::abs(v) > tol;
  return count;
}

/// Disjoint interior rectangles with random sizes and levels on a zero
/// background, added until the gradient has at least target_edges nonzeros.
/// Rectangles keep a one-pixel gap from each other and from the border so
/// every rectangle a x b contributes exactly 2(a + b) edges.
inline Image rectangles_phantom(std::size_t n, std::size_t target_edges, std::uint64_t seed) {
  log2_exact(n);
  if (n < 8) throw std::invalid_argument("rectangles_phantom: N must be >= 8");
  Image f(n);
  std::vector<char> used(n * n, 0);
  Rng rng(seed);
  std::size_t edges = 0;
  const std::size_t max_side = std::max<std::size_t>(2, n / 4);
  for (int attempt = 0; attempt < 10000 && edges < target_edges; ++attempt) {
    const std::size_t a = 2 + rng.below(max_side - 1);
    const std::size_t b = 2 + rng.below(max_side - 1);
    if (a + 2 >= n || b + 2 >= n) continue;
    const std::size_t r0 = 1 + rng.below(n - a - 1);
    const std::size_t c0 = 1 + rng.below(n - b - 1);
    bool clear = true;
    for (std::size_t r = r0 - 1; r <= r0 + a && clear; ++r)
      for (std::size_t c = c0 - 1; c <= c0 + b && clear; ++c)
        if (r < n && c < n && used[r * n + c]) clear = false;
    if (!clear) continue;
    const double level = 0.25 + 0.75 * rng.uniform();
    for (std::size_t r = r0; r < r0 + a; ++r)
      for (std::size_t c = c0; c < c0 + b; ++c) {
        f(r, c) = level;
        used[r * n + c] = 1;
      }
    edges += 2 * (a + b);
  }
  return f;
}

/// Modified Shepp-Logan head phantom rasterized at pixel centres.
inline Image shepp_logan(std::size_t n) {
  log2_exact(n);
  struct Ellipse {
    double value, a, b, x0, y0, phi_deg;
  };
  static constexpr std::array<Ellipse, 10> kEllipses{{
      {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
      {-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0},
      {-0.2, 0.11, 0.31, 0.22, 0.0, -18.0},
      {-0.2, 0.16, 0.41, -0.22, 0.0, 18.0},
      {0.1, 0.21, 0.25, 0.0, 0.35, 0.0},
      {0.1, 0.046, 0.046, 0.0, 0.1, 0.0},
      {0.1, 0.046, 0.046, 0.0, -0.1, 0.0},
      {0.1, 0.046, 0.023, -0.08, -0.605, 0.0},
      {0.1, 0.023, 0.023, 0.0, -0.606, 0.0},
      {0.1, 0.023, 0.046, 0.06, -0.605, 0.0},
  }};
  Image f(n);
  for (std::size_t t1 = 0; t1 < n; ++t1)
    for (std::size_t t2 = 0; t2 < n; ++t2) {
      const double y = 1.0 - (2.0 * t1 + 1.0) / static_cast<double>(n);
      const double x = (2.0 * t2 + 1.0) / static_cast<double>(n) - 1.0;
      double v = 0.0;
      for (const auto& e : kEllipses) {
        const double phi = e.phi_deg * std::numbers::pi / 180.0;
        const double dx = x - e.x0, dy = y - e.y0;
        const double u = dx * std::cos(phi) + dy * std::sin(phi);
        const double w = -dx * std::sin(phi) + dy * std::cos(phi);
        if ((u * u) / (e.a * e.a) + (w * w) / (e.b * e.b) <= 1.0) v += e.value;
      }
      f(t1, t2) = v;
    }
  return f;
}

/// Uniform random pixels in [0, 1).
inline Image random_image(std::size_t n, std::uint64_t seed) {
  Image f(n);
  Rng rng(seed);
  for (auto& v : f.pixels()) v = rng.uniform();
  return f;
}

}  // namespace vdcs
