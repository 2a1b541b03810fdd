#pragma once

// Univariate and bivariate Haar systems on 2^p points, and the fast
// orthonormal bivariate Haar transform.
//
// Atoms are evaluated at 0-based positions j = 0..2^p-1. The window
// h^0_{n,l} equals 2^{(n-p)/2} on [l 2^{p-n}, (l+1) 2^{p-n}); the detail
// h^1_{n,l} has the same support with the sign flipping at the midpoint.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "vdcs/image.hpp"

namespace vdcs {

/// Orientation e = (e1, e2) of a bivariate detail atom; e1 acts on rows (t1).
struct Orientation {
  int e1 = 0;
  int e2 = 0;
  friend bool operator==(const Orientation&, const Orientation&) = default;
};

/// Canonical orientation order: (0,1), (1,0), (1,1).
inline constexpr std::array<Orientation, 3> kOrientations{{{0, 1}, {1, 0}, {1, 1}}};

struct HaarIndex {
  enum class Kind { constant, detail };

  Kind kind = Kind::constant;
  Orientation e{};
  int scale = 0;   // n, 0 <= n < p
  int shift1 = 0;  // l1, 0 <= l1 < 2^n
  int shift2 = 0;  // l2

  static HaarIndex constant() { return {}; }
  static HaarIndex detail(Orientation e, int n, int l1, int l2) { return {Kind::detail, e, n, l1, l2}; }

  bool is_constant() const { return kind == Kind::constant; }
  friend bool operator==(const HaarIndex&, const HaarIndex&) = default;
};

inline int orientation_rank(Orientation e) {
  for (int i = 0; i < 3; ++i)
    if (kOrientations[i] == e) return i;
  throw std::invalid_argument("invalid Haar orientation (" + std::to_string(e.e1) + "," + std::to_string(e.e2) + ")");
}

inline void validate(const HaarIndex& idx, int p) {
  if (idx.is_constant()) return;
  orientation_rank(idx.e);
  if (idx.scale < 0 || idx.scale >= p) throw std::out_of_range("Haar scale out of range");
  const int span = 1 << idx.scale;
  if (idx.shift1 < 0 || idx.shift1 >= span || idx.shift2 < 0 || idx.shift2 >= span)
    throw std::out_of_range("Haar shift out of range");
}

/// Position in the canonical coefficient ordering: constant first, then by
/// scale ascending, orientation (0,1),(1,0),(1,1), shift row-major.
inline std::size_t haar_position(const HaarIndex& idx, int p) {
  validate(idx, p);
  if (idx.is_constant()) return 0;
  const std::size_t block = std::size_t{1} << (2 * idx.scale);  // 4^n
  const std::size_t side = std::size_t{1} << idx.scale;
  return block + orientation_rank(idx.e) * block + static_cast<std::size_t>(idx.shift1) * side +
         static_cast<std::size_t>(idx.shift2);
}

inline HaarIndex haar_index_at(std::size_t pos, int p) {
  const std::size_t total = std::size_t{1} << (2 * p);
  if (pos >= total) throw std::out_of_range("Haar position out of range");
  if (pos == 0) return HaarIndex::constant();
  int n = 0;
  while ((std::size_t{1} << (2 * (n + 1))) <= pos) ++n;
  const std::size_t block = std::size_t{1} << (2 * n);
  const std::size_t side = std::size_t{1} << n;
  const std::size_t rel = pos - block;
  const std::size_t r = rel / block;
  const std::size_t within = rel % block;
  return HaarIndex::detail(kOrientations[r], n, static_cast<int>(within / side), static_cast<int>(within % side));
}

/// Univariate atom h^e_{n,l} on 2^p points (e = 0 window, e = 1 detail).
/// h^0_{0,0} is the global constant and h^1_{0,0} the global step.
inline std::vector<double> haar_atom_1d(int p, int e, int n, int l) {
  if (p < 1) throw std::out_of_range("haar_atom_1d: p must be >= 1");
  if (e != 0 && e != 1) throw std::out_of_range("haar_atom_1d: e must be 0 or 1");
  if (n < 0 || n >= p) throw std::out_of_range("haar_atom_1d: scale out of range");
  if (l < 0 || l >= (1 << n)) throw std::out_of_range("haar_atom_1d: shift out of range");
  const std::size_t len = std::size_t{1} << p;
  const std::size_t width = std::size_t{1} << (p - n);
  const double amp = std::exp2(0.5 * (n - p));
  std::vector<double> h(len, 0.0);
  const std::size_t start = static_cast<std::size_t>(l) * width;
  for (std::size_t j = 0; j < width; ++j) h[start + j] = (e == 1 && j >= width / 2) ? -amp : amp;
  return h;
}

inline Image haar_atom_2d(const HaarIndex& idx, int p) {
  validate(idx, p);
  const std::size_t n = std::size_t{1} << p;
  const auto rows = idx.is_constant() ? haar_atom_1d(p, 0, 0, 0) : haar_atom_1d(p, idx.e.e1, idx.scale, idx.shift1);
  const auto cols = idx.is_constant() ? haar_atom_1d(p, 0, 0, 0) : haar_atom_1d(p, idx.e.e2, idx.scale, idx.shift2);
  Image img(n);
  for (std::size_t t1 = 0; t1 < n; ++t1)
    for (std::size_t t2 = 0; t2 < n; ++t2) img(t1, t2) = rows[t1] * cols[t2];
  return img;
}

/// Bivariate Haar coefficients in canonical order.
struct HaarCoeffs {
  int p = 0;
  std::vector<Complex> values;

  Complex& at(const HaarIndex& idx) { return values[haar_position(idx, p)]; }
  const Complex& at(const HaarIndex& idx) const { return values[haar_position(idx, p)]; }
};

/// O(N^2) pyramid: each level maps 2x2 blocks (a b; c d) of the current
/// approximation to (a+b+c+d)/2 and the three details.
inline HaarCoeffs haar_forward(const Image& f) {
  const int p = f.log2_size();
  const std::size_t n = f.size();
  HaarCoeffs w{p, std::vector<Complex>(n * n)};
  std::vector<Complex> approx(f.pixels().begin(), f.pixels().end());
  std::size_t side = n;
  for (int level = p - 1; level >= 0; --level) {
    const std::size_t half = side / 2;
    const std::size_t block = half * half;  // 4^level
    std::vector<Complex> next(block);
    for (std::size_t l1 = 0; l1 < half; ++l1)
      for (std::size_t l2 = 0; l2 < half; ++l2) {
        const Complex a = approx[(2 * l1) * side + 2 * l2];
        const Complex b = approx[(2 * l1) * side + 2 * l2 + 1];
        const Complex c = approx[(2 * l1 + 1) * side + 2 * l2];
        const Complex d = approx[(2 * l1 + 1) * side + 2 * l2 + 1];
        const std::size_t rel = l1 * half + l2;
        next[rel] = 0.5 * (a + b + c + d);
        w.values[block + rel] = 0.5 * (a - b + c - d);              // (0,1)
        w.values[2 * block + rel] = 0.5 * (a + b - c - d);          // (1,0)
        w.values[3 * block + rel] = 0.5 * (a - b - c + d);          // (1,1)
      }
    approx = std::move(next);
    side = half;
  }
  w.values[0] = approx[0];
  return w;
}

inline Image haar_inverse(const HaarCoeffs& w) {
  const int p = w.p;
  const std::size_t n = std::size_t{1} << p;
  if (p < 1 || w.values.size() != n * n) throw std::invalid_argument("haar_inverse: coefficient count must be 4^p");
  std::vector<Complex> approx{w.values[0]};
  std::size_t side = 1;
  for (int level = 0; level < p; ++level) {
    const std::size_t block = side * side;
    const std::size_t next_side = 2 * side;
    std::vector<Complex> next(next_side * next_side);
    for (std::size_t l1 = 0; l1 < side; ++l1)
      for (std::size_t l2 = 0; l2 < side; ++l2) {
        const std::size_t rel = l1 * side + l2;
        const Complex s = approx[rel];
        const Complex h01 = w.values[block + rel];
        const Complex h10 = w.values[2 * block + rel];
        const Complex h11 = w.values[3 * block + rel];
        next[(2 * l1) * next_side + 2 * l2] = 0.5 * (s + h01 + h10 + h11);
        next[(2 * l1) * next_side + 2 * l2 + 1] = 0.5 * (s - h01 + h10 - h11);
        next[(2 * l1 + 1) * next_side + 2 * l2] = 0.5 * (s + h01 - h10 - h11);
        next[(2 * l1 + 1) * next_side + 2 * l2 + 1] = 0.5 * (s - h01 - h10 + h11);
      }
    approx = std::move(next);
    side = next_side;
  }
  return Image::from_pixels(n, std::move(approx));
}

}  // namespace vdcs
