#pragma once

// Image container, discrete gradient, anisotropic TV and s-term utilities.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vdcs {

using Complex = std::complex<double>;

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// Returns p with n = 2^p. Throws unless n is a power of two >= 2.
inline int log2_exact(std::size_t n) {
  if (n < 2 || !is_power_of_two(n))
    throw std::invalid_argument("side length must be a power of two >= 2, got " + std::to_string(n));
  int p = 0;
  while ((std::size_t{1} << p) < n) ++p;
  return p;
}

/// N x N complex pixel grid, N = 2^p. Pixel (t1, t2) is row t1, column t2,
/// both 0-based; storage is row-major.
class Image {
 public:
  Image() = default;

  explicit Image(std::size_t n, Complex fill = {}) : n_(n), pixels_(n * n, fill) { log2_exact(n); }

  static Image from_real(std::size_t n, std::span<const double> values) {
    if (values.size() != n * n) throw std::invalid_argument("from_real: expected N*N values");
    Image img(n);
    std::transform(values.begin(), values.end(), img.pixels_.begin(), [](double v) { return Complex(v, 0.0); });
    return img;
  }

  static Image from_pixels(std::size_t n, std::vector<Complex> values) {
    if (values.size() != n * n) throw std::invalid_argument("from_pixels: expected N*N values");
    Image img(n);
    img.pixels_ = std::move(values);
    return img;
  }

  std::size_t size() const { return n_; }
  int log2_size() const { return log2_exact(n_); }
  std::size_t pixel_count() const { return pixels_.size(); }

  Complex& operator()(std::size_t t1, std::size_t t2) { return pixels_[t1 * n_ + t2]; }
  const Complex& operator()(std::size_t t1, std::size_t t2) const { return pixels_[t1 * n_ + t2]; }

  std::span<Complex> pixels() { return pixels_; }
  std::span<const Complex> pixels() const { return pixels_; }

  Image& operator+=(const Image& o) {
    check_same(o);
    for (std::size_t i = 0; i < pixels_.size(); ++i) pixels_[i] += o.pixels_[i];
    return *this;
  }
  Image& operator-=(const Image& o) {
    check_same(o);
    for (std::size_t i = 0; i < pixels_.size(); ++i) pixels_[i] -= o.pixels_[i];
    return *this;
  }
  Image& operator*=(Complex c) {
    for (auto& v : pixels_) v *= c;
    return *this;
  }
  Image& operator+=(Complex c) {
    for (auto& v : pixels_) v += c;
    return *this;
  }

  friend Image operator+(Image a, const Image& b) { return a += b; }
  friend Image operator-(Image a, const Image& b) { return a -= b; }
  friend Image operator*(Complex c, Image a) { return a *= c; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  void check_same(const Image& o) const {
    if (o.n_ != n_) throw std::invalid_argument("image size mismatch");
  }

  std::size_t n_ = 0;
  std::vector<Complex> pixels_;
};

/// Forward differences. dx is (N-1) x N, dy is N x (N-1), both row-major.
struct GradientField {
  std::size_t n = 0;
  std::vector<Complex> dx;
  std::vector<Complex> dy;

  Complex dx_at(std::size_t t1, std::size_t t2) const { return dx[t1 * n + t2]; }
  Complex dy_at(std::size_t t1, std::size_t t2) const { return dy[t1 * (n - 1) + t2]; }

  /// Zero-padded N x N x 2 view, interleaved as (dx, dy) per pixel.
  std::vector<Complex> padded() const {
    std::vector<Complex> out(2 * n * n);
    for (std::size_t t1 = 0; t1 < n; ++t1)
      for (std::size_t t2 = 0; t2 < n; ++t2) {
        if (t1 + 1 < n) out[2 * (t1 * n + t2)] = dx_at(t1, t2);
        if (t2 + 1 < n) out[2 * (t1 * n + t2) + 1] = dy_at(t1, t2);
      }
    return out;
  }

  /// dx followed by dy.
  std::vector<Complex> flattened() const {
    std::vector<Complex> out(dx);
    out.insert(out.end(), dy.begin(), dy.end());
    return out;
  }
};

inline GradientField gradient(const Image& f) {
  const std::size_t n = f.size();
  GradientField g{n, std::vector<Complex>((n - 1) * n), std::vector<Complex>(n * (n - 1))};
  for (std::size_t t1 = 0; t1 + 1 < n; ++t1)
    for (std::size_t t2 = 0; t2 < n; ++t2) g.dx[t1 * n + t2] = f(t1 + 1, t2) - f(t1, t2);
  for (std::size_t t1 = 0; t1 < n; ++t1)
    for (std::size_t t2 = 0; t2 + 1 < n; ++t2) g.dy[t1 * (n - 1) + t2] = f(t1, t2 + 1) - f(t1, t2);
  return g;
}

/// Adjoint of gradient() (negative divergence).
inline Image gradient_adjoint(const GradientField& g) {
  const std::size_t n = g.n;
  Image out(n);
  for (std::size_t t1 = 0; t1 + 1 < n; ++t1)
    for (std::size_t t2 = 0; t2 < n; ++t2) {
      const Complex v = g.dx[t1 * n + t2];
      out(t1 + 1, t2) += v;
      out(t1, t2) -= v;
    }
  for (std::size_t t1 = 0; t1 < n; ++t1)
    for (std::size_t t2 = 0; t2 + 1 < n; ++t2) {
      const Complex v = g.dy[t1 * (n - 1) + t2];
      out(t1, t2 + 1) += v;
      out(t1, t2) -= v;
    }
  return out;
}

/// l_p norm for p in [1, inf]; p = infinity gives the max modulus.
template <class T>
double lp_norm(std::span<const T> x, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (const auto& v : x) m = std::max(m, static_cast<double>(std::abs(v)));
    return m;
  }
  if (p == 1.0) {
    double s = 0.0;
    for (const auto& v : x) s += std::abs(v);
    return s;
  }
  if (p == 2.0) {
    double s = 0.0;
    for (const auto& v : x) s += std::norm(v);
    return std::sqrt(s);
  }
  double s = 0.0;
  for (const auto& v : x) s += std::pow(static_cast<double>(std::abs(v)), p);
  return std::pow(s, 1.0 / p);
}

inline double lp_norm(const std::vector<Complex>& x, double p) { return lp_norm(std::span<const Complex>(x), p); }
inline double lp_norm(const std::vector<double>& x, double p) { return lp_norm(std::span<const double>(x), p); }

inline double l2_norm(const Image& f) { return lp_norm(f.pixels(), 2.0); }

/// Anisotropic total variation: sum of |f_x| + |f_y|.
inline double tv_norm(const Image& f) {
  const std::size_t n = f.size();
  double s = 0.0;
  for (std::size_t t1 = 0; t1 < n; ++t1)
    for (std::size_t t2 = 0; t2 < n; ++t2) {
      if (t1 + 1 < n) s += std::abs(f(t1 + 1, t2) - f(t1, t2));
      if (t2 + 1 < n) s += std::abs(f(t1, t2 + 1) - f(t1, t2));
    }
  return s;
}

/// Keeps the s largest-magnitude entries. Among equal magnitudes the lower
/// index wins.
template <class T>
std::vector<T> hard_threshold(std::span<const T> x, std::size_t s) {
  if (s > x.size()) throw std::out_of_range("hard_threshold: s exceeds length");
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(x[a]) > std::abs(x[b]); });
  std::vector<T> out(x.size(), T{});
  for (std::size_t i = 0; i < s; ++i) out[order[i]] = x[order[i]];
  return out;
}

/// sigma_s(x)_p: l_p distance from x to its best s-term approximation.
template <class T>
double best_s_term_error(std::span<const T> x, std::size_t s, double p) {
  auto kept = hard_threshold(x, s);
  for (std::size_t i = 0; i < kept.size(); ++i) kept[i] = x[i] - kept[i];
  return lp_norm(std::span<const T>(kept), p);
}

}  // namespace vdcs
