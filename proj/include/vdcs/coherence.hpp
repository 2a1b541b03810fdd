#pragma once

// Local coherence of the 2-D Fourier basis with respect to the bivariate
// Haar basis: closed-form inner products, exact sup per frequency and the
// analytic envelopes kappa, kappa'.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "vdcs/fourier.hpp"
#include "vdcs/haar.hpp"

namespace vdcs {

using CoherenceMap = FrequencyGrid<double>;

/// <phi_k, h^e_{n,l}> on 2^p points, summed in closed form as a geometric
/// series. phi_k(j) = 2^{-p/2} exp(2 pi i k j / 2^p); the inner product
/// conjugates phi.
inline Complex fourier_haar_inner_1d(int p, int k, int e, int n, int l) {
  if (p < 1 || n < 0 || n >= p || (e != 0 && e != 1) || l < 0 || l >= (1 << n))
    throw std::out_of_range("fourier_haar_inner_1d: invalid Haar index");
  const std::size_t len = std::size_t{1} << p;
  if (k < min_frequency(len) || k > max_frequency(len)) throw std::out_of_range("fourier_haar_inner_1d: k out of range");
  if (k == 0) return e == 1 ? Complex{} : Complex(std::exp2(-0.5 * n), 0.0);

  // angles reduced to exact dyadic fractions of a turn
  const auto turn = [](double fraction) {
    const double a = 2.0 * std::numbers::pi * (fraction - std::floor(fraction));
    return Complex(std::cos(a), std::sin(a));
  };
  const double kd = static_cast<double>(k);
  const Complex shift = turn(std::ldexp(kd * l, -n));
  const Complex half = turn(std::ldexp(kd, -n - 1));
  const Complex unit = turn(std::ldexp(kd, -p));
  const double sign = e == 0 ? 1.0 : -1.0;
  const Complex value = shift * (1.0 + sign * half) * std::exp2(0.5 * n - p) * (1.0 - half) / (1.0 - unit);
  return std::conj(value);
}

/// |<phi_k, h^e_{n,l}>|, which does not depend on the shift l.
inline double fourier_haar_modulus_1d(int p, int k, int e, int n) { return std::abs(fourier_haar_inner_1d(p, k, e, n, 0)); }

namespace detail {

/// table[e][n][slot(k)] = |<phi_k, h^e_{n,0}>|
inline std::vector<std::vector<std::vector<double>>> univariate_modulus_table(int p) {
  const std::size_t len = std::size_t{1} << p;
  std::vector<std::vector<std::vector<double>>> t(2, std::vector<std::vector<double>>(p, std::vector<double>(len)));
  for (int e = 0; e < 2; ++e)
    for (int n = 0; n < p; ++n)
      for (std::size_t s = 0; s < len; ++s) t[e][n][s] = fourier_haar_modulus_1d(p, unwrap_frequency(s, len), e, n);
  return t;
}

}  // namespace detail

/// Exact mu_loc(k1,k2) = max over all Haar atoms of |<phi_{k1,k2}, h>|.
///
/// Uses the tensor factorization <phi_{k1,k2}, h^e_{n,l}> =
/// <phi_{k1}, h^{e1}_{n,l1}> <phi_{k2}, h^{e2}_{n,l2}> and shift-invariance of
/// the univariate moduli, so the sup costs O(N^2 p).
inline CoherenceMap local_coherence_exact(std::size_t n) {
  const int p = log2_exact(n);
  const auto t = detail::univariate_modulus_table(p);
  CoherenceMap mu(n);
  auto data = mu.data();
  for (std::size_t s1 = 0; s1 < n; ++s1)
    for (std::size_t s2 = 0; s2 < n; ++s2) {
      double best = t[0][0][s1] * t[0][0][s2];  // constant atom
      for (int scale = 0; scale < p; ++scale)
        for (const auto& e : kOrientations) best = std::max(best, t[e.e1][scale][s1] * t[e.e2][scale][s2]);
      data[s1 * n + s2] = best;
    }
  return mu;
}

/// Brute-force mu_loc: DFT of every Haar atom, no factorization.
/// O(N^4 log N); intended for N <= 32.
inline CoherenceMap local_coherence_dense(std::size_t n) {
  const int p = log2_exact(n);
  CoherenceMap mu(n, 0.0);
  for (std::size_t pos = 0; pos < n * n; ++pos) {
    const Spectrum s = dft2_forward(haar_atom_2d(haar_index_at(pos, p), p));
    for (std::size_t i = 0; i < n * n; ++i) mu.data()[i] = std::max(mu.data()[i], std::abs(s.data()[i]));
  }
  return mu;
}

inline double kappa_bound(int k1, int k2) {
  const int m = std::max(std::abs(k1), std::abs(k2));
  if (m == 0) return 1.0;
  return std::min(1.0, 18.0 * std::numbers::pi / m);
}

inline double kappa_prime_bound(int k1, int k2) {
  const double r2 = static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2;
  if (r2 == 0.0) return 1.0;
  return std::min(1.0, 18.0 * std::numbers::pi * std::numbers::sqrt2 / std::sqrt(r2));
}

enum class KappaVariant { kappa, kappa_prime };

inline FrequencyGrid<double> kappa_table(std::size_t n, KappaVariant variant) {
  FrequencyGrid<double> t(n);
  t.for_each([&](FrequencyIndex k, double& v) {
    v = variant == KappaVariant::kappa ? kappa_bound(k.k1, k.k2) : kappa_prime_bound(k.k1, k.k2);
  });
  return t;
}

/// l2 norm of kappa or kappa' over the full K-space.
inline double kappa_l2(std::size_t n, KappaVariant variant) {
  log2_exact(n);
  double sum = 0.0;
  const int lo = min_frequency(n), hi = max_frequency(n);
  for (int k1 = lo; k1 <= hi; ++k1)
    for (int k2 = lo; k2 <= hi; ++k2) {
      const double v = variant == KappaVariant::kappa ? kappa_bound(k1, k2) : kappa_prime_bound(k1, k2);
      sum += v * v;
    }
  return std::sqrt(sum);
}

struct UnivariateCheck {
  /// max |<phi_k,h>| / min(6 2^{n/2}/|k|, 3 pi 2^{-n/2}) over k != 0, n, e.
  double max_ratio = 0.0;
  /// max |<phi_k,h^1>| / (3 sqrt(2 pi) / sqrt|k|) over detail wavelets.
  double max_corollary_ratio = 0.0;
  bool passed() const { return max_ratio <= 1.0 && max_corollary_ratio <= 1.0; }
};

inline UnivariateCheck univariate_coherence_bound_check(std::size_t n) {
  const int p = log2_exact(n);
  UnivariateCheck out;
  for (int k = min_frequency(n); k <= max_frequency(n); ++k) {
    if (k == 0) continue;
    const double ak = std::abs(k);
    for (int scale = 0; scale < p; ++scale)
      for (int e = 0; e < 2; ++e) {
        const double v = fourier_haar_modulus_1d(p, k, e, scale);
        const double bound = std::min(6.0 * std::exp2(0.5 * scale) / ak, 3.0 * std::numbers::pi * std::exp2(-0.5 * scale));
        out.max_ratio = std::max(out.max_ratio, v / bound);
        if (e == 1)
          out.max_corollary_ratio =
              std::max(out.max_corollary_ratio, v / (3.0 * std::sqrt(2.0 * std::numbers::pi) / std::sqrt(ak)));
      }
  }
  return out;
}

}  // namespace vdcs
