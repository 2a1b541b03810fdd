#pragma once

// Orthonormal 2-D DFT on N x N grids and the restricted operator F_Omega.
//
// Convention: F(k1,k2) = (1/N) sum_{j1,j2} f(j1,j2) exp(-2 pi i (j1 k1 + j2 k2)/N),
// j 0-based, k in {-N/2+1, ..., N/2}. Frequency (k1,k2) lives at array
// position (k1 mod N, k2 mod N).

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vdcs/image.hpp"

namespace vdcs {

struct FrequencyIndex {
  int k1 = 0;
  int k2 = 0;
  friend bool operator==(const FrequencyIndex&, const FrequencyIndex&) = default;
  friend auto operator<=>(const FrequencyIndex&, const FrequencyIndex&) = default;
};

inline int min_frequency(std::size_t n) { return -static_cast<int>(n / 2) + 1; }
inline int max_frequency(std::size_t n) { return static_cast<int>(n / 2); }

inline bool in_range(FrequencyIndex k, std::size_t n) {
  const int lo = min_frequency(n), hi = max_frequency(n);
  return k.k1 >= lo && k.k1 <= hi && k.k2 >= lo && k.k2 <= hi;
}

/// Array slot of a single frequency component.
inline std::size_t wrap_frequency(int k, std::size_t n) {
  const int m = static_cast<int>(n);
  return static_cast<std::size_t>(((k % m) + m) % m);
}

inline int unwrap_frequency(std::size_t slot, std::size_t n) {
  return slot <= n / 2 ? static_cast<int>(slot) : static_cast<int>(slot) - static_cast<int>(n);
}

inline void require_in_range(FrequencyIndex k, std::size_t n) {
  if (!in_range(k, n))
    throw std::out_of_range("frequency (" + std::to_string(k.k1) + "," + std::to_string(k.k2) +
                            ") outside K-space of size " + std::to_string(n));
}

/// N x N table keyed by FrequencyIndex, stored in FFT layout.
template <class T>
class FrequencyGrid {
 public:
  FrequencyGrid() = default;
  explicit FrequencyGrid(std::size_t n, T fill = T{}) : n_(n), data_(n * n, fill) { log2_exact(n); }

  std::size_t size() const { return n_; }

  T& at(FrequencyIndex k) {
    require_in_range(k, n_);
    return data_[slot(k)];
  }
  const T& at(FrequencyIndex k) const {
    require_in_range(k, n_);
    return data_[slot(k)];
  }
  T& at(int k1, int k2) { return at(FrequencyIndex{k1, k2}); }
  const T& at(int k1, int k2) const { return at(FrequencyIndex{k1, k2}); }

  std::size_t slot(FrequencyIndex k) const { return wrap_frequency(k.k1, n_) * n_ + wrap_frequency(k.k2, n_); }
  FrequencyIndex frequency_at(std::size_t s) const {
    return {unwrap_frequency(s / n_, n_), unwrap_frequency(s % n_, n_)};
  }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  /// Calls fn(FrequencyIndex, T&) for every frequency in storage order.
  template <class Fn>
  void for_each(Fn&& fn) {
    for (std::size_t s = 0; s < data_.size(); ++s) fn(frequency_at(s), data_[s]);
  }
  template <class Fn>
  void for_each(Fn&& fn) const {
    for (std::size_t s = 0; s < data_.size(); ++s) fn(frequency_at(s), data_[s]);
  }

 private:
  std::size_t n_ = 0;
  std::vector<T> data_;
};

using Spectrum = FrequencyGrid<Complex>;

namespace detail {

/// In-place iterative radix-2 FFT, unnormalized. sign = -1 forward, +1 inverse.
inline void fft_inplace(std::span<Complex> a, int sign) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    for (std::size_t k = 0; k < half; ++k) {
      const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(len);
      const Complex w(std::cos(angle), std::sin(angle));
      for (std::size_t i = 0; i < n; i += len) {
        const Complex u = a[i + k];
        const Complex v = a[i + k + half] * w;
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

/// Separable 2-D FFT over a row-major n x n buffer, scaled by 1/n.
inline void fft2_inplace(std::span<Complex> data, std::size_t n, int sign) {
  for (std::size_t r = 0; r < n; ++r) fft_inplace(data.subspan(r * n, n), sign);
  std::vector<Complex> col(n);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t r = 0; r < n; ++r) col[r] = data[r * n + c];
    fft_inplace(col, sign);
    for (std::size_t r = 0; r < n; ++r) data[r * n + c] = col[r];
  }
  const double scale = 1.0 / static_cast<double>(n);
  for (auto& v : data) v *= scale;
}

}  // namespace detail

inline Spectrum dft2_forward(const Image& f) {
  Spectrum out(f.size());
  std::copy(f.pixels().begin(), f.pixels().end(), out.data().begin());
  detail::fft2_inplace(out.data(), f.size(), -1);
  return out;
}

inline Image dft2_inverse(const Spectrum& spectrum) {
  const std::size_t n = spectrum.size();
  std::vector<Complex> buf(spectrum.data().begin(), spectrum.data().end());
  detail::fft2_inplace(buf, n, +1);
  return Image::from_pixels(n, std::move(buf));
}

/// Fourier basis vector phi_{k1,k2} as an image.
inline Image fourier_atom(FrequencyIndex k, std::size_t n) {
  require_in_range(k, n);
  Image img(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t t1 = 0; t1 < n; ++t1)
    for (std::size_t t2 = 0; t2 < n; ++t2) {
      // reduce the phase mod n before scaling to keep it exact
      const auto phase = static_cast<long long>(t1) * k.k1 + static_cast<long long>(t2) * k.k2;
      const long long m = static_cast<long long>(n);
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(((phase % m) + m) % m) * inv_n;
      img(t1, t2) = inv_n * Complex(std::cos(angle), std::sin(angle));
    }
  return img;
}

/// y_j = F(f)(omega_j); repeated frequencies are repeated in y.
inline std::vector<Complex> partial_dft(const Image& f, std::span<const FrequencyIndex> freqs) {
  for (const auto& k : freqs) require_in_range(k, f.size());
  const Spectrum full = dft2_forward(f);
  std::vector<Complex> y;
  y.reserve(freqs.size());
  for (const auto& k : freqs) y.push_back(full.data()[full.slot(k)]);
  return y;
}

/// Adjoint of partial_dft: scatter-add y into K-space, then inverse DFT.
inline Image partial_dft_adjoint(std::span<const Complex> y, std::span<const FrequencyIndex> freqs, std::size_t n) {
  if (y.size() != freqs.size()) throw std::invalid_argument("partial_dft_adjoint: measurement count mismatch");
  Spectrum acc(n);
  for (std::size_t j = 0; j < freqs.size(); ++j) {
    require_in_range(freqs[j], n);
    acc.data()[acc.slot(freqs[j])] += y[j];
  }
  return dft2_inverse(acc);
}

}  // namespace vdcs
