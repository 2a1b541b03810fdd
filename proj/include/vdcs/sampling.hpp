#pragma once

// Sampling densities over K-space, i.i.d. frequency draws with
// preconditioning weights, and deterministic masks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "vdcs/fourier.hpp"
#include "vdcs/random.hpp"

namespace vdcs {

/// Probability mass over the N x N frequencies.
struct Density {
  FrequencyGrid<double> mass;
  std::string label;
  /// Power-law exponent when the density belongs to that family, NaN otherwise.
  double alpha = std::numeric_limits<double>::quiet_NaN();
  /// 1 / (sum of unnormalized masses), i.e. C_N.
  double normalization = 1.0;
  /// Degenerate limit (alpha = infinity); not drawable.
  bool degenerate = false;

  std::size_t size() const { return mass.size(); }
  double at(FrequencyIndex k) const { return mass.at(k); }
};

/// m frequencies (duplicates allowed) with weights rho_j.
struct SamplingPlan {
  std::size_t n = 0;
  std::vector<FrequencyIndex> freqs;
  std::vector<double> rho;
  std::string density_label;
  std::uint64_t seed = 0;
  std::string generator;

  std::size_t m() const { return freqs.size(); }
};

inline std::vector<Complex> partial_dft(const Image& f, const SamplingPlan& plan) { return partial_dft(f, std::span<const FrequencyIndex>(plan.freqs)); }

inline Image partial_dft_adjoint(std::span<const Complex> y, const SamplingPlan& plan) {
  return partial_dft_adjoint(y, std::span<const FrequencyIndex>(plan.freqs), plan.n);
}

namespace detail {

template <class Fn>
Density normalized_density(std::size_t n, std::string label, Fn&& unnormalized) {
  Density d{FrequencyGrid<double>(n), std::move(label)};
  double total = 0.0;
  d.mass.for_each([&](FrequencyIndex k, double& v) {
    v = unnormalized(k);
    total += v;
  });
  d.normalization = 1.0 / total;
  for (auto& v : d.mass.data()) v *= d.normalization;
  return d;
}

inline double radius_squared(FrequencyIndex k) { return static_cast<double>(k.k1) * k.k1 + static_cast<double>(k.k2) * k.k2; }

}  // namespace detail

/// eta(k) = C_N min(C, 1/(k1^2 + k2^2)); the cap C defaults to 1.
inline Density density_inverse_square(std::size_t n, double cap = 1.0) {
  if (!(cap > 0.0)) throw std::invalid_argument("density_inverse_square: cap must be positive");
  return detail::normalized_density(n, "inv-square", [cap](FrequencyIndex k) {
    const double r2 = detail::radius_squared(k);
    return r2 == 0.0 ? cap : std::min(cap, 1.0 / r2);
  });
}

/// Prob ∝ (k1^2 + k2^2 + 1)^{-alpha/2}. alpha = infinity yields the
/// degenerate lowest-frequency limit (point mass at DC), usable only through
/// lowest_frequencies().
inline Density density_power_law(std::size_t n, double alpha) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("density_power_law: alpha must be >= 0");
  if (std::isinf(alpha)) {
    Density d = detail::normalized_density(n, "power:inf", [](FrequencyIndex k) { return k == FrequencyIndex{} ? 1.0 : 0.0; });
    d.alpha = alpha;
    d.degenerate = true;
    return d;
  }
  Density d = detail::normalized_density(n, alpha == 0.0 ? "uniform" : "power:" + std::to_string(alpha),
                                         [alpha](FrequencyIndex k) {
                                           return std::pow(detail::radius_squared(k) + 1.0, -0.5 * alpha);
                                         });
  d.alpha = alpha;
  return d;
}

inline Density density_uniform(std::size_t n) { return density_power_law(n, 0.0); }

/// Prob ∝ min(1, 1/max(|k1|,|k2|)).
inline Density density_inverse_max(std::size_t n) {
  return detail::normalized_density(n, "inv-max", [](FrequencyIndex k) {
    const int m = std::max(std::abs(k.k1), std::abs(k.k2));
    return m == 0 ? 1.0 : 1.0 / m;
  });
}

/// nu(k) = kappa(k)^2 / ||kappa||_2^2.
inline Density density_from_kappa(const FrequencyGrid<double>& kappa) {
  for (double v : kappa.data())
    if (!(v > 0.0)) throw std::invalid_argument("density_from_kappa: kappa entries must be positive");
  return detail::normalized_density(kappa.size(), "kappa-squared", [&](FrequencyIndex k) {
    const double v = kappa.at(k);
    return v * v;
  });
}

/// m i.i.d. draws by inverse CDF over the density in storage order;
/// rho_j = eta(omega_j)^{-1/2}.
inline SamplingPlan draw_plan(const Density& density, std::size_t m, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("draw_plan: m must be >= 1");
  if (density.degenerate)
    throw std::invalid_argument("draw_plan: density '" + density.label + "' is degenerate; use lowest_frequencies");
  const auto mass = density.mass.data();
  std::vector<double> cdf(mass.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    acc += mass[i];
    cdf[i] = acc;
  }
  // last cell with positive mass absorbs rounding at the top of the CDF
  std::size_t last = mass.size();
  while (last > 0 && mass[last - 1] <= 0.0) --last;
  if (last == 0) throw std::invalid_argument("draw_plan: density has no mass");

  SamplingPlan plan{density.size(), {}, {}, density.label, seed, Rng::kAlgorithm};
  plan.freqs.reserve(m);
  plan.rho.reserve(m);
  Rng rng(seed);
  for (std::size_t j = 0; j < m; ++j) {
    const double u = rng.uniform() * acc;
    std::size_t slot = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    slot = std::min(slot, last - 1);
    while (mass[slot] <= 0.0) --slot;  // never land on a zero cell
    plan.freqs.push_back(density.mass.frequency_at(slot));
    plan.rho.push_back(1.0 / std::sqrt(mass[slot]));
  }
  return plan;
}

struct LowestFrequencies {
  std::size_t m = 1;
};
struct RadialLines {
  std::size_t lines = 1;
};
struct UniformGrid {
  std::size_t m = 1;
  std::uint64_t seed = 0;
};
using MaskSpec = std::variant<LowestFrequencies, RadialLines, UniformGrid>;

/// The m frequencies of smallest k1^2 + k2^2; ties by polar angle in
/// [0, 2 pi), then by storage order. rho = 1.
inline SamplingPlan lowest_frequencies(std::size_t n, std::size_t m) {
  log2_exact(n);
  if (m < 1 || m > n * n) throw std::invalid_argument("lowest_frequencies: m must lie in [1, N^2]");
  FrequencyGrid<char> grid(n);
  std::vector<std::size_t> slots(n * n);
  for (std::size_t s = 0; s < slots.size(); ++s) slots[s] = s;
  const auto angle = [](FrequencyIndex k) {
    const double a = std::atan2(static_cast<double>(k.k2), static_cast<double>(k.k1));
    return a < 0.0 ? a + 2.0 * std::numbers::pi : a;
  };
  std::stable_sort(slots.begin(), slots.end(), [&](std::size_t a, std::size_t b) {
    const auto ka = grid.frequency_at(a), kb = grid.frequency_at(b);
    const double ra = detail::radius_squared(ka), rb = detail::radius_squared(kb);
    if (ra != rb) return ra < rb;
    return angle(ka) < angle(kb);
  });
  SamplingPlan plan{n, {}, std::vector<double>(m, 1.0), "lowpass", 0, "deterministic"};
  for (std::size_t j = 0; j < m; ++j) plan.freqs.push_back(grid.frequency_at(slots[j]));
  return plan;
}

/// Union of the lattice points of L digital lines through DC at angles
/// i pi / L. Each line is rasterized along its dominant axis with rounding
/// half away from zero. Distinct frequencies in storage order, rho = 1.
inline SamplingPlan radial_lines(std::size_t n, std::size_t lines) {
  log2_exact(n);
  if (lines < 1) throw std::invalid_argument("radial_lines: need at least one line");
  const int lo = min_frequency(n), hi = max_frequency(n);
  std::set<std::size_t> slots;
  FrequencyGrid<char> grid(n);
  for (std::size_t i = 0; i < lines; ++i) {
    const double theta = std::numbers::pi * static_cast<double>(i) / static_cast<double>(lines);
    const double c = std::cos(theta), s = std::sin(theta);
    for (int t = lo - 1; t <= hi + 1; ++t) {
      FrequencyIndex k;
      if (std::abs(c) >= std::abs(s))
        k = {t, static_cast<int>(std::lround(t * s / c))};
      else
        k = {static_cast<int>(std::lround(t * c / s)), t};
      if (in_range(k, n)) slots.insert(grid.slot(k));
    }
  }
  SamplingPlan plan{n, {}, std::vector<double>(slots.size(), 1.0), "radial:" + std::to_string(lines), 0, "deterministic"};
  for (std::size_t s : slots) plan.freqs.push_back(grid.frequency_at(s));
  return plan;
}

inline SamplingPlan deterministic_mask(std::size_t n, const MaskSpec& spec) {
  return std::visit(
      [n](const auto& v) -> SamplingPlan {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LowestFrequencies>) {
          return lowest_frequencies(n, v.m);
        } else if constexpr (std::is_same_v<T, RadialLines>) {
          return radial_lines(n, v.lines);
        } else {
          if (v.m > n * n) throw std::invalid_argument("uniform_grid: m exceeds N^2");
          return draw_plan(density_uniform(n), v.m, v.seed);
        }
      },
      spec);
}

}  // namespace vdcs
