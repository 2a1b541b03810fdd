#pragma once

// Desk-scale checks: restricted isometry constants, the preconditioned
// Fourier-Haar system, and the Haar-gradient lemmas.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vdcs/coherence.hpp"
#include "vdcs/fourier.hpp"
#include "vdcs/haar.hpp"
#include "vdcs/image.hpp"
#include "vdcs/random.hpp"
#include "vdcs/sampling.hpp"

namespace vdcs {

using Matrix = Eigen::MatrixXcd;

struct RipEstimate {
  enum class Method { exhaustive, monte_carlo };

  std::size_t s = 0;
  std::optional<double> delta_exact;
  /// Max deviation over the supports examined; always a lower bound on delta_s.
  double delta_lower_mc = 0.0;
  std::size_t supports_checked = 0;
  Method method = Method::exhaustive;
};

inline const char* to_string(RipEstimate::Method m) {
  return m == RipEstimate::Method::exhaustive ? "exhaustive" : "monte_carlo";
}

inline constexpr double kRipEnumerationBudget = 1e6;

/// C(n, s) as a double (exact below 2^53).
inline double binomial(std::size_t n, std::size_t s) {
  if (s > n) return 0.0;
  s = std::min(s, n - s);
  double c = 1.0;
  for (std::size_t i = 1; i <= s; ++i) c = c * static_cast<double>(n - s + i) / static_cast<double>(i);
  return std::round(c);
}

/// max(|lambda_max - 1|, |1 - lambda_min|) of the Gram of the given columns.
inline double support_deviation(const Matrix& a, const std::vector<std::size_t>& support) {
  Matrix sub(a.rows(), static_cast<Eigen::Index>(support.size()));
  for (std::size_t i = 0; i < support.size(); ++i) sub.col(static_cast<Eigen::Index>(i)) = a.col(static_cast<Eigen::Index>(support[i]));
  const Matrix gram = sub.adjoint() * sub;
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return std::max(std::abs(ev.maxCoeff() - 1.0), std::abs(1.0 - ev.minCoeff()));
}

/// Exact delta_s by enumerating every size-s column support.
inline RipEstimate rip_exact(const Matrix& a, std::size_t s) {
  const auto n = static_cast<std::size_t>(a.cols());
  if (s < 1 || s > n) throw std::invalid_argument("rip_exact: need 1 <= s <= number of columns");
  const double count = binomial(n, s);
  if (count > kRipEnumerationBudget)
    throw std::length_error("rip_exact: C(" + std::to_string(n) + "," + std::to_string(s) +
                            ") supports exceed the enumeration budget; use rip_monte_carlo");
  std::vector<std::size_t> support(s);
  std::iota(support.begin(), support.end(), std::size_t{0});
  RipEstimate out{s, 0.0, 0.0, 0, RipEstimate::Method::exhaustive};
  double delta = 0.0;
  for (;;) {
    delta = std::max(delta, support_deviation(a, support));
    ++out.supports_checked;
    // next combination in lexicographic order
    std::size_t i = s;
    while (i > 0 && support[i - 1] == n - s + i - 1) --i;
    if (i == 0) break;
    ++support[i - 1];
    for (std::size_t j = i; j < s; ++j) support[j] = support[j - 1] + 1;
  }
  out.delta_exact = delta;
  out.delta_lower_mc = delta;
  return out;
}

/// Lower bound on delta_s from uniformly random supports.
inline RipEstimate rip_monte_carlo(const Matrix& a, std::size_t s, std::size_t trials, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(a.cols());
  if (trials < 1) throw std::invalid_argument("rip_monte_carlo: trials must be >= 1");
  if (s < 1 || s > n) throw std::invalid_argument("rip_monte_carlo: need 1 <= s <= number of columns");
  Rng rng(seed);
  std::vector<std::size_t> perm(n);
  RipEstimate out{s, std::nullopt, 0.0, trials, RipEstimate::Method::monte_carlo};
  for (std::size_t t = 0; t < trials; ++t) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = 0; i < s; ++i) std::swap(perm[i], perm[i + rng.below(n - i)]);
    std::vector<std::size_t> support(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(s));
    std::sort(support.begin(), support.end());
    out.delta_lower_mc = std::max(out.delta_lower_mc, support_deviation(a, support));
  }
  return out;
}

inline constexpr std::size_t kMaxDenseSide = 16;

/// Spectra of every Haar atom, indexed by canonical Haar position.
inline std::vector<Spectrum> haar_atom_spectra(std::size_t n) {
  const int p = log2_exact(n);
  std::vector<Spectrum> out;
  out.reserve(n * n);
  for (std::size_t pos = 0; pos < n * n; ++pos) out.push_back(dft2_forward(haar_atom_2d(haar_index_at(pos, p), p)));
  return out;
}

/// (1/sqrt m) D F_Omega H^*: row j holds rho_j / sqrt(m) times the sampled
/// Fourier coefficients of every Haar atom, columns in canonical Haar order.
inline Matrix build_preconditioned_matrix(const SamplingPlan& plan) {
  const std::size_t n = plan.n;
  log2_exact(n);
  if (n > kMaxDenseSide) throw std::length_error("build_preconditioned_matrix: N must be <= 16 for a dense matrix");
  if (plan.m() == 0) throw std::invalid_argument("build_preconditioned_matrix: empty plan");
  if (plan.rho.size() != plan.m()) throw std::invalid_argument("build_preconditioned_matrix: weight count mismatch");
  const auto spectra = haar_atom_spectra(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(plan.m()));
  Matrix a(static_cast<Eigen::Index>(plan.m()), static_cast<Eigen::Index>(n * n));
  for (std::size_t j = 0; j < plan.m(); ++j) {
    require_in_range(plan.freqs[j], n);
    for (std::size_t c = 0; c < n * n; ++c)
      a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) = scale * plan.rho[j] * spectra[c].at(plan.freqs[j]);
  }
  return a;
}

/// max_{k1,k2} | sum_w nu(w) rho(w)^2 conj(A_{w,k1}) A_{w,k2} - delta_{k1,k2} |
/// over the full frequency grid, with rho = nu^{-1/2}.
inline double isotropy_deviation(const Density& nu) {
  const std::size_t n = nu.size();
  log2_exact(n);
  if (n > kMaxDenseSide) throw std::length_error("isotropy_deviation: N must be <= 16");
  const auto spectra = haar_atom_spectra(n);
  Matrix rows(static_cast<Eigen::Index>(n * n), static_cast<Eigen::Index>(n * n));
  std::size_t r = 0;
  nu.mass.for_each([&](FrequencyIndex k, const double& mass) {
    if (!(mass > 0.0)) throw std::invalid_argument("isotropy_deviation: density must be positive everywhere");
    const double rho2 = 1.0 / mass;
    const double w = std::sqrt(mass * rho2);
    for (std::size_t c = 0; c < n * n; ++c)
      rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = w * spectra[c].at(k);
    ++r;
  });
  const Matrix gram = rows.adjoint() * rows;
  return (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

/// Mean over i.i.d. draws of rho(w)^2 ||A_w||^2 / N^2, whose expectation
/// is 1; equivalently m E||row||^2 / N^2 for the matrix above.
inline double mean_row_energy(const Density& nu, std::size_t draws, std::uint64_t seed) {
  const std::size_t n = nu.size();
  const auto plan = draw_plan(nu, draws, seed);
  // every Fourier row has unit norm in the (orthonormal) Haar basis
  double sum = 0.0;
  for (double rho : plan.rho) sum += rho * rho;
  return sum / (static_cast<double>(draws) * static_cast<double>(n * n));
}

struct EdgeLemmaCheck {
  std::size_t n = 0;
  std::size_t max_count = 0;
  std::size_t bound = 0;  // 6p
  bool passed() const { return max_count <= bound; }
};

/// Max over adjacent pixel pairs (t1,t2),(t1,t2+1) of the number of Haar
/// atoms taking different values on the pair. The transposed pairs give the
/// same count by symmetry of the atom family and are scanned as well.
inline EdgeLemmaCheck check_edge_lemma(std::size_t n) {
  const int p = log2_exact(n);
  if (n > 64) throw std::length_error("check_edge_lemma: N must be <= 64");
  std::vector<std::size_t> horizontal(n * (n - 1), 0), vertical((n - 1) * n, 0);
  for (std::size_t pos = 0; pos < n * n; ++pos) {
    const Image h = haar_atom_2d(haar_index_at(pos, p), p);
    for (std::size_t t1 = 0; t1 < n; ++t1)
      for (std::size_t t2 = 0; t2 + 1 < n; ++t2) {
        horizontal[t1 * (n - 1) + t2] += h(t1, t2 + 1) != h(t1, t2);
        vertical[t2 * n + t1] += h(t2 + 1, t1) != h(t2, t1);
      }
  }
  EdgeLemmaCheck out{n, 0, 6 * static_cast<std::size_t>(p)};
  for (auto c : horizontal) out.max_count = std::max(out.max_count, c);
  for (auto c : vertical) out.max_count = std::max(out.max_count, c);
  return out;
}

struct AtomTvCheck {
  std::size_t n = 0;
  double max_tv = 0.0;
  double bound = 8.0;
  bool passed() const { return max_tv <= bound + 1e-12; }
};

inline AtomTvCheck check_atom_tv(std::size_t n) {
  const int p = log2_exact(n);
  if (n > 64) throw std::length_error("check_atom_tv: N must be <= 64");
  AtomTvCheck out{n};
  for (std::size_t pos = 0; pos < n * n; ++pos)
    out.max_tv = std::max(out.max_tv, tv_norm(haar_atom_2d(haar_index_at(pos, p), p)));
  return out;
}

/// max_k k |w_(k)| / ||f||_TV for the mean-removed image, w_(k) the k-th
/// largest Haar coefficient in magnitude.
inline double check_coeff_decay(const Image& f) {
  Image g = f;
  Complex mean{};
  for (const auto& v : g.pixels()) mean += v;
  mean /= static_cast<double>(g.pixel_count());
  g += -mean;
  const double tv = tv_norm(g);
  if (!(tv > 0.0)) throw std::domain_error("check_coeff_decay: image has zero total variation");
  const auto w = haar_forward(g);
  std::vector<double> mags(w.values.size());
  std::transform(w.values.begin(), w.values.end(), mags.begin(), [](Complex c) { return std::abs(c); });
  std::sort(mags.begin(), mags.end(), std::greater<>());
  double best = 0.0;
  for (std::size_t k = 0; k < mags.size(); ++k) best = std::max(best, static_cast<double>(k + 1) * mags[k] / tv);
  return best;
}

}  // namespace vdcs
