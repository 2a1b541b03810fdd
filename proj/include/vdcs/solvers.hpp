#pragma once

// Constrained reconstruction
//
//   min_g R(g)  subject to  || D (F_Omega g - y) ||_2 <= eps sqrt(m)
//
// with R = anisotropic TV or the l1 norm of the Haar coefficients, and
// D = diag(rho) (weighted) or I (unweighted).
//
// Solved with a first-order primal-dual iteration (Chambolle-Pock):
//   q      <- clip_{|.|<=1}(q + sigma K gbar)
//   g_new  <- P_C(g - tau K^* q)
//   gbar   <- 2 g_new - g
// where K is the sparsifying operator (gradient or Haar) and P_C the
// Euclidean projection onto the data-consistency set C. Because F is
// unitary, P_C acts only on the sampled K-space cells: repeated frequencies
// are merged into one weighted target and the ellipsoid projection reduces
// to a scalar Lagrange multiplier found by Newton's method.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vdcs/fourier.hpp"
#include "vdcs/haar.hpp"
#include "vdcs/image.hpp"
#include "vdcs/random.hpp"
#include "vdcs/sampling.hpp"

namespace vdcs {

enum class NoiseModel { weighted, unweighted };

inline const char* to_string(NoiseModel m) { return m == NoiseModel::weighted ? "weighted" : "unweighted"; }

inline NoiseModel parse_noise_model(const std::string& s) {
  if (s == "weighted") return NoiseModel::weighted;
  if (s == "unweighted") return NoiseModel::unweighted;
  throw std::invalid_argument("unknown noise model '" + s + "' (expected weighted|unweighted)");
}

struct SolverOptions {
  std::size_t max_iters = 20000;
  /// Relative objective change allowed over one check window.
  double primal_tol = 1e-7;
  /// Allowed constraint violation, in units of sqrt(m) max(eps, 1).
  double dual_tol = 1e-6;
  /// Step sizes; when both are 0, tau = step_ratio / L and
  /// sigma = 1 / (step_ratio L) with L the power-method estimate of ||K||.
  double tau = 0.0;
  double sigma = 0.0;
  double step_ratio = 0.01;
  NoiseModel noise_model = NoiseModel::weighted;
  double epsilon = 0.0;
  /// Convergence is tested every check_window iterations.
  std::size_t check_window = 50;
  std::size_t power_iterations = 50;
};

struct SolverReport {
  std::size_t iterations = 0;
  /// ||g_k - g_{k-w}||_2 / ||g_k||_2 over the last check window w.
  double primal_residual = 0.0;
  /// max(0, ||D(F_Omega g - y)|| - eps sqrt(m)) / (sqrt(m) max(eps, 1)).
  double constraint_violation = 0.0;
  double objective = 0.0;
  /// Relative objective change over the last check window.
  double objective_change = 0.0;
  double operator_norm = 0.0;
  /// Step sizes used.
  double tau = 0.0;
  double sigma = 0.0;
  bool converged = false;
  std::string message;
};

/// Weighted data-consistency set, projectable in K-space.
class DataConstraint {
 public:
  DataConstraint(std::span<const Complex> y, const SamplingPlan& plan, double epsilon, NoiseModel model)
      : n_(plan.n), y_(y.begin(), y.end()), freqs_(plan.freqs), epsilon_(epsilon) {
    if (y.size() != plan.m()) throw std::invalid_argument("measurement count does not match plan");
    if (plan.rho.size() != plan.m()) throw std::invalid_argument("plan weight count does not match plan");
    if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be >= 0");
    log2_exact(n_);
    weights_.resize(plan.m());
    for (std::size_t j = 0; j < plan.m(); ++j) {
      require_in_range(plan.freqs[j], n_);
      const double d = model == NoiseModel::weighted ? plan.rho[j] : 1.0;
      if (!(d > 0.0)) throw std::invalid_argument("weights must be positive");
      weights_[j] = d * d;
    }
    const std::size_t m = plan.m();
    radius_ = epsilon * std::sqrt(static_cast<double>(m));

    // merge repeats: sum_j w_j |x - y_j|^2 = W |x - ybar|^2 + offset
    Spectrum grid(n_);
    std::map<std::size_t, std::size_t> index;
    std::vector<std::size_t> group(m);
    double energy = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t s = grid.slot(freqs_[j]);
      auto [it, inserted] = index.try_emplace(s, slots_.size());
      if (inserted) {
        slots_.push_back(s);
        total_weight_.push_back(0.0);
        target_.push_back({});
      }
      group[j] = it->second;
      total_weight_[it->second] += weights_[j];
      target_[it->second] += weights_[j] * y_[j];
      energy += weights_[j] * std::norm(y_[j]);
    }
    for (std::size_t u = 0; u < slots_.size(); ++u) target_[u] /= total_weight_[u];
    double offset = 0.0;
    for (std::size_t j = 0; j < m; ++j) offset += weights_[j] * std::norm(y_[j] - target_[group[j]]);
    // rounding in the merged means leaves offset ~ 1e-16 * energy for exact repeats
    const double r2 = radius_ * radius_ - offset;
    if (r2 < -1e-12 * energy) {
      inconsistent_ = true;
      reduced_radius_ = 0.0;
    } else {
      reduced_radius_ = std::sqrt(std::max(r2, 0.0));
    }
  }

  std::size_t size() const { return n_; }
  std::size_t m() const { return y_.size(); }
  double epsilon() const { return epsilon_; }
  double radius() const { return radius_; }
  /// True when repeated samples disagree by more than the noise budget allows.
  bool inconsistent() const { return inconsistent_; }

  /// In-place Euclidean projection of a spectrum onto C.
  void project(Spectrum& spectrum) const {
    auto data = spectrum.data();
    if (reduced_radius_ == 0.0) {
      for (std::size_t u = 0; u < slots_.size(); ++u) data[slots_[u]] = target_[u];
      return;
    }
    double excess = 0.0;
    for (std::size_t u = 0; u < slots_.size(); ++u) excess += total_weight_[u] * std::norm(data[slots_[u]] - target_[u]);
    const double r2 = reduced_radius_ * reduced_radius_;
    if (excess <= r2) return;

    // Newton on phi(l) = sum W |d|^2 / (1 + l W)^2 - R^2; convex and
    // decreasing, so iterates from l = 0 increase monotonically to the root.
    double lambda = 0.0;
    for (int it = 0; it < 200; ++it) {
      double phi = -r2, dphi = 0.0;
      for (std::size_t u = 0; u < slots_.size(); ++u) {
        const double w = total_weight_[u];
        const double a = w * std::norm(data[slots_[u]] - target_[u]);
        const double den = 1.0 + lambda * w;
        phi += a / (den * den);
        dphi -= 2.0 * a * w / (den * den * den);
      }
      if (phi <= 1e-15 * r2 || dphi == 0.0) break;
      const double step = phi / dphi;
      lambda -= step;
      if (-step <= 1e-15 * lambda) break;
    }
    for (std::size_t u = 0; u < slots_.size(); ++u) {
      Complex& v = data[slots_[u]];
      v = target_[u] + (v - target_[u]) / (1.0 + lambda * total_weight_[u]);
    }
  }

  Image project(const Image& g) const {
    Spectrum s = dft2_forward(g);
    project(s);
    return dft2_inverse(s);
  }

  /// ||D (F_Omega g - y)||_2 over the original (unmerged) samples.
  double residual_norm(const Image& g) const {
    const Spectrum s = dft2_forward(g);
    double acc = 0.0;
    for (std::size_t j = 0; j < y_.size(); ++j) acc += weights_[j] * std::norm(s.data()[s.slot(freqs_[j])] - y_[j]);
    return std::sqrt(acc);
  }

  double violation(const Image& g) const {
    const double excess = std::max(0.0, residual_norm(g) - radius_);
    return excess / (std::sqrt(static_cast<double>(m())) * std::max(epsilon_, 1.0));
  }

 private:
  std::size_t n_;
  std::vector<Complex> y_;
  std::vector<FrequencyIndex> freqs_;
  std::vector<double> weights_;
  double epsilon_;
  double radius_ = 0.0;
  double reduced_radius_ = 0.0;
  bool inconsistent_ = false;
  std::vector<std::size_t> slots_;
  std::vector<double> total_weight_;
  std::vector<Complex> target_;
};

/// Anisotropic TV: K = discrete gradient (dx then dy).
struct GradientRegularizer {
  std::vector<Complex> apply(const Image& g) const { return gradient(g).flattened(); }
  Image adjoint(std::span<const Complex> q, std::size_t n) const {
    GradientField f{n, std::vector<Complex>(q.begin(), q.begin() + (n - 1) * n),
                    std::vector<Complex>(q.begin() + (n - 1) * n, q.end())};
    return gradient_adjoint(f);
  }
  double objective(const Image& g) const { return tv_norm(g); }
};

/// l1 of bivariate Haar coefficients: K = H (unitary).
struct HaarRegularizer {
  std::vector<Complex> apply(const Image& g) const { return haar_forward(g).values; }
  Image adjoint(std::span<const Complex> q, std::size_t n) const {
    return haar_inverse(HaarCoeffs{log2_exact(n), std::vector<Complex>(q.begin(), q.end())});
  }
  double objective(const Image& g) const { return lp_norm(haar_forward(g).values, 1.0); }
};

/// Power-method estimate of ||K|| (deterministic start vector).
template <class Regularizer>
double operator_norm_estimate(const Regularizer& reg, std::size_t n, std::size_t iterations) {
  Rng rng(0x5eed);
  Image x(n);
  for (auto& v : x.pixels()) v = Complex(rng.normal(), rng.normal());
  double norm = l2_norm(x);
  double estimate = 0.0;
  for (std::size_t it = 0; it < iterations && norm > 0.0; ++it) {
    x *= 1.0 / norm;
    const auto kx = reg.apply(x);
    x = reg.adjoint(kx, n);
    norm = l2_norm(x);
    estimate = std::sqrt(norm);
  }
  return estimate;
}

template <class Regularizer>
std::pair<Image, SolverReport> primal_dual_reconstruct(const Regularizer& reg, const DataConstraint& constraint,
                                                        const SolverOptions& opts) {
  const std::size_t n = constraint.size();
  if (opts.check_window == 0) throw std::invalid_argument("check_window must be positive");
  SolverReport report;
  report.operator_norm = operator_norm_estimate(reg, n, opts.power_iterations);
  const double lip = report.operator_norm * 1.001;  // margin for the estimate
  double tau = opts.tau, sigma = opts.sigma;
  if (tau <= 0.0 && sigma <= 0.0) {
    if (!(opts.step_ratio > 0.0)) throw std::invalid_argument("step_ratio must be positive");
    tau = opts.step_ratio / lip;
    sigma = 1.0 / (opts.step_ratio * lip);
  } else if (tau <= 0.0) {
    tau = 1.0 / (sigma * lip * lip);
  } else if (sigma <= 0.0) {
    sigma = 1.0 / (tau * lip * lip);
  }
  if (tau * sigma * lip * lip > 1.0 + 1e-12) throw std::invalid_argument("step sizes violate tau*sigma*L^2 <= 1");

  // start from the minimum-energy consistent image
  Image g = constraint.project(Image(n));
  Image gbar = g;
  Image snapshot = g;
  std::vector<Complex> q(reg.apply(g).size());
  double last_objective = reg.objective(g);

  for (std::size_t it = 1; it <= opts.max_iters; ++it) {
    const auto kgbar = reg.apply(gbar);
    std::vector<Complex> q_next(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
      const Complex v = q[i] + sigma * kgbar[i];
      const double mag = std::abs(v);
      q_next[i] = mag > 1.0 ? v / mag : v;
    }
    Image step = reg.adjoint(q_next, n);
    step *= -tau;
    step += g;
    Image next = constraint.project(step);

    auto np = next.pixels();
    auto gp = g.pixels();
    auto bp = gbar.pixels();
    for (std::size_t i = 0; i < np.size(); ++i) bp[i] = 2.0 * np[i] - gp[i];
    g = std::move(next);
    q = std::move(q_next);
    report.iterations = it;

    if (it % opts.check_window == 0 || it == opts.max_iters) {
      double diff2 = 0.0, norm2 = 0.0;
      auto gp2 = g.pixels();
      auto sp = snapshot.pixels();
      for (std::size_t i = 0; i < gp2.size(); ++i) {
        diff2 += std::norm(gp2[i] - sp[i]);
        norm2 += std::norm(gp2[i]);
      }
      report.primal_residual = norm2 > 0.0 ? std::sqrt(diff2 / norm2) : std::sqrt(diff2);
      snapshot = g;
      const double obj = reg.objective(g);
      report.objective_change = std::abs(obj - last_objective) / std::max(std::abs(obj), 1e-300);
      if (obj == 0.0 && last_objective == 0.0) report.objective_change = 0.0;
      last_objective = obj;
      if (report.objective_change <= opts.primal_tol && report.primal_residual <= opts.primal_tol &&
          constraint.violation(g) <= opts.dual_tol) {
        report.converged = true;
        break;
      }
    }
  }
  report.tau = tau;
  report.sigma = sigma;
  report.objective = reg.objective(g);
  report.constraint_violation = constraint.violation(g);
  if (constraint.inconsistent())
    report.message = "repeated samples disagree beyond the noise budget; returned the least-squares consistent image";
  if (!report.converged)
    report.message += (report.message.empty() ? "" : "; ") + std::string("did not converge within ") +
                      std::to_string(opts.max_iters) + " iterations";
  return {std::move(g), report};
}

inline std::pair<Image, SolverReport> tv_min_reconstruct(std::span<const Complex> y, const SamplingPlan& plan,
                                                         const SolverOptions& opts = {}) {
  const DataConstraint c(y, plan, opts.epsilon, opts.noise_model);
  return primal_dual_reconstruct(GradientRegularizer{}, c, opts);
}

inline std::pair<Image, SolverReport> l1_haar_reconstruct(std::span<const Complex> y, const SamplingPlan& plan,
                                                          const SolverOptions& opts = {}) {
  const DataConstraint c(y, plan, opts.epsilon, opts.noise_model);
  return primal_dual_reconstruct(HaarRegularizer{}, c, opts);
}

/// Adds i.i.d. complex Gaussian noise rescaled so that ||rho o xi||_2
/// (weighted) or ||xi||_2 (unweighted) equals eps sqrt(m) exactly.
inline std::vector<Complex> add_noise(std::span<const Complex> clean, const SamplingPlan& plan, double epsilon,
                                      NoiseModel model, std::uint64_t seed) {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("add_noise: epsilon must be >= 0");
  if (clean.size() != plan.m()) throw std::invalid_argument("add_noise: measurement count mismatch");
  std::vector<Complex> out(clean.begin(), clean.end());
  if (epsilon == 0.0) return out;
  Rng rng(seed);
  std::vector<Complex> xi(out.size());
  double norm2 = 0.0;
  for (std::size_t j = 0; j < xi.size(); ++j) {
    xi[j] = rng.complex_normal();
    const double w = model == NoiseModel::weighted ? plan.rho[j] : 1.0;
    norm2 += w * w * std::norm(xi[j]);
  }
  const double scale = epsilon * std::sqrt(static_cast<double>(out.size())) / std::sqrt(norm2);
  for (std::size_t j = 0; j < xi.size(); ++j) out[j] += scale * xi[j];
  return out;
}

}  // namespace vdcs
