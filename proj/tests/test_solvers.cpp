#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "vdcs/phantom.hpp"
#include "vdcs/solvers.hpp"

namespace vdcs {
namespace {

Image random_image_c(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Image f(n);
  for (auto& v : f.pixels()) v = {rng.normal(), rng.normal()};
  return f;
}

SamplingPlan full_plan(std::size_t n) {
  SamplingPlan plan{n, {}, {}, "full", 0, "deterministic"};
  FrequencyGrid<char> grid(n);
  for (std::size_t s = 0; s < n * n; ++s) {
    plan.freqs.push_back(grid.frequency_at(s));
    plan.rho.push_back(1.0);
  }
  return plan;
}

double rel_err(const Image& truth, const Image& g) { return l2_norm(g - truth) / l2_norm(truth); }

// Projection onto {x : sum_j w_j |x_{s_j} - y_j|^2 <= r^2} by bisection on the
// multiplier, written against the raw (unmerged) samples.
Spectrum bisection_projection(const Spectrum& z, const SamplingPlan& plan, std::span<const Complex> y, double r) {
  const auto at = [&](double lambda) {
    Spectrum x = z;
    FrequencyGrid<double> wsum(z.size(), 0.0);
    FrequencyGrid<Complex> wy(z.size(), Complex{});
    for (std::size_t j = 0; j < plan.m(); ++j) {
      const double w = plan.rho[j] * plan.rho[j];
      wsum.at(plan.freqs[j]) += w;
      wy.at(plan.freqs[j]) += w * y[j];
    }
    for (std::size_t s = 0; s < x.data().size(); ++s)
      if (wsum.data()[s] > 0.0) x.data()[s] = (z.data()[s] + lambda * wy.data()[s]) / (1.0 + lambda * wsum.data()[s]);
    double res = 0.0;
    for (std::size_t j = 0; j < plan.m(); ++j) res += plan.rho[j] * plan.rho[j] * std::norm(x.at(plan.freqs[j]) - y[j]);
    return std::pair{x, std::sqrt(res)};
  };
  if (at(0.0).second <= r) return z;
  double lo = 0.0, hi = 1.0;
  while (at(hi).second > r) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (at(mid).second > r ? lo : hi) = mid;
  }
  return at(hi).first;
}

TEST(DataConstraint, ProjectionMatchesBisectionOracle) {
  const std::size_t n = 8;
  const auto plan = draw_plan(density_inverse_square(n), 30, 3);  // contains repeats
  const auto clean = partial_dft(random_image_c(n, 8), plan);
  for (double eps : {0.05, 0.3, 1.0}) {
    // noise at half the radius keeps repeated samples consistent
    const auto y = add_noise(clean, plan, 0.5 * eps, NoiseModel::weighted, 8);
    const DataConstraint c(y, plan, eps, NoiseModel::weighted);
    ASSERT_FALSE(c.inconsistent()) << eps;
    for (int trial = 0; trial < 5; ++trial) {
      const auto g = random_image_c(n, 100 + trial);
      Spectrum s = dft2_forward(g);
      const auto oracle = bisection_projection(s, plan, y, c.radius());
      c.project(s);
      for (std::size_t i = 0; i < s.data().size(); ++i) EXPECT_NEAR(std::abs(s.data()[i] - oracle.data()[i]), 0.0, 1e-8);
      const auto p = c.project(g);
      EXPECT_LE(c.residual_norm(p), c.radius() * (1 + 1e-10));
      EXPECT_LE(l2_norm(c.project(p) - p), 1e-12 * l2_norm(p));
    }
  }
}

TEST(DataConstraint, ProjectionIsNearestFeasiblePoint) {
  const std::size_t n = 8;
  const auto plan = draw_plan(density_inverse_square(n), 20, 5);
  const auto y = partial_dft(random_image_c(n, 1), plan);
  const DataConstraint c(y, plan, 0.5, NoiseModel::unweighted);
  const auto g = random_image_c(n, 2);
  const auto p = c.project(g);
  // variational inequality <g - p, z - p> <= 0 for feasible z
  for (int trial = 0; trial < 20; ++trial) {
    const auto z = c.project(random_image_c(n, 50 + trial));
    Complex dot{};
    for (std::size_t i = 0; i < g.pixel_count(); ++i) dot += (g.pixels()[i] - p.pixels()[i]) * std::conj(z.pixels()[i] - p.pixels()[i]);
    EXPECT_LE(dot.real(), 1e-10);
  }
}

TEST(DataConstraint, EqualityAndInconsistentRepeats) {
  const std::size_t n = 8;
  SamplingPlan plan{n, {{1, 1}, {1, 1}, {0, 2}}, {1.0, 1.0, 1.0}, "test", 0, "deterministic"};
  const std::vector<Complex> y{1.0, 3.0, 2.0};
  const DataConstraint exact(y, plan, 0.0, NoiseModel::weighted);
  EXPECT_TRUE(exact.inconsistent());
  const auto p = dft2_forward(exact.project(Image(n)));
  EXPECT_NEAR(std::abs(p.at(1, 1) - Complex(2.0)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(p.at(0, 2) - Complex(2.0)), 0.0, 1e-12);
  const auto [g, report] = tv_min_reconstruct(y, plan, {});
  EXPECT_FALSE(report.message.empty());
  const std::vector<Complex> same{2.0, 2.0, 2.0};
  EXPECT_FALSE(DataConstraint(same, plan, 0.0, NoiseModel::weighted).inconsistent());
  const std::vector<Complex> short_y{1.0};
  EXPECT_THROW(DataConstraint(short_y, plan, 0.0, NoiseModel::weighted), std::invalid_argument);
  EXPECT_THROW(DataConstraint(y, plan, -1.0, NoiseModel::weighted), std::invalid_argument);
}

TEST(OperatorNorm, GradientAndHaar) {
  const std::size_t n = 32;
  // ||grad||^2 = 2 * 4 sin^2(pi (n-1) / (2n)) for the non-periodic difference
  const double exact = std::sqrt(8.0) * std::sin(std::numbers::pi * (n - 1) / (2.0 * n));
  const double est = operator_norm_estimate(GradientRegularizer{}, n, 200);
  EXPECT_LE(est, exact * (1 + 1e-12));
  EXPECT_GE(est, exact * (1 - 1e-2));
  EXPECT_NEAR(operator_norm_estimate(HaarRegularizer{}, n, 10), 1.0, 1e-12);
}

TEST(Solvers, FullSamplingRecoversRandomImages) {
  const std::size_t n = 16;
  const auto plan = full_plan(n);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto f = random_image_c(n, seed);
    const auto y = partial_dft(f, plan);
    const auto [g_tv, r_tv] = tv_min_reconstruct(y, plan, {});
    const auto [g_h, r_h] = l1_haar_reconstruct(y, plan, {});
    EXPECT_TRUE(r_tv.converged);
    EXPECT_TRUE(r_h.converged);
    EXPECT_LE(rel_err(f, g_tv), 1e-6);
    EXPECT_LE(rel_err(f, g_h), 1e-6);
  }
}

TEST(Solvers, DcOnlyRecoversConstant) {
  const Image f(16, 0.7);
  SamplingPlan plan{16, {{0, 0}}, {1.0}, "dc", 0, "deterministic"};
  const auto [g, report] = tv_min_reconstruct(partial_dft(f, plan), plan, {});
  EXPECT_TRUE(report.converged);
  EXPECT_LE(rel_err(f, g), 1e-12);
}

TEST(Solvers, TvRecoversPiecewiseConstantPhantom) {
  const auto f = rectangles_phantom(32, 40, 7);
  const auto plan = draw_plan(density_inverse_square(32), 410, 1);
  const auto [g, report] = tv_min_reconstruct(partial_dft(f, plan), plan, {});
  EXPECT_TRUE(report.converged) << report.message;
  EXPECT_LE(rel_err(f, g), 1e-3);
  EXPECT_LE(report.constraint_violation, 1e-6);
  // minimality witness: truth is feasible
  EXPECT_LE(report.objective, tv_norm(f) * (1 + 1e-5));
}

TEST(Solvers, HaarRecoversSingleAtom) {
  const int p = 5;
  const auto f = haar_atom_2d(HaarIndex::detail({1, 0}, 2, 1, 3), p);
  const auto plan = draw_plan(density_inverse_square(32), 512, 4);
  const auto [g, report] = l1_haar_reconstruct(partial_dft(f, plan), plan, {});
  EXPECT_TRUE(report.converged) << report.message;
  EXPECT_LE(rel_err(f, g), 1e-3);
  EXPECT_LE(report.objective, 1.0 + 1e-5);
}

TEST(Solvers, HaarNoisyErrorScalesWithEpsilon) {
  const auto f = rectangles_phantom(32, 40, 7);
  const auto plan = draw_plan(density_inverse_square(32), 410, 2);
  const auto clean = partial_dft(f, plan);
  SolverOptions opts;
  opts.epsilon = 0.1;
  const auto y = add_noise(clean, plan, opts.epsilon, NoiseModel::weighted, 77);
  const auto [g, report] = l1_haar_reconstruct(y, plan, opts);
  EXPECT_TRUE(report.converged) << report.message;
  // observed absolute error / eps is about 0.6; 2 is the regression ceiling
  EXPECT_LE(l2_norm(g - f) / opts.epsilon, 2.0);
}

TEST(Solvers, StableRecoveryEnvelopeAcrossPhantoms) {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto f = rectangles_phantom(32, 40, 100 + seed);
    const auto plan = draw_plan(density_inverse_square(32), 410, seed);
    SolverOptions opts;
    opts.epsilon = 0.1;
    const auto y = add_noise(partial_dft(f, plan), plan, opts.epsilon, NoiseModel::weighted, seed);
    const auto [g, report] = tv_min_reconstruct(y, plan, opts);
    ASSERT_TRUE(report.converged) << seed;
    // phantoms are exactly gradient-sparse, so the sigma_s term vanishes
    worst = std::max(worst, l2_norm(g - f) / opts.epsilon);
  }
  EXPECT_LE(worst, 50.0);
}

TEST(Solvers, ScalingEquivariance) {
  const auto f = rectangles_phantom(16, 20, 3);
  const auto plan = draw_plan(density_inverse_square(16), 120, 6);
  const auto y = add_noise(partial_dft(f, plan), plan, 0.05, NoiseModel::weighted, 1);
  SolverOptions a;
  a.epsilon = 0.05;
  a.primal_tol = 1e-8;
  const auto [g1, r1] = tv_min_reconstruct(y, plan, a);
  std::vector<Complex> y3(y);
  for (auto& v : y3) v *= 3.0;
  SolverOptions b = a;
  b.epsilon = 0.15;
  const auto [g3, r3] = tv_min_reconstruct(y3, plan, b);
  ASSERT_TRUE(r1.converged && r3.converged);
  EXPECT_LE(l2_norm(g3 - Complex(3.0) * g1) / l2_norm(g3), 1e-3);
}

TEST(Solvers, TvShiftEquivariance) {
  const auto f = rectangles_phantom(16, 20, 5);
  auto plan = draw_plan(density_inverse_square(16), 120, 9);
  plan.freqs.push_back({0, 0});
  plan.rho.push_back(1.0 / std::sqrt(density_inverse_square(16).at({0, 0})));
  Image shifted = f;
  shifted += Complex(0.4);
  SolverOptions opts;
  opts.primal_tol = 1e-8;
  const auto [g, r] = tv_min_reconstruct(partial_dft(f, plan), plan, opts);
  const auto [gs, rs] = tv_min_reconstruct(partial_dft(shifted, plan), plan, opts);
  ASSERT_TRUE(r.converged && rs.converged);
  Image diff = gs - g;
  diff += Complex(-0.4);
  EXPECT_LE(l2_norm(diff) / l2_norm(shifted), 1e-4);
}

TEST(Solvers, NonConvergenceIsReported) {
  const auto f = rectangles_phantom(32, 40, 7);
  const auto plan = draw_plan(density_inverse_square(32), 410, 1);
  SolverOptions opts;
  opts.max_iters = 20;
  const auto [g, report] = tv_min_reconstruct(partial_dft(f, plan), plan, opts);
  EXPECT_FALSE(report.converged);
  EXPECT_EQ(report.iterations, 20u);
  EXPECT_NE(report.message.find("did not converge"), std::string::npos);
}

TEST(Solvers, RejectsInvalidSteps) {
  const auto plan = full_plan(8);
  const auto y = partial_dft(Image(8, 1.0), plan);
  SolverOptions opts;
  opts.tau = 1.0;
  opts.sigma = 1.0;
  EXPECT_THROW(tv_min_reconstruct(y, plan, opts), std::invalid_argument);
  opts = {};
  opts.check_window = 0;
  EXPECT_THROW(tv_min_reconstruct(y, plan, opts), std::invalid_argument);
}

TEST(AddNoise, ExactNormAndDeterminism) {
  const auto plan = draw_plan(density_inverse_square(16), 100, 2);
  const auto clean = partial_dft(rectangles_phantom(16, 20, 1), plan);
  EXPECT_EQ(add_noise(clean, plan, 0.0, NoiseModel::weighted, 5), clean);
  for (auto model : {NoiseModel::weighted, NoiseModel::unweighted}) {
    const auto noisy = add_noise(clean, plan, 0.2, model, 5);
    double acc = 0.0;
    for (std::size_t j = 0; j < clean.size(); ++j) {
      const double w = model == NoiseModel::weighted ? plan.rho[j] : 1.0;
      acc += w * w * std::norm(noisy[j] - clean[j]);
    }
    EXPECT_NEAR(std::sqrt(acc) / std::sqrt(100.0), 0.2, 1e-12);
    EXPECT_EQ(add_noise(clean, plan, 0.2, model, 5), noisy);
  }
  EXPECT_THROW(add_noise(clean, plan, -0.1, NoiseModel::weighted, 1), std::invalid_argument);
}

TEST(NoiseModel, Parsing) {
  EXPECT_EQ(parse_noise_model("weighted"), NoiseModel::weighted);
  EXPECT_EQ(parse_noise_model("unweighted"), NoiseModel::unweighted);
  EXPECT_STREQ(to_string(NoiseModel::unweighted), "unweighted");
  EXPECT_THROW(parse_noise_model("other"), std::invalid_argument);
}

}  // namespace
}  // namespace vdcs
