#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "vdcs/vdcs.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace vdcs::cli {

namespace {

std::size_t parse_count(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  long long v = -1;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || v < 1) throw InvalidInput("invalid " + what + " '" + s + "'");
  return static_cast<std::size_t>(v);
}

double parse_alpha(const std::string& s) {
  if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  std::size_t pos = 0;
  double v = std::numeric_limits<double>::quiet_NaN();
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || !(v >= 0.0)) throw InvalidInput("invalid power-law exponent '" + s + "'");
  return v;
}

void require_side(std::size_t n, std::size_t max_side) {
  if (n < 2 || !is_power_of_two(n))
    throw InvalidInput("N must be a power of two >= 2 (got " + std::to_string(n) + ")");
  if (n > max_side) throw InvalidInput("N must be <= " + std::to_string(max_side) + " (got " + std::to_string(n) + ")");
}

fs::path prepare_out(const RunManifest& m) {
  const fs::path dir(m.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + m.out + "': " + ec.message());
  return dir;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

void write_manifest(const fs::path& dir, RunManifest m) {
  m.version = kVersion;
  write_json(dir / "manifest.json", to_json(m));
}

std::ofstream open_csv(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << std::setprecision(17);
  return out;
}

void write_grid_csv(const fs::path& path, const FrequencyGrid<double>& grid, const char* column) {
  auto out = open_csv(path);
  out << "k1,k2," << column << '\n';
  const int lo = min_frequency(grid.size()), hi = max_frequency(grid.size());
  for (int k1 = lo; k1 <= hi; ++k1)
    for (int k2 = lo; k2 <= hi; ++k2) out << k1 << ',' << k2 << ',' << grid.at(k1, k2) << '\n';
}

json check_item(const std::string& claim, std::size_t n, double bound, double measured, bool passed,
                bool asserted = true) {
  return {{"claim", claim}, {"n", n}, {"bound", bound}, {"measured", measured}, {"passed", passed}, {"asserted", asserted}};
}

bool all_asserted_pass(const json& items) {
  return std::all_of(items.begin(), items.end(),
                     [](const json& it) { return !it.at("asserted").get<bool>() || it.at("passed").get<bool>(); });
}

SolverOptions solver_options_for(const RunManifest& m, double epsilon) {
  SolverOptions o = m.solver_options;
  o.epsilon = epsilon;
  o.noise_model = parse_noise_model(m.noise_model);
  return o;
}

std::pair<Image, SolverReport> solve(const std::string& solver, std::span<const Complex> y, const SamplingPlan& plan,
                                     const SolverOptions& opts) {
  if (solver == "tv") return tv_min_reconstruct(y, plan, opts);
  if (solver == "haar") return l1_haar_reconstruct(y, plan, opts);
  throw InvalidInput("unknown solver '" + solver + "' (expected tv|haar)");
}

double relative_error(const Image& truth, const Image& estimate) {
  const double denom = l2_norm(truth);
  const double num = l2_norm(truth - estimate);
  return denom > 0.0 ? num / denom : num;
}

struct LoadedImage {
  GrayImage gray;
  Image f;
};

LoadedImage load_image(const std::string& path) {
  if (path.empty()) throw InvalidInput("--image is required");
  GrayImage g;
  try {
    g = read_pgm(path);
  } catch (const IoError& e) {
    throw InvalidInput(e.what());
  }
  if (g.width != g.height || !is_power_of_two(g.width) || g.width < 2)
    throw InvalidInput("image must be square with a power-of-two side (got " + std::to_string(g.width) + "x" +
                       std::to_string(g.height) + ")");
  return {g, to_image(g)};
}

}  // namespace

json to_json(const RunManifest& m) {
  const auto& o = m.solver_options;
  return {
      {"command", m.command},
      {"image", m.image},
      {"plan", m.plan},
      {"n", m.n},
      {"density", m.density},
      {"m", m.m},
      {"seed", m.seed},
      {"epsilon", m.epsilon},
      {"noise_model", m.noise_model},
      {"solver", m.solver},
      {"solver_options",
       {{"max_iters", o.max_iters},
        {"primal_tol", o.primal_tol},
        {"dual_tol", o.dual_tol},
        {"step_ratio", o.step_ratio},
        {"tau", o.tau},
        {"sigma", o.sigma},
        {"check_window", o.check_window},
        {"power_iterations", o.power_iterations}}},
      {"alphas", m.alphas},
      {"epsilons", m.epsilons},
      {"trials", m.trials},
      {"jobs", m.jobs},
      {"ns", m.ns},
      {"phantom", m.phantom},
      {"edges", m.edges},
      {"out", m.out},
      {"version", m.version},
  };
}

RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  try {
    m.command = j.at("command").get<std::string>();
    m.image = j.value("image", m.image);
    m.plan = j.value("plan", m.plan);
    m.n = j.value("n", m.n);
    m.density = j.value("density", m.density);
    m.m = j.value("m", m.m);
    m.seed = j.value("seed", m.seed);
    m.epsilon = j.value("epsilon", m.epsilon);
    m.noise_model = j.value("noise_model", m.noise_model);
    m.solver = j.value("solver", m.solver);
    if (j.contains("solver_options")) {
      const auto& s = j.at("solver_options");
      auto& o = m.solver_options;
      o.max_iters = s.value("max_iters", o.max_iters);
      o.primal_tol = s.value("primal_tol", o.primal_tol);
      o.dual_tol = s.value("dual_tol", o.dual_tol);
      o.step_ratio = s.value("step_ratio", o.step_ratio);
      o.tau = s.value("tau", o.tau);
      o.sigma = s.value("sigma", o.sigma);
      o.check_window = s.value("check_window", o.check_window);
      o.power_iterations = s.value("power_iterations", o.power_iterations);
    }
    m.alphas = j.value("alphas", m.alphas);
    m.epsilons = j.value("epsilons", m.epsilons);
    m.trials = j.value("trials", m.trials);
    m.jobs = j.value("jobs", m.jobs);
    m.ns = j.value("ns", m.ns);
    m.phantom = j.value("phantom", m.phantom);
    m.edges = j.value("edges", m.edges);
    m.out = j.value("out", m.out);
    m.version = j.value("version", m.version);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

json to_json(const SolverReport& r) {
  return {{"iterations", r.iterations},
          {"primal_residual", r.primal_residual},
          {"constraint_violation", r.constraint_violation},
          {"objective", r.objective},
          {"objective_change", r.objective_change},
          {"operator_norm", r.operator_norm},
          {"tau", r.tau},
          {"sigma", r.sigma},
          {"converged", r.converged},
          {"message", r.message}};
}

SamplingPlan make_plan(std::size_t n, const std::string& density, std::size_t m, std::uint64_t seed) {
  const auto colon = density.find(':');
  const std::string head = density.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : density.substr(colon + 1);
  if (head == "radial") {
    if (arg.empty()) throw InvalidInput("radial density needs a line count, e.g. radial:16");
    return radial_lines(n, parse_count(arg, "radial line count"));
  }
  if (m < 1) throw InvalidInput("--m must be >= 1 for density '" + density + "'");
  if (head == "lowpass") {
    if (m > n * n) throw InvalidInput("--m exceeds N^2 for the lowpass mask");
    return lowest_frequencies(n, m);
  }
  if (head == "power") {
    if (arg.empty()) throw InvalidInput("power density needs an exponent, e.g. power:2");
    const double alpha = parse_alpha(arg);
    if (std::isinf(alpha)) {
      if (m > n * n) throw InvalidInput("--m exceeds N^2 for power:inf");
      auto plan = lowest_frequencies(n, m);
      plan.density_label = "power:inf";
      return plan;
    }
    return draw_plan(density_power_law(n, alpha), m, seed);
  }
  if (!arg.empty()) throw InvalidInput("density '" + head + "' takes no argument");
  if (head == "uniform") return draw_plan(density_uniform(n), m, seed);
  if (head == "inv-square") return draw_plan(density_inverse_square(n), m, seed);
  if (head == "inv-max") return draw_plan(density_inverse_max(n), m, seed);
  if (head == "kappa") return draw_plan(density_from_kappa(kappa_table(n, KappaVariant::kappa)), m, seed);
  throw InvalidInput("unknown density '" + density +
                     "' (expected uniform|inv-square|inv-max|kappa|power:<alpha>|lowpass|radial:<L>)");
}

std::uint64_t noise_seed(std::uint64_t seed) { return seed ^ 0x9e3779b97f4a7c15ULL; }

int cmd_coherence(const RunManifest& m, std::ostream& log) {
  require_side(m.n, 256);
  const auto dir = prepare_out(m);
  const std::size_t n = m.n;
  const int p = log2_exact(n);
  const auto mu = local_coherence_exact(n);
  const auto kappa = kappa_table(n, KappaVariant::kappa);
  const auto kappa_p = kappa_table(n, KappaVariant::kappa_prime);
  write_grid_csv(dir / "mu_loc.csv", mu, "mu_loc");
  write_grid_csv(dir / "kappa.csv", kappa, "kappa");
  write_grid_csv(dir / "kappa_prime.csv", kappa_p, "kappa_prime");

  double excess_mu = -std::numeric_limits<double>::infinity(), excess_kappa = excess_mu;
  for (std::size_t i = 0; i < n * n; ++i) {
    excess_mu = std::max(excess_mu, mu.data()[i] - kappa.data()[i]);
    excess_kappa = std::max(excess_kappa, kappa.data()[i] - kappa_p.data()[i]);
  }
  const auto uni = univariate_coherence_bound_check(n);
  const double l2 = kappa_l2(n, KappaVariant::kappa), l2p = kappa_l2(n, KappaVariant::kappa_prime);
  const double l2p_bound = 52.0 * std::sqrt(static_cast<double>(p));

  json items = json::array();
  items.push_back(check_item("mu_loc - kappa (max)", n, 1e-9, excess_mu, excess_mu <= 1e-9));
  items.push_back(check_item("kappa - kappa_prime (max)", n, 0.0, excess_kappa, excess_kappa <= 0.0));
  items.push_back(check_item("univariate bound ratio", n, 1.0, uni.max_ratio, uni.max_ratio <= 1.0));
  items.push_back(check_item("univariate corollary ratio", n, 1.0, uni.max_corollary_ratio, uni.max_corollary_ratio <= 1.0));
  items.push_back(check_item("||kappa_prime||_2 <= 52 sqrt(p)", n, l2p_bound, l2p, l2p <= l2p_bound, false));
  const json report = {{"n", n},
                       {"p", p},
                       {"kappa_l2", l2},
                       {"kappa_prime_l2", l2p},
                       {"mutual_coherence", *std::max_element(mu.data().begin(), mu.data().end())},
                       {"checks", items}};
  write_json(dir / "coherence_report.json", report);
  write_manifest(dir, m);
  const bool ok = all_asserted_pass(items);
  log << "coherence N=" << n << ": ||kappa||_2=" << l2 << " ||kappa'||_2=" << l2p << (ok ? " [bounds pass]" : " [BOUND FAILED]")
      << '\n';
  return ok ? kSuccess : kVerificationFailed;
}

int cmd_sample(const RunManifest& m, std::ostream& log) {
  require_side(m.n, 4096);
  const auto plan = make_plan(m.n, m.density, m.m, m.seed);
  const auto dir = prepare_out(m);
  write_plan_csv((dir / "plan.csv").string(), plan);
  write_pgm((dir / "mask.pgm").string(), plan_mask(plan));
  FrequencyGrid<char> grid(plan.n);
  std::set<std::size_t> distinct;
  for (const auto& k : plan.freqs) distinct.insert(grid.slot(k));
  write_json(dir / "sample_summary.json", {{"n", plan.n},
                                           {"m", plan.m()},
                                           {"distinct", distinct.size()},
                                           {"duplicates", plan.m() - distinct.size()},
                                           {"density", plan.density_label},
                                           {"generator", plan.generator},
                                           {"seed", plan.seed}});
  write_manifest(dir, m);
  log << "sampled " << plan.m() << " frequencies (" << distinct.size() << " distinct) from " << plan.density_label << '\n';
  return kSuccess;
}

int cmd_reconstruct(const RunManifest& m, std::ostream& log) {
  const auto input = load_image(m.image);
  const std::size_t n = input.f.size();
  if (m.n != 0 && m.n != n) throw InvalidInput("--n does not match the image side " + std::to_string(n));
  SamplingPlan plan;
  if (!m.plan.empty()) {
    try {
      plan = read_plan_csv(m.plan);
    } catch (const IoError& e) {
      throw InvalidInput(e.what());
    }
    if (plan.n != n) throw InvalidInput("plan N does not match the image side");
  } else {
    plan = make_plan(n, m.density, m.m, m.seed);
  }
  if (!(m.epsilon >= 0.0)) throw InvalidInput("--eps must be >= 0");
  const auto opts = solver_options_for(m, m.epsilon);
  const auto y = add_noise(partial_dft(input.f, plan), plan, m.epsilon, opts.noise_model, noise_seed(m.seed));
  const auto [g, report] = solve(m.solver, y, plan, opts);
  const double err = relative_error(input.f, g);

  const auto dir = prepare_out(m);
  write_pgm((dir / "reconstruction.pgm").string(), to_gray(g, input.gray.maxval));
  {
    auto csv = open_csv(dir / "errors.csv");
    csv << "image,density,m,seed,epsilon,noise_model,solver,relative_error,iterations,converged\n";
    csv << m.image << ',' << plan.density_label << ',' << plan.m() << ',' << plan.seed << ',' << m.epsilon << ','
        << m.noise_model << ',' << m.solver << ',' << err << ',' << report.iterations << ',' << (report.converged ? 1 : 0)
        << '\n';
  }
  double max_imag = 0.0;
  for (const auto& v : g.pixels()) max_imag = std::max(max_imag, std::abs(v.imag()));
  if (max_imag > 1e-6) {
    auto csv = open_csv(dir / "complex_values.csv");
    csv << "t1,t2,real,imag\n";
    for (std::size_t t1 = 0; t1 < n; ++t1)
      for (std::size_t t2 = 0; t2 < n; ++t2) csv << t1 << ',' << t2 << ',' << g(t1, t2).real() << ',' << g(t1, t2).imag() << '\n';
  }
  json rep = to_json(report);
  rep["relative_error"] = err;
  rep["max_imag"] = max_imag;
  write_json(dir / "solver_report.json", rep);
  write_manifest(dir, m);
  log << "reconstructed " << n << "x" << n << " from m=" << plan.m() << ": relative error " << err << " after "
      << report.iterations << " iterations" << (report.converged ? "" : " (NOT CONVERGED)") << '\n';
  return report.converged ? kSuccess : kNotConverged;
}

int cmd_sweep(const RunManifest& m, std::ostream& log) {
  const auto input = load_image(m.image);
  const std::size_t n = input.f.size();
  if (m.alphas.empty()) throw InvalidInput("--alphas must list at least one exponent");
  if (m.epsilons.empty()) throw InvalidInput("--eps must list at least one noise level");
  if (m.trials < 1) throw InvalidInput("--trials must be >= 1");
  if (m.m < 1 || m.m > n * n) throw InvalidInput("--m must lie in [1, N^2]");
  std::vector<double> alphas;
  for (const auto& a : m.alphas) alphas.push_back(parse_alpha(a));
  for (double e : m.epsilons)
    if (!(e >= 0.0)) throw InvalidInput("noise levels must be >= 0");
  const auto model = parse_noise_model(m.noise_model);
  if (m.solver != "tv" && m.solver != "haar") throw InvalidInput("unknown solver '" + m.solver + "'");

  struct Cell {
    std::size_t alpha_index, eps_index, trial;
    std::uint64_t seed;
    double error = std::numeric_limits<double>::quiet_NaN();
    bool converged = false;
    std::size_t iterations = 0;
    std::string status = "ok";
  };
  std::vector<Cell> cells;
  for (std::size_t a = 0; a < alphas.size(); ++a)
    for (std::size_t e = 0; e < m.epsilons.size(); ++e)
      for (std::size_t t = 0; t < m.trials; ++t) cells.push_back({a, e, t, m.seed + cells.size()});

  const auto run_cell = [&](Cell& c) {
    try {
      const double alpha = alphas[c.alpha_index];
      const auto plan = std::isinf(alpha) ? lowest_frequencies(n, m.m) : draw_plan(density_power_law(n, alpha), m.m, c.seed);
      const double eps = m.epsilons[c.eps_index];
      const auto y = add_noise(partial_dft(input.f, plan), plan, eps, model, noise_seed(c.seed));
      const auto [g, report] = solve(m.solver, y, plan, solver_options_for(m, eps));
      c.error = relative_error(input.f, g);
      c.converged = report.converged;
      c.iterations = report.iterations;
      if (!report.converged) c.status = "not_converged";
    } catch (const std::exception& ex) {
      c.status = std::string("error: ") + ex.what();
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(m.jobs, 1, std::max<std::size_t>(1, cells.size()));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < jobs; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < cells.size(); i = next++) run_cell(cells[i]);
    });
  for (auto& t : pool) t.join();

  const auto dir = prepare_out(m);
  auto csv = open_csv(dir / "sweep.csv");
  csv << "alpha,epsilon,trial,m,error,seed,converged,iterations,status\n";
  bool all_ok = true;
  for (const auto& c : cells) {
    std::string status = c.status;
    std::replace(status.begin(), status.end(), ',', ';');
    csv << m.alphas[c.alpha_index] << ',' << m.epsilons[c.eps_index] << ',' << c.trial << ',' << m.m << ',' << c.error << ','
        << c.seed << ',' << (c.converged ? 1 : 0) << ',' << c.iterations << ',' << status << '\n';
    all_ok = all_ok && c.status == "ok";
  }
  write_manifest(dir, m);
  log << "sweep: " << cells.size() << " cells" << (all_ok ? "" : " (some cells failed; see status column)") << '\n';
  return all_ok ? kSuccess : kNotConverged;
}

int cmd_verify(const RunManifest& m, std::ostream& log) {
  std::vector<std::size_t> ns = m.ns.empty() ? std::vector<std::size_t>{2, 4, 8, 16, 32, 64} : m.ns;
  for (auto n : ns) require_side(n, 64);
  json items = json::array();
  for (auto n : ns) {
    const auto edge = check_edge_lemma(n);
    items.push_back(check_item("edge crossings <= 6p", n, static_cast<double>(edge.bound), static_cast<double>(edge.max_count),
                               edge.passed()));
    const auto tv = check_atom_tv(n);
    items.push_back(check_item("atom TV <= 8", n, tv.bound, tv.max_tv, tv.passed()));
    const auto uni = univariate_coherence_bound_check(n);
    items.push_back(check_item("univariate bound ratio", n, 1.0, uni.max_ratio, uni.max_ratio <= 1.0));
    const auto mu = local_coherence_exact(n);
    double excess = -std::numeric_limits<double>::infinity();
    mu.for_each([&](FrequencyIndex k, const double& v) { excess = std::max(excess, v - kappa_bound(k.k1, k.k2)); });
    items.push_back(check_item("mu_loc - kappa (max)", n, 1e-9, excess, excess <= 1e-9));
  }
  const double iso = isotropy_deviation(density_from_kappa(kappa_table(8, KappaVariant::kappa)));
  items.push_back(check_item("isotropy of preconditioned system", 8, 1e-10, iso, iso <= 1e-10));
  const double full = *rip_exact(build_preconditioned_matrix(lowest_frequencies(8, 64)) * 8.0, 2).delta_exact;
  items.push_back(check_item("delta_2 of full unitary system", 8, 1e-10, full, full <= 1e-10));

  const auto dir = prepare_out(m);
  const bool ok = all_asserted_pass(items);
  write_json(dir / "verify_report.json", {{"checks", items}, {"passed", ok}});
  write_manifest(dir, m);
  for (const auto& it : items)
    log << (it.at("passed").get<bool>() ? "PASS " : "FAIL ") << it.at("claim").get<std::string>() << " N=" << it.at("n").get<std::size_t>()
        << " measured=" << it.at("measured").get<double>() << '\n';
  return ok ? kSuccess : kVerificationFailed;
}

int cmd_phantom(const RunManifest& m, std::ostream& log) {
  require_side(m.n, 4096);
  Image f;
  if (m.phantom == "rectangles") {
    if (m.n < 8) throw InvalidInput("rectangles phantom needs N >= 8");
    f = rectangles_phantom(m.n, m.edges, m.seed);
  } else if (m.phantom == "shepp-logan") {
    f = shepp_logan(m.n);
  } else if (m.phantom == "random") {
    f = random_image(m.n, m.seed);
  } else {
    throw InvalidInput("unknown phantom '" + m.phantom + "' (expected rectangles|shepp-logan|random)");
  }
  const auto dir = prepare_out(m);
  write_pgm((dir / "phantom.pgm").string(), to_gray(f, 65535));
  write_manifest(dir, m);
  log << "wrote " << (dir / "phantom.pgm").string() << '\n';
  return kSuccess;
}

int run(const RunManifest& m, std::ostream& log) {
  if (m.command == "coherence") return cmd_coherence(m, log);
  if (m.command == "sample") return cmd_sample(m, log);
  if (m.command == "reconstruct") return cmd_reconstruct(m, log);
  if (m.command == "sweep") return cmd_sweep(m, log);
  if (m.command == "verify") return cmd_verify(m, log);
  if (m.command == "phantom") return cmd_phantom(m, log);
  throw InvalidInput("unknown command '" + m.command + "'");
}

int main_entry(int argc, char** argv, std::ostream& log, std::ostream& err) {
  CLI::App app{"Variable-density compressive imaging with Fourier sampling and Haar/TV reconstruction", "vdcs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  RunManifest m;
  std::string manifest_path;
  std::string replay_out;
  auto& o = m.solver_options;

  const auto add_out = [&](CLI::App* c) { c->add_option("--out", m.out, "Output directory")->capture_default_str(); };
  const auto add_sampling = [&](CLI::App* c) {
    c->add_option("--density", m.density, "uniform|inv-square|inv-max|kappa|power:<alpha>|lowpass|radial:<L>")
        ->capture_default_str();
    c->add_option("--m", m.m, "Number of samples");
    c->add_option("--seed", m.seed, "Base seed")->capture_default_str();
  };
  const auto add_solver = [&](CLI::App* c) {
    c->add_option("--noise-model", m.noise_model, "weighted|unweighted")->capture_default_str();
    c->add_option("--solver", m.solver, "tv|haar")->capture_default_str();
    c->add_option("--max-iters", o.max_iters, "Iteration cap")->capture_default_str();
    c->add_option("--tol", o.primal_tol, "Relative objective/step tolerance")->capture_default_str();
    c->add_option("--constraint-tol", o.dual_tol, "Constraint violation tolerance")->capture_default_str();
    c->add_option("--step-ratio", o.step_ratio, "tau L (sigma = 1 / (step_ratio L))")->capture_default_str();
  };

  auto* coh = app.add_subcommand("coherence", "Exact local coherence and the kappa envelopes");
  coh->add_option("--n", m.n, "Image side (power of two <= 256)")->required();
  add_out(coh);

  auto* smp = app.add_subcommand("sample", "Draw a sampling plan and write its mask");
  smp->add_option("--n", m.n, "Image side")->required();
  add_sampling(smp);
  add_out(smp);

  auto* rec = app.add_subcommand("reconstruct", "Sample, corrupt and reconstruct an image");
  rec->add_option("--image", m.image, "Input PGM")->required();
  rec->add_option("--plan", m.plan, "Plan CSV (overrides --density)");
  rec->add_option("--n", m.n, "Expected image side");
  rec->add_option("--eps", m.epsilon, "Noise level epsilon")->capture_default_str();
  add_sampling(rec);
  add_solver(rec);
  add_out(rec);

  auto* swp = app.add_subcommand("sweep", "Error table over power-law exponents and noise levels");
  swp->add_option("--image", m.image, "Input PGM")->required();
  swp->add_option("--alphas", m.alphas, "Exponents, e.g. 0,2,4,inf")->delimiter(',')->required();
  swp->add_option("--eps", m.epsilons, "Noise levels, e.g. 0,0.5")->delimiter(',')->required();
  swp->add_option("--m", m.m, "Samples per trial")->required();
  swp->add_option("--trials", m.trials, "Trials per cell")->capture_default_str();
  swp->add_option("--seed", m.seed, "Base seed (cell seed = base + cell index)")->capture_default_str();
  swp->add_option("--jobs", m.jobs, "Concurrent cells")->capture_default_str();
  add_solver(swp);
  add_out(swp);

  auto* ver = app.add_subcommand("verify", "Lemma, coherence and isotropy checks");
  ver->add_option("--n", m.ns, "Image sides (<= 64)")->delimiter(',');
  add_out(ver);

  auto* ph = app.add_subcommand("phantom", "Write a synthetic test image");
  ph->add_option("--kind", m.phantom, "rectangles|shepp-logan|random")->capture_default_str();
  ph->add_option("--n", m.n, "Image side")->required();
  ph->add_option("--seed", m.seed, "Seed")->capture_default_str();
  ph->add_option("--edges", m.edges, "Target gradient sparsity (rectangles)")->capture_default_str();
  add_out(ph);

  auto* rep = app.add_subcommand("replay", "Re-run a command from its manifest.json");
  rep->add_option("--manifest", manifest_path, "Manifest file")->required();
  rep->add_option("--out", replay_out, "Output directory (defaults to the manifest's)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, log, err);
    return code == 0 ? kSuccess : kInvalidInput;
  }

  try {
    if (rep->parsed()) {
      std::ifstream in(manifest_path);
      if (!in) throw InvalidInput("cannot open manifest '" + manifest_path + "'");
      json j;
      try {
        in >> j;
      } catch (const json::exception& e) {
        throw InvalidInput(std::string("malformed manifest: ") + e.what());
      }
      m = manifest_from_json(j);
      if (!replay_out.empty()) m.out = replay_out;
    } else {
      m.command = app.get_subcommands().front()->get_name();
    }
    m.version = kVersion;
    return run(m, log);
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace vdcs::cli
