#pragma once

// Command implementations behind the vdcs executable. Every command is
// driven by a RunManifest, which is also written next to its outputs so a
// run can be replayed from the manifest alone.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "vdcs/sampling.hpp"
#include "vdcs/solvers.hpp"

namespace vdcs::cli {

enum ExitCode : int {
  kSuccess = 0,
  kFailure = 1,
  kInvalidInput = 2,
  kNotConverged = 3,
  kVerificationFailed = 4,
};

struct InvalidInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunManifest {
  std::string command;
  std::string image;    // input PGM (reconstruct, sweep)
  std::string plan;     // plan CSV overriding density (reconstruct)
  std::size_t n = 0;
  std::string density = "inv-square";
  std::size_t m = 0;
  std::uint64_t seed = 0;
  double epsilon = 0.0;
  std::string noise_model = "unweighted";  // experiments run without preconditioning in the data term
  std::string solver = "tv";  // tv | haar
  SolverOptions solver_options;
  std::vector<std::string> alphas;  // sweep; "inf" allowed
  std::vector<double> epsilons;     // sweep
  std::size_t trials = 1;           // sweep
  std::size_t jobs = 1;             // sweep
  std::vector<std::size_t> ns;      // verify
  std::string phantom = "rectangles";
  std::size_t edges = 40;           // rectangles phantom
  std::string out = ".";
  std::string version;
};

nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SolverReport& r);

/// Plan for a density spec: uniform | inv-square | inv-max | kappa |
/// power:<alpha> (alpha may be inf) | lowpass | radial:<L>.
SamplingPlan make_plan(std::size_t n, const std::string& density, std::size_t m, std::uint64_t seed);

/// Seed for the noise draw of a run with the given sampling seed.
std::uint64_t noise_seed(std::uint64_t seed);

int cmd_coherence(const RunManifest& m, std::ostream& log);
int cmd_sample(const RunManifest& m, std::ostream& log);
int cmd_reconstruct(const RunManifest& m, std::ostream& log);
int cmd_sweep(const RunManifest& m, std::ostream& log);
int cmd_verify(const RunManifest& m, std::ostream& log);
int cmd_phantom(const RunManifest& m, std::ostream& log);

/// Dispatches on m.command.
int run(const RunManifest& m, std::ostream& log);

/// Parses argv, runs the command and maps errors to exit codes.
int main_entry(int argc, char** argv, std::ostream& log, std::ostream& err);

}  // namespace vdcs::cli
