#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include "json.hpp"
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "vdcs/coherence.hpp"
#include "vdcs/io.hpp"
#include "vdcs/phantom.hpp"

namespace vdcs::cli {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / (std::string("vdcs_cli_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "vdcs");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    log_.str("");
    err_.str("");
    return main_entry(static_cast<int>(argv.size()), argv.data(), log_, err_);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
  }

  static nlohmann::json load_json(const std::string& p) { return nlohmann::json::parse(slurp(p)); }

  void write_phantom(std::size_t n) {
    ASSERT_EQ(run({"phantom", "--n", std::to_string(n), "--seed", "7", "--out", dir_.string()}), 0) << err_.str();
  }

  fs::path dir_;
  std::ostringstream log_, err_;
};

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(run({"bogus"}), 2);
  EXPECT_EQ(run({"sample", "--n", "8"}), 2);  // --m missing
  EXPECT_EQ(run({"sample", "--n", "8", "--m", "4", "--density", "nope", "--out", dir_.string()}), 2);
  EXPECT_EQ(run({"coherence", "--n", "12", "--out", dir_.string()}), 2);
  EXPECT_EQ(run({"reconstruct", "--image", path("missing.pgm"), "--m", "4", "--out", dir_.string()}), 2);
  EXPECT_EQ(run({"--help"}), 0);
}

TEST_F(CliTest, NonSquareOrNonDyadicImageRejected) {
  write_pgm(path("odd.pgm"), GrayImage{3, 3, 255, std::vector<std::uint16_t>(9, 10)});
  EXPECT_EQ(run({"reconstruct", "--image", path("odd.pgm"), "--m", "4", "--out", dir_.string()}), 2);
}

TEST_F(CliTest, CoherenceReportMatchesLibrary) {
  ASSERT_EQ(run({"coherence", "--n", "8", "--out", dir_.string()}), 0) << err_.str();
  const auto report = load_json(path("coherence_report.json"));
  EXPECT_NEAR(report["kappa_prime_l2"].get<double>(), kappa_l2(8, KappaVariant::kappa_prime), 1e-12);
  EXPECT_NEAR(report["kappa_l2"].get<double>(), kappa_l2(8, KappaVariant::kappa), 1e-12);
  for (const char* f : {"mu_loc.csv", "kappa.csv", "kappa_prime.csv", "manifest.json"}) EXPECT_TRUE(fs::exists(path(f))) << f;
  std::ifstream mu(path("mu_loc.csv"));
  std::string line;
  std::size_t rows = 0;
  std::getline(mu, line);
  EXPECT_EQ(line, "k1,k2,mu_loc");
  while (std::getline(mu, line)) ++rows;
  EXPECT_EQ(rows, 64u);
}

TEST_F(CliTest, LowpassSingleSampleMask) {
  ASSERT_EQ(run({"sample", "--n", "8", "--m", "1", "--density", "lowpass", "--out", dir_.string()}), 0) << err_.str();
  const auto mask = read_pgm(path("mask.pgm"));
  std::size_t white = 0;
  for (auto v : mask.samples) white += v != 0;
  EXPECT_EQ(white, 1u);
  EXPECT_EQ(mask.samples[3 * 8 + 3], 255);
  const auto plan = read_plan_csv(path("plan.csv"));
  ASSERT_EQ(plan.m(), 1u);
  EXPECT_EQ(plan.freqs[0], (FrequencyIndex{0, 0}));
}

TEST_F(CliTest, FullSamplingReconstructsInput) {
  write_phantom(16);
  SamplingPlan full{16, {}, {}, "full", 0, "deterministic"};
  FrequencyGrid<char> grid(16);
  for (std::size_t s = 0; s < 256; ++s) {
    full.freqs.push_back(grid.frequency_at(s));
    full.rho.push_back(1.0);
  }
  write_plan_csv(path("full.csv"), full);
  ASSERT_EQ(run({"reconstruct", "--image", path("phantom.pgm"), "--plan", path("full.csv"), "--out", dir_.string()}), 0)
      << err_.str();
  const auto in = read_pgm(path("phantom.pgm")), out = read_pgm(path("reconstruction.pgm"));
  ASSERT_EQ(in.samples.size(), out.samples.size());
  EXPECT_EQ(out.maxval, in.maxval);
  for (std::size_t i = 0; i < in.samples.size(); ++i) EXPECT_LE(std::abs(int(in.samples[i]) - int(out.samples[i])), 1);
  const auto report = load_json(path("solver_report.json"));
  EXPECT_TRUE(report["converged"].get<bool>());
  EXPECT_LE(report["relative_error"].get<double>(), 1e-6);
  std::ifstream errors(path("errors.csv"));
  std::string header;
  std::getline(errors, header);
  EXPECT_EQ(header, "image,density,m,seed,epsilon,noise_model,solver,relative_error,iterations,converged");
}

TEST_F(CliTest, IterationCapExitsThree) {
  write_phantom(16);
  EXPECT_EQ(run({"reconstruct", "--image", path("phantom.pgm"), "--m", "60", "--max-iters", "10", "--out", dir_.string()}), 3);
  EXPECT_FALSE(load_json(path("solver_report.json"))["converged"].get<bool>());
}

TEST_F(CliTest, SweepWritesOneRowPerCell) {
  write_phantom(16);
  ASSERT_EQ(run({"sweep", "--image", path("phantom.pgm"), "--alphas", "0,inf", "--eps", "0,0.1", "--trials", "2", "--m",
                 "100", "--jobs", "3", "--out", dir_.string()}),
            0)
      << err_.str() << log_.str();
  std::ifstream csv(path("sweep.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "alpha,epsilon,trial,m,error,seed,converged,iterations,status");
  std::size_t rows = 0;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 8u);
}

TEST_F(CliTest, ReplayReproducesOutputsByteForByte) {
  write_phantom(16);
  ASSERT_EQ(run({"reconstruct", "--image", path("phantom.pgm"), "--m", "100", "--seed", "4", "--eps", "0.05", "--out",
                 dir_.string()}),
            0);
  std::vector<std::pair<std::string, std::string>> first;
  for (const char* f : {"reconstruction.pgm", "errors.csv", "solver_report.json", "manifest.json"})
    first.emplace_back(f, slurp(path(f)));
  fs::copy_file(path("manifest.json"), path("saved_manifest.json"));
  for (const auto& [f, _] : first) fs::remove(path(f));
  ASSERT_EQ(run({"replay", "--manifest", path("saved_manifest.json")}), 0) << err_.str();
  for (const auto& [f, bytes] : first) EXPECT_EQ(slurp(path(f)), bytes) << f;
}

TEST_F(CliTest, VerifyReportsAllChecks) {
  ASSERT_EQ(run({"verify", "--n", "2,4,8", "--out", dir_.string()}), 0) << err_.str();
  const auto report = load_json(path("verify_report.json"));
  ASSERT_TRUE(report.contains("checks"));
  for (const auto& c : report["checks"]) EXPECT_TRUE(c["passed"].get<bool>()) << c.dump();
  EXPECT_NE(log_.str().find("PASS"), std::string::npos);
}

TEST_F(CliTest, ManifestJsonRoundTrip) {
  RunManifest m;
  m.command = "sweep";
  m.alphas = {"0", "inf"};
  m.epsilons = {0.0, 0.5};
  m.solver_options.step_ratio = 0.02;
  const auto back = manifest_from_json(to_json(m));
  EXPECT_EQ(to_json(back), to_json(m));
}

TEST(CliBinary, ExitCodesFromProcess) {
  const std::string exe = VDCS_CLI_PATH;
  EXPECT_EQ(WEXITSTATUS(std::system((exe + " --help > /dev/null").c_str())), 0);
  EXPECT_EQ(WEXITSTATUS(std::system((exe + " sample --n 3 --m 2 > /dev/null 2>&1").c_str())), 2);
}

}  // namespace
}  // namespace vdcs::cli
