#include <gtest/gtest.h>
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string err;
};

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("thinobs_cli_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

Run thinobs(const std::string& args, const fs::path& dir) {
  const auto err = dir / "stderr.txt";
  const std::string cmd = std::string(THINOBS_CLI) + " " + args + " > " + (dir / "stdout.txt").string() + " 2> " +
                          err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
}

fs::path write_config(const fs::path& dir, const std::string& body) {
  const auto p = dir / "run.ini";
  std::ofstream(p) << body << "[run]\noutput_dir = " << (dir / "out").string() << "\n";
  return p;
}

// column `name` of a CSV whose first line is the provenance header
std::vector<double> column(const fs::path& csv, const std::string& name) {
  std::ifstream is(csv);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line.rfind("# config_hash=", 0), 0u);
  std::getline(is, line);
  std::vector<std::string> cols;
  std::stringstream hs(line);
  for (std::string c; std::getline(hs, c, ',');) cols.push_back(c);
  const auto at = std::find(cols.begin(), cols.end(), name) - cols.begin();
  std::vector<double> out;
  while (std::getline(is, line)) {
    std::stringstream ls(line);
    std::string cell;
    for (long k = 0; k <= at; ++k) std::getline(ls, cell, ',');
    if (!cell.empty()) out.push_back(std::stod(cell));
  }
  return out;
}

std::string body(const fs::path& p) {
  const std::string s = slurp(p);
  return s.substr(s.find('\n') + 1);
}

}  // namespace

TEST(Cli, SolveWritesSnapshotAndKKT) {
  const auto dir = scratch("solve");
  const auto cfg = write_config(dir, "[grid]\nresolution = 129\n");
  const auto r = thinobs("solve --config " + cfg.string(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "out" / "snapshot.bin"));
  EXPECT_NE(slurp(dir / "out" / "kkt.csv").find("kkt.within_10tol,true"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "out" / "config.ini"));
}

TEST(Cli, EvenResolutionExitsOneNamingTheField) {
  const auto dir = scratch("even");
  const auto cfg = write_config(dir, "[grid]\nresolution = 128\n");
  const auto r = thinobs("solve --config " + cfg.string(), dir);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("grid.resolution"), std::string::npos) << r.err;
}

TEST(Cli, MaxIterOneExitsTwoWithFlaggedSnapshot) {
  const auto dir = scratch("maxiter");
  const auto cfg = write_config(dir, "[grid]\nresolution = 65\n[solver]\nmax_iter = 1\n");
  EXPECT_EQ(thinobs("solve --config " + cfg.string(), dir).code, 2);
  const std::string snap = slurp(dir / "out" / "snapshot.bin");
  ASSERT_GE(snap.size(), 80u);
  EXPECT_EQ(snap[20] & 1, 0);
  EXPECT_EQ(thinobs("analyze --config " + cfg.string(), dir).code, 1);
  EXPECT_EQ(thinobs("solve --allow-nonconverged --config " + cfg.string(), dir).code, 0);
}

TEST(Cli, AnalyzeFrequencyOnThreeHalves) {
  const auto dir = scratch("freq");
  const auto cfg = write_config(dir, "[analysis]\nrequests = frequency\ncenters = origin\n");
  ASSERT_EQ(thinobs("solve --config " + cfg.string(), dir).code, 0);
  const auto r = thinobs("analyze --config " + cfg.string(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto phi = column(dir / "out" / "frequency_0.csv", "phi");
  ASSERT_FALSE(phi.empty());
  for (double v : phi) EXPECT_NEAR(v, 1.5, 0.03);
}

TEST(Cli, AnalyzeDecayOnPerturbedRun) {
  const auto dir = scratch("decay");
  const auto cfg = write_config(
      dir, "[data]\nkind = perturbed-profile\nepsilon = 0.05\n[analysis]\nrequests = decay\ndecay_k_max = 3\n");
  ASSERT_EQ(thinobs("solve --config " + cfg.string(), dir).code, 0);
  ASSERT_EQ(thinobs("analyze --config " + cfg.string(), dir).code, 0);
  const auto ex = column(dir / "out" / "decay_0.csv", "excess");
  ASSERT_GE(ex.size(), 2u);
  for (double v : ex) EXPECT_NEAR(v, 2.0, 0.2);
}

TEST(Cli, EmptyAnalysisWritesSummaryOnly) {
  const auto dir = scratch("empty");
  const auto cfg = write_config(dir, "[grid]\nresolution = 65\n");
  ASSERT_EQ(thinobs("solve --config " + cfg.string(), dir).code, 0);
  ASSERT_EQ(thinobs("analyze --config " + cfg.string(), dir).code, 0);
  int csvs = 0;
  for (const auto& e : fs::directory_iterator(dir / "out")) csvs += e.path().extension() == ".csv";
  EXPECT_EQ(csvs, 1);  // kkt.csv from the solve
  EXPECT_NE(slurp(dir / "out" / "analyze_summary.txt").find("requests=0"), std::string::npos);
}

TEST(Cli, MismatchedSnapshotExitsOne) {
  const auto dir = scratch("mismatch");
  const auto cfg = write_config(dir, "[grid]\nresolution = 65\n");
  ASSERT_EQ(thinobs("solve --config " + cfg.string(), dir).code, 0);
  const auto other = dir / "other.ini";
  std::ofstream(other) << "[grid]\nresolution = 129\n[run]\noutput_dir = " << (dir / "out").string() << "\n";
  const auto r = thinobs("analyze --config " + other.string(), dir);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("does not match"), std::string::npos);
}

TEST(Cli, OutputsAreDeterministicAcrossRunsAndThreads) {
  const auto dir = scratch("determinism");
  const std::string cfg_body =
      "[grid]\nresolution = 129\n[analysis]\nrequests = frequency contact barrier\n"
      "centers = origin; -0.25,0\ngammas = 2\n";
  const auto cfg = write_config(dir, cfg_body);
  ASSERT_EQ(thinobs("solve --config " + cfg.string() + " --out " + (dir / "a").string(), dir).code, 0);
  ASSERT_EQ(thinobs("analyze --config " + cfg.string() + " --out " + (dir / "a").string(), dir).code, 0);
  ASSERT_EQ(thinobs("solve --config " + cfg.string() + " --out " + (dir / "b").string(), dir).code, 0);
  ASSERT_EQ(thinobs("analyze --threads 3 --config " + cfg.string() + " --out " + (dir / "b").string(), dir).code, 0);
  EXPECT_EQ(slurp(dir / "a" / "snapshot.bin"), slurp(dir / "b" / "snapshot.bin"));
  for (const char* f : {"kkt.csv", "frequency_0.csv", "frequency_1.csv", "contact.csv", "barrier.csv"}) {
    EXPECT_EQ(body(dir / "a" / f), body(dir / "b" / f)) << f;
    EXPECT_NE(slurp(dir / "a" / f).find("config_hash="), std::string::npos);
  }
}

TEST(Cli, VerifySequenceLemmaIsFast) {
  const auto dir = scratch("verify11");
  const auto cfg = write_config(dir, "[verify]\ncriteria = 11\n");
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = thinobs("verify --config " + cfg.string(), dir);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_LT(secs, 5.0);
  EXPECT_NE(slurp(dir / "out" / "verify.csv").find("sequence-lemma,1"), std::string::npos);
}

TEST(Cli, VerifyWithZeroAllowanceNamesTheMonotonicityCriterion) {
  const auto dir = scratch("verify0");
  const auto cfg = write_config(dir, "[verify]\ncriteria = 5\nresolution_2d = 257\nallowance = 0\n");
  const auto r = thinobs("verify --config " + cfg.string(), dir);
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("almgren-monotonicity"), std::string::npos) << r.err;
}

TEST(Cli, ReportConcatenatesSummaries) {
  const auto dir = scratch("report");
  const auto cfg = write_config(dir, "[grid]\nresolution = 65\n[verify]\ncriteria = 11\n");
  ASSERT_EQ(thinobs("solve --config " + cfg.string(), dir).code, 0);
  ASSERT_EQ(thinobs("verify --config " + cfg.string(), dir).code, 0);
  ASSERT_EQ(thinobs("report --out " + (dir / "out").string(), dir).code, 0);
  const std::string rep = slurp(dir / "out" / "report.txt");
  EXPECT_NE(rep.find("## solve_summary.txt"), std::string::npos);
  EXPECT_NE(rep.find("## verify_summary.txt"), std::string::npos);
}

TEST(Cli, MissingConfigFileExitsOne) {
  const auto dir = scratch("missing");
  EXPECT_EQ(thinobs("solve --config " + (dir / "nope.ini").string(), dir).code, 1);
}
