#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun run(const std::string& args) {
  const std::string cmd = std::string(TSC_CLI_PATH) + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string tmp(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("tsc_cli_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Cli, GenIsReproducibleAndLoadable) {
  const std::string a = tmp("gen_a.json");
  const std::string b = tmp("gen_b.json");
  ASSERT_EQ(run("gen --n 4 --d 4 --seed 11 --out " + a).code, 0);
  ASSERT_EQ(run("gen --n 4 --d 4 --seed 11 --out " + b).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  const CliRun from_file = run("certify --tensor " + a + " --q 4");
  const CliRun from_seed = run("certify --n 4 --d 4 --seed 11 --q 4");
  ASSERT_EQ(from_file.code, 0);
  EXPECT_EQ(from_file.out, from_seed.out);
  std::remove(a.c_str());
  std::remove(b.c_str());
}

TEST(Cli, GenWithoutSeedRecordsOne) {
  const CliRun r = run("gen --n 2 --d 3 --seed-only");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j["seed"].is_number_unsigned());
  EXPECT_FALSE(j.contains("payload"));
}

TEST(Cli, CertifyIsByteStable) {
  const CliRun a = run("certify --n 5 --d 4 --seed 3 --q 4 --which both");
  const CliRun b = run("certify --n 5 --d 4 --seed 3 --q 4 --which both");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  const auto j = nlohmann::json::parse(a.out);
  EXPECT_TRUE(j["results"].contains("upper_qd"));
  EXPECT_TRUE(j["results"].contains("lower_qd"));
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("certify --n 3 --d 5 --seed 1 --q 10").code, 2);
  EXPECT_EQ(run("certify --n 4 --d 4 --seed 1 --q 8 --which lower").code, 2);
  EXPECT_EQ(run("certify --n 4 --d 4 --seed 1 --q 6").code, 2);
  EXPECT_EQ(run("certify --tensor /nonexistent.json --q 4").code, 2);
  EXPECT_EQ(run("certify --n 4 --d 4 --q 4").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("certify --n 4 --d 4 --seed 1 --q 4 --bogus").code, 2);
  EXPECT_EQ(run("gen --n 1000 --d 8 --seed 1").code, 3);
  EXPECT_EQ(run("certify --n 30 --d 4 --seed 1 --q 16 --which upper").code, 3);
}

TEST(Cli, FmaxSubcommand) {
  const CliRun r = run("fmax --n 4 --d 3 --seed 2 --restarts 5");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_FALSE(j["certified"].get<bool>());
  EXPECT_EQ(j["argmax"].size(), 4u);
}

TEST(Cli, SweepWritesCsvAndJsonLines) {
  const std::string cfg = tmp("sweep.json");
  {
    std::ofstream out(cfg);
    out << R"({"n": [4, 5], "d": 4, "q": [4], "trials": 2, "seed_base": 7, "fmax_restarts": 2})";
  }
  const std::string prefix = tmp("sweep_out");
  const CliRun r = run("--threads 2 sweep " + cfg + " --out " + prefix);
  ASSERT_EQ(r.code, 0);
  std::istringstream csv(slurp(prefix + ".csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "n,d,q,seed,upper,lower,fmax_est,ratio_upper,c2,runtime_ms");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 4);
  std::istringstream jsonl(slurp(prefix + ".jsonl"));
  int records = 0;
  nlohmann::json last;
  while (std::getline(jsonl, line)) {
    last = nlohmann::json::parse(line);
    ++records;
  }
  EXPECT_EQ(records, 5);
  EXPECT_EQ(last["schema"], "tsc.sweep_summary");
  const CliRun stdout_csv = run("sweep " + cfg + " --trials 1 --threads 1");
  EXPECT_EQ(stdout_csv.code, 0);
  EXPECT_EQ(std::count(stdout_csv.out.begin(), stdout_csv.out.end(), '\n'), 3);
  std::remove(cfg.c_str());
  std::remove((prefix + ".csv").c_str());
  std::remove((prefix + ".jsonl").c_str());
}

TEST(Cli, VerifyPasses) {
  const CliRun r = run("verify --format json");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  for (const auto& c : j) {
    EXPECT_TRUE(c["passed"].get<bool>()) << c["check"].get<std::string>();
    EXPECT_TRUE(c.contains("runtime_ms"));
  }
}

TEST(Cli, VerifyCsvHasOneRowPerCheck) {
  const CliRun csv = run("verify");
  const CliRun json = run("verify --format json");
  ASSERT_EQ(csv.code, 0);
  std::istringstream in(csv.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "check,passed,detail,runtime_ms");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    EXPECT_NE(line.find(",true,"), std::string::npos) << line;
    ++rows;
  }
  EXPECT_EQ(rows, nlohmann::json::parse(json.out).size());
}
