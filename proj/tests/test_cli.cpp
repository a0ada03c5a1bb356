#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "morphcx/error.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kData = MORPHCX_DATA_DIR;

struct Result {
  int code = -1;
  std::string output;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("morphcx_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Result run(const std::string& args) const {
    const auto log = dir_ / "log.txt";
    const std::string cmd = std::string(MORPHCX_CLI) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(log)};
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

int code(morphcx::ExitCode c) { return static_cast<int>(c); }

}  // namespace

TEST_F(Cli, IngestToyLexicon) {
  const auto r = run("ingest --data " + kData + "/toy_lexicon.tsv --out " + dir_.string());
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("lexemes: 2"), std::string::npos);
  const auto store = nlohmann::json::parse(slurp(dir_ / "paradigms.json"));
  EXPECT_EQ(store["paradigms"].size(), 2u);
  EXPECT_TRUE(store.contains("config_hash"));
}

TEST_F(Cli, IngestWarnsBelowThreshold) {
  std::ofstream f(dir_ / "lex.tsv");
  for (int k = 0; k < 400; ++k) f << "l" << k << "\tf" << k << "\tN;SG\n";
  f.close();
  const auto r = run("ingest --data " + (dir_ / "lex.tsv").string() + " --out " + dir_.string());
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.output.find("below 500-paradigm threshold"), std::string::npos) << r.output;
}

TEST_F(Cli, ExitCodes) {
  std::ofstream(dir_ / "empty.tsv").close();
  EXPECT_EQ(run("ingest --data " + (dir_ / "empty.tsv").string() + " --out " + dir_.string()).code,
            code(morphcx::ExitCode::kNoData));
  std::ofstream(dir_ / "bad.tsv") << "only\ttwo\n";
  EXPECT_EQ(run("ingest --data " + (dir_ / "bad.tsv").string() + " --out " + dir_.string()).code,
            code(morphcx::ExitCode::kParse));
  EXPECT_EQ(run("run --synth " + kData + "/synth_two_class.cfg --out " + dir_.string()).code,
            code(morphcx::ExitCode::kUsage));
  EXPECT_EQ(run("frobnicate").code, code(morphcx::ExitCode::kUsage));
  EXPECT_EQ(run("ingest --data /nonexistent/file.tsv").code, code(morphcx::ExitCode::kUsage));
}

TEST_F(Cli, StepwiseMatchesRun) {
  const std::string common = " --synth " + kData + "/synth_two_class.cfg --seed 3 --out ";
  const auto step = (dir_ / "step").string();
  const auto full = (dir_ / "full").string();
  for (const auto* cmd : {"split", "train", "weights", "learn-tree", "measure"}) {
    const auto r = run(std::string(cmd) + common + step);
    ASSERT_EQ(r.code, 0) << cmd << ": " << r.output;
  }
  ASSERT_EQ(run("run" + common + full).code, 0);
  for (const auto* f : {"point.csv", "tree.json", "tree.dot", "weights.json", "split.json", "model.json"}) {
    EXPECT_TRUE(slurp(fs::path(step) / f) == slurp(fs::path(full) / f)) << f;
  }
}

TEST_F(Cli, RunTwiceIsByteIdentical) {
  std::ofstream(dir_ / "run.cfg") << "synth = " << kData << "/synth_two_class.cfg\nseed = 11\n"
                                  << "language = synthetic\nregime = purple\n";
  for (const auto* sub : {"a", "b"}) {
    ASSERT_EQ(run("run --config " + (dir_ / "run.cfg").string() + " --out " + (dir_ / sub).string()).code, 0);
  }
  std::size_t compared = 0;
  for (const auto& e : fs::directory_iterator(dir_ / "a")) {
    EXPECT_TRUE(slurp(e.path()) == slurp(dir_ / "b" / e.path().filename())) << e.path();
    ++compared;
  }
  EXPECT_EQ(compared, 7u);
  EXPECT_NE(slurp(dir_ / "a" / "point.csv").find("synthetic,N,purple"), std::string::npos);
}

TEST_F(Cli, FlagsOverrideConfig) {
  std::ofstream(dir_ / "run.cfg") << "synth = " << kData << "/synth_deterministic.cfg\nseed = 1\n"
                                  << "language = from_file\n";
  const auto r = run("run --config " + (dir_ / "run.cfg").string() + " --language from_flag --out " +
                     dir_.string());
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_NE(slurp(dir_ / "point.csv").find("from_flag,"), std::string::npos);
}

TEST_F(Cli, ParetoOnTable2) {
  const auto r = run("pareto --seed 1 --n-perm 500 --out " + dir_.string());
  ASSERT_EQ(r.code, 0) << r.output;
  const auto report = nlohmann::json::parse(slurp(dir_ / "pareto.json"));
  EXPECT_EQ(report["by_pos"]["V"]["points"], 33);
  EXPECT_EQ(report["by_pos"]["N"]["points"], 18);
  for (const auto* pos : {"N", "V"}) {
    const auto svg = slurp(dir_ / (std::string("pareto_") + pos + ".svg"));
    EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    std::size_t paths = 0;
    for (auto p = svg.find("<path"); p != std::string::npos; p = svg.find("<path", p + 1)) ++paths;
    EXPECT_EQ(paths, 1u);
  }
}

TEST_F(Cli, ParetoPerPosErrors) {
  std::ofstream(dir_ / "pts.csv") << "language,pos,paradigm_size,i_complexity,scheme\n"
                                  << "a,N,1,1,g\nb,N,2,1,g\nc,N,3,1,g\nd,V,4,1,g\n";
  const auto r = run("pareto --points " + (dir_ / "pts.csv").string() + " --seed 2 --n-perm 100 --out " +
                     dir_.string());
  EXPECT_EQ(r.code, 0) << r.output;
  const auto report = nlohmann::json::parse(slurp(dir_ / "pareto.json"));
  EXPECT_EQ(report["by_pos"]["N"]["p_value"], 1.0);
  EXPECT_TRUE(report["errors"].contains("V"));
}

TEST_F(Cli, PlatAndCritique) {
  auto r = run("plat " + kData + "/greek_plat.tsv --critique --out " + dir_.string());
  ASSERT_EQ(r.code, 0) << r.output;
  const auto report = nlohmann::json::parse(slurp(dir_ / "greek_plat.plat.json"));
  EXPECT_EQ(report["cond_entropy"].size(), 56u);
  EXPECT_EQ(report["critique"]["suppletion"]["plat_probability"], 0.0);
  EXPECT_LT(report["critique"]["suppletion"]["model_log2prob"].get<double>(), 0.0);

  r = run("critique " + kData + "/english_past_plat.tsv --out " + dir_.string());
  EXPECT_EQ(r.code, 0) << r.output;
  std::ofstream(dir_ / "bad.tsv") << "class\tA\tB\nx\ta\n";
  EXPECT_EQ(run("plat " + (dir_ / "bad.tsv").string() + " --out " + dir_.string()).code,
            code(morphcx::ExitCode::kParse));
}
