#include "mvgad/cli.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "mvgad/io.hpp"

using mvgad::cli::run_command;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::path(::testing::TempDir()) /
            ("mvgad_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
    unsetenv("MVGAD_CONFIG");
  }
  void TearDown() override {
    unsetenv("MVGAD_CONFIG");
    fs::remove_all(root_);
  }

  std::string path(const std::string& p) const { return (root_ / p).string(); }

  // small run so each command takes well under a second
  Result run(std::vector<std::string> args) {
    for (const char* s : {"timesteps=30", "nodes=24", "anomaly_timesteps=\"12-14\"", "dgi_epochs=20",
                          "trees=8", "runs=2"}) {
      args.push_back("--set");
      args.push_back(s);
    }
    return raw(args);
  }

  Result raw(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_command(args, out, err);
    return {code, out.str(), err.str()};
  }

  std::string slurp(const std::string& p) { return mvgad::io::read_file(p); }

  fs::path root_;
};

}  // namespace

TEST_F(Cli, UnknownSubcommandIsUsageError) {
  auto r = raw({"frobnicate"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_EQ(raw({}).code, 1);
  EXPECT_EQ(raw({"detect", "--bogus"}).code, 1);
  EXPECT_EQ(raw({"--help"}).code, 0);
}

TEST_F(Cli, ValidationErrorExitsOne) {
  auto r = run({"gen", "--data", path("d"), "--set", "kappa=2"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("kappa"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("d/config.txt")));
}

TEST_F(Cli, GenIsIdempotentAndEchoesFirst) {
  auto r = run({"gen", "--data", path("d")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("wrote " + path("d/config.txt"), 0), 0u);
  std::vector<std::string> files{"config.txt", "edges.csv", "view0.csv", "view1.csv", "labels_t.csv",
                                 "labels_node.csv"};
  std::vector<std::string> first;
  for (const auto& f : files) first.push_back(slurp(path("d/" + f)));
  ASSERT_EQ(run({"gen", "--data", path("d")}).code, 0);
  for (std::size_t i = 0; i < files.size(); ++i) EXPECT_EQ(slurp(path("d/" + files[i])), first[i]) << files[i];
  EXPECT_NE(first[0].find("timesteps = 30"), std::string::npos);
}

TEST_F(Cli, EveryCommandIsDeterministic) {
  ASSERT_EQ(run({"gen", "--data", path("d")}).code, 0);
  const std::vector<std::pair<std::string, std::string>> cmds{
      {"cluster", "c.csv"}, {"fuse-score", "f.csv"}, {"embed", "e.csv"},
      {"detect", "s.csv"},  {"eval", "r.json"},      {"roc", "roc.csv"}};
  for (const auto& [cmd, file] : cmds) {
    ASSERT_EQ(run({cmd, "--data", path("d"), "--out", path("a/" + file)}).code, 0) << cmd;
    ASSERT_EQ(run({cmd, "--data", path("d"), "--out", path("b/" + file)}).code, 0) << cmd;
    EXPECT_EQ(slurp(path("a/" + file)), slurp(path("b/" + file))) << cmd;
    EXPECT_EQ(slurp(path("a/" + file + ".config.txt")), slurp(path("b/" + file + ".config.txt")));
  }
  EXPECT_EQ(slurp(path("a/roc.csv")).rfind("fpr,tpr\n0,0\n", 0), 0u);
  EXPECT_EQ(slurp(path("a/c.csv")).rfind("node_id,label\n", 0), 0u);
  EXPECT_NE(slurp(path("a/r.json")).find("\"sample\""), std::string::npos);
}

TEST_F(Cli, DetectEqualsEmbedThenScore) {
  ASSERT_EQ(run({"gen", "--data", path("d")}).code, 0);
  ASSERT_EQ(run({"detect", "--data", path("d"), "--out", path("direct.csv")}).code, 0);
  ASSERT_EQ(run({"embed", "--data", path("d"), "--out", path("e.csv")}).code, 0);
  ASSERT_EQ(run({"detect", "--data", path("d"), "--embeddings", path("e.csv"), "--out", path("chained.csv")}).code, 0);
  EXPECT_EQ(slurp(path("direct.csv")), slurp(path("chained.csv")));
}

TEST_F(Cli, EvalOfScoresFile) {
  ASSERT_EQ(run({"gen", "--data", path("d")}).code, 0);
  ASSERT_EQ(run({"detect", "--data", path("d"), "--out", path("s.csv")}).code, 0);
  auto r = run({"eval", "--data", path("d"), "--scores", path("s.csv"), "--out", path("r.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string report = slurp(path("r.json"));
  EXPECT_NE(report.find("\"temporal\""), std::string::npos);
  EXPECT_EQ(report.find("\"sample\""), std::string::npos);
  EXPECT_NE(report.find("\"runs\": 1"), std::string::npos);
  ASSERT_EQ(run({"roc", "--data", path("d"), "--scores", path("s.csv"), "--out", path("roc.csv")}).code, 0);
  EXPECT_EQ(slurp(path("roc.csv")).rfind("fpr,tpr\n0,0\n", 0), 0u);
}

TEST_F(Cli, MismatchedViewsFailInFusion) {
  ASSERT_EQ(run({"gen", "--data", path("d")}).code, 0);
  const std::string v1 = slurp(path("d/view1.csv"));
  mvgad::io::write_file(path("d/view1.csv"), v1.substr(0, v1.find("10,")));
  auto r = run({"detect", "--data", path("d"), "--out", path("o/s.csv")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("fusion"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(path("o/s.csv")));
  EXPECT_FALSE(fs::exists(path("o/s.csv.config.txt")));
}

TEST_F(Cli, MalformedInputIsRuntimeError) {
  ASSERT_EQ(run({"gen", "--data", path("d")}).code, 0);
  mvgad::io::write_file(path("d/labels_t.csv"), "t,label\n0,0\n1,x\n");
  auto r = run({"embed", "--data", path("d"), "--out", path("e.csv")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("labels_t.csv:3"), std::string::npos) << r.err;
}

TEST_F(Cli, ConfigFileAndEnvironment) {
  mvgad::io::write_file(path("a.cfg"), "trees = 5\n");
  mvgad::io::write_file(path("b.cfg"), "trees = 7\n");
  ASSERT_EQ(raw({"gen", "--config", path("a.cfg"), "--data", path("d1")}).code, 0);
  EXPECT_NE(slurp(path("d1/config.txt")).find("trees = 5\n"), std::string::npos);
  setenv("MVGAD_CONFIG", path("b.cfg").c_str(), 1);
  ASSERT_EQ(raw({"gen", "--data", path("d2")}).code, 0);
  EXPECT_NE(slurp(path("d2/config.txt")).find("trees = 7\n"), std::string::npos);
  // the flag wins over the environment, --set over both
  ASSERT_EQ(raw({"gen", "--config", path("a.cfg"), "--set", "runs=4", "--data", path("d3")}).code, 0);
  const std::string echo = slurp(path("d3/config.txt"));
  EXPECT_NE(echo.find("trees = 5\n"), std::string::npos);
  EXPECT_NE(echo.find("runs = 4\n"), std::string::npos);
  // the echo reproduces the run
  ASSERT_EQ(raw({"gen", "--config", path("d3/config.txt"), "--data", path("d4")}).code, 0);
  EXPECT_EQ(slurp(path("d4/edges.csv")), slurp(path("d3/edges.csv")));
  EXPECT_EQ(raw({"gen", "--config", path("missing.cfg"), "--data", path("d5")}).code, 2);
}
