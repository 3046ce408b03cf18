/* Copyright 2026 The DSGL Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "dsgl/data/events.h"
#include "dsgl/model/checkpoint.h"
#include "dsgl/model/model.h"

namespace fs = std::filesystem;

namespace dsgl {
namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result Cli(const std::string& args) {
  const std::string cmd = std::string(DSGL_CLI) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Pulls the number after `key` out of command output.
double Field(const std::string& text, const std::string& key) {
  const auto at = text.find(key);
  if (at == std::string::npos) return std::nan("");
  return std::stod(text.substr(at + key.size()));
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / ("dsgl_cli_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    ASSERT_EQ(Cli("gen --users 30 --items 25 --clusters 2 --events 600 --seed 3 -o " + Path("log.csv")).code, 0);
    std::ofstream cfg(dir_ / "small.cfg");
    cfg << "# tiny model for fast runs\n"
           "depth=2\nuser_fanouts=4,3\nitem_fanouts=4\n"
           "d_user=6\nd_item=6\nd_cat=4\nd_time=4\nhidden=6\nheads=2\nmlp_hidden=8,4\n"
           "batch_size=32\nlr=0.01\nmax_steps=30\neval_every=10\n";
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }

  static std::string Path(const std::string& name) { return (dir_ / name).string(); }
  static std::string Small() { return " --config " + Path("small.cfg"); }

  static fs::path dir_;
};

fs::path CliTest::dir_;

TEST_F(CliTest, GenIsDeterministic) {
  const std::string flags = "gen --users 50 --items 40 --clusters 2 --events 5000 --seed 7 -o ";
  ASSERT_EQ(Cli(flags + Path("g1.csv")).code, 0);
  ASSERT_EQ(Cli(flags + Path("g2.csv")).code, 0);
  const std::string a = Slurp(dir_ / "g1.csv");
  EXPECT_EQ(a, Slurp(dir_ / "g2.csv"));
  EXPECT_EQ(LoadEvents(Path("g1.csv")).size(), 5000u);
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 5001);
}

TEST_F(CliTest, GenZeroEventsWritesHeaderOnly) {
  ASSERT_EQ(Cli("gen --events 0 -o " + Path("empty.csv")).code, 0);
  EXPECT_EQ(Slurp(dir_ / "empty.csv"), std::string(kEventHeader) + "\n");
}

TEST_F(CliTest, GenUnwritablePathFails) {
  const Result r = Cli("gen --events 5 -o " + Path("no/such/dir/x.csv"));
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.out.find("no/such/dir/x.csv"), std::string::npos) << r.out;
}

TEST_F(CliTest, SplitWritesThreeParts) {
  const Result r = Cli("split -i " + Path("log.csv") + " -o " + Path("split"));
  ASSERT_EQ(r.code, 0) << r.out;
  const auto n = [&](const char* f) { return LoadEvents(Path(std::string("split/") + f)).size(); };
  EXPECT_EQ(n("train.csv") + n("valid.csv") + n("test.csv"), 600u);
  EXPECT_EQ(n("test.csv"), 90u);
}

TEST_F(CliTest, TrainWithDefaultModelWritesOutputs) {
  // Default model and graph sizes; only the step count is cut.
  const Result r = Cli("train -i " + Path("log.csv") + " -o " + Path("default") +
                       " --max-steps 1 --batch-size 8");
  ASSERT_EQ(r.code, 0) << r.out;
  const std::string report = Slurp(dir_ / "default/report.log");
  EXPECT_NE(report.find("step=1 loss="), std::string::npos) << report;
  EXPECT_NE(report.find("reason=max_steps"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "default/checkpoint.bin"));
  EXPECT_NE(Slurp(dir_ / "default/config.echo").find("user_fanouts=100,5,5"), std::string::npos);
}

TEST_F(CliTest, AblateFlagIsEchoed) {
  const Result r = Cli("train -i " + Path("log.csv") + " -o " + Path("notime") + Small() +
                       " --ablate no_time");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(Slurp(dir_ / "notime/config.echo").find("ablate=no_time"), std::string::npos);
  EXPECT_NE(Slurp(dir_ / "notime/report.log").find("best_step="), std::string::npos);
}

TEST_F(CliTest, FlagsOverrideConfigAndEchoReproducesRun) {
  ASSERT_EQ(Cli("train -i " + Path("log.csv") + " -o " + Path("a") + Small() + " --lr 0.02 --seed 5").code, 0);
  const std::string echo = Slurp(dir_ / "a/config.echo");
  EXPECT_NE(echo.find("lr=0.02\n"), std::string::npos) << echo;
  EXPECT_NE(echo.find("seed=5\n"), std::string::npos);
  ASSERT_EQ(Cli("train -i " + Path("log.csv") + " -o " + Path("b") + " --config " + Path("a/config.echo")).code, 0);
  EXPECT_EQ(Slurp(dir_ / "a/report.log"), Slurp(dir_ / "b/report.log"));
  EXPECT_EQ(Slurp(dir_ / "a/checkpoint.bin"), Slurp(dir_ / "b/checkpoint.bin"));
}

TEST_F(CliTest, MissingInputNamesPath) {
  const Result r = Cli("train -i " + Path("absent.csv") + " -o " + Path("x"));
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.out.find(Path("absent.csv")), std::string::npos) << r.out;
}

TEST_F(CliTest, BadConfigValueFails) {
  const Result r = Cli("train -i " + Path("log.csv") + " -o " + Path("x") + " --index-scope future");
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.out.find("index_scope"), std::string::npos) << r.out;
}

TEST_F(CliTest, EvalOnTrainedCheckpoint) {
  ASSERT_EQ(Cli("train -i " + Path("log.csv") + " -o " + Path("ev") + Small()).code, 0);
  const Result r = Cli("eval -i " + Path("log.csv") + " -c " + Path("ev/checkpoint.bin") + Small());
  ASSERT_EQ(r.code, 0) << r.out;
  const double auc = Field(r.out, "auc=");
  const double ll = Field(r.out, "logloss=");
  EXPECT_GE(auc, 0.0);
  EXPECT_LE(auc, 1.0);
  EXPECT_TRUE(std::isfinite(ll));
  // Same numbers as the test line printed by train.
  const Result t = Cli("train -i " + Path("log.csv") + " -o " + Path("ev2") + Small());
  EXPECT_EQ(Field(t.out, "test auc="), auc);
}

TEST_F(CliTest, ConstantCheckpointGivesLn2) {
  const EventLog log = LoadEvents(Path("log.csv"));
  ModelConfig c;
  c.num_users = log.num_users;
  c.num_items = log.num_items;
  c.num_categories = log.num_categories;
  c.d_user = c.d_item = 6;
  c.d_cat = c.d_time = 4;
  c.hidden = 6;
  c.heads = 2;
  c.mlp_hidden = {8};
  c.dsg.user_fanouts = {3, 2};
  c.dsg.item_fanouts = {3};
  DsglModel model(c);
  for (const char* name : {"mlp.1.w", "mlp.1.b"}) {
    Tensor t = model.params().Get(name);
    for (Real& v : t.mutable_data()) v = 0.0;
  }
  SaveCheckpoint(Path("const.bin"), model, 0);
  const Result r = Cli("eval -i " + Path("log.csv") + " -c " + Path("const.bin"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NEAR(Field(r.out, "logloss="), 0.693147, 1e-6);
  EXPECT_NEAR(Field(r.out, "auc="), 0.5, 1e-12);
}

TEST_F(CliTest, CorruptedCheckpointFailsShapeValidation) {
  ASSERT_EQ(Cli("train -i " + Path("log.csv") + " -o " + Path("cc") + Small() + " --max-steps 1").code, 0);
  std::string bytes = Slurp(dir_ / "cc/checkpoint.bin");
  const auto at = bytes.find("hidden=6\n");
  ASSERT_NE(at, std::string::npos);
  bytes[at + 7] = '8';
  std::ofstream(dir_ / "bad.bin", std::ios::binary) << bytes;
  const Result r = Cli("eval -i " + Path("log.csv") + " -c " + Path("bad.bin"));
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.out.find("shape"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find(Path("bad.bin")), std::string::npos) << r.out;

  std::ofstream(dir_ / "short.bin", std::ios::binary) << bytes.substr(0, 40);
  EXPECT_NE(Cli("eval -i " + Path("log.csv") + " -c " + Path("short.bin")).code, 0);
}

TEST_F(CliTest, AblateTableHasEveryVariant) {
  const Result r = Cli("ablate -i " + Path("log.csv") + " -o " + Path("abl") + Small() + " --depth 3");
  ASSERT_EQ(r.code, 0) << r.out;
  std::istringstream tsv(Slurp(dir_ / "abl/ablate.tsv"));
  std::string line;
  std::getline(tsv, line);
  EXPECT_EQ(line, "variant\tauc\tlogloss\tstatus");
  std::vector<std::string> names;
  double layer1_auc = -1;
  while (std::getline(tsv, line)) {
    std::istringstream row(line);
    std::string name, auc, ll, status;
    row >> name >> auc >> ll >> status;
    names.push_back(name);
    EXPECT_EQ(status, "ok") << line;
    EXPECT_GE(std::stod(auc), 0.0);
    EXPECT_LE(std::stod(auc), 1.0);
    if (name == "layer1") layer1_auc = std::stod(auc);
  }
  EXPECT_EQ(names, (std::vector<std::string>{"full", "no_time", "no_seq_enc", "no_tase", "no_att",
                                             "no_taatt", "no_paatt", "no_lc", "layer1", "layer2",
                                             "layer3"}));
  // Independent single-layer run with the same seed.
  ASSERT_EQ(Cli("train -i " + Path("log.csv") + " -o " + Path("l1") + Small() + " --depth 1").code, 0);
  const Result e = Cli("eval -i " + Path("log.csv") + " -c " + Path("l1/checkpoint.bin") + Small());
  EXPECT_EQ(Field(e.out, "auc="), layer1_auc);
}

TEST_F(CliTest, AblateReportsBadVariantPerRow) {
  const Result r = Cli("ablate -i " + Path("log.csv") + " -o " + Path("abl2") + Small() +
                       " --variants full,no_taatt+no_paatt,no_lc");
  EXPECT_NE(r.code, 0);
  const std::string tsv = Slurp(dir_ / "abl2/ablate.tsv");
  EXPECT_NE(tsv.find("no_taatt+no_paatt\t-\t-\terror:"), std::string::npos) << tsv;
  EXPECT_NE(tsv.find("full\t0."), std::string::npos) << tsv;
  EXPECT_NE(tsv.find("no_lc\t0."), std::string::npos) << tsv;
}

TEST_F(CliTest, InspectDsgPrintsLevels) {
  const Result r = Cli("inspect-dsg -i " + Path("log.csv") + " --row 500 --depth 2 --user-fanouts 3,2 --item-fanouts 2");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("[user_tree level 2 user nodes"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("valid:"), std::string::npos);
  EXPECT_NE(r.out.find("delta="), std::string::npos);
  EXPECT_NE(Cli("inspect-dsg -i " + Path("log.csv") + " --row 600").code, 0);
}

}  // namespace
}  // namespace dsgl
