// tests/cli_test.cpp

// Copyright 2026 The ctc-collapse Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "gtest/gtest.h"

#include "test_util.hpp"

namespace ctc_collapse {
namespace {

using testing::TempDir;

struct Run {
  int status;
  std::string out;
};

Run run_cli(const std::string &args) {
  const char *cli = std::getenv("CTC_COLLAPSE_CLI");
  if (!cli) return {-1, "CTC_COLLAPSE_CLI not set"};
  const std::string cmd = std::string("\"") + cli + "\" " + args + " 2>&1";
  Run r{0, ""};
  FILE *p = popen(cmd.c_str(), "r");
  if (!p) return {-1, "popen failed"};
  std::array<char, 4096> buf;
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), p)) r.out.append(buf.data(), n);
  const int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string slurp(const std::filesystem::path &p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    if (!std::getenv("CTC_COLLAPSE_CLI")) GTEST_SKIP() << "CTC_COLLAPSE_CLI not set";
    auto r = run_cli("synth --out " + (dir_ / "corpus").string() + " --count 5 --seed 3 --write-lm");
    ASSERT_EQ(r.status, 0) << r.out;
  }
  TempDir dir_{"cli"};
};

TEST_F(CliTest, SynthWritesCorpusAndLm) {
  EXPECT_TRUE(std::filesystem::exists(dir_ / "corpus" / "manifest.jsonl"));
  EXPECT_TRUE(std::filesystem::exists(dir_ / "corpus" / "alphabet.json"));
  EXPECT_TRUE(std::filesystem::exists(dir_ / "corpus" / "utt00004.ctce"));
  EXPECT_NE(slurp(dir_ / "corpus" / "lm.arpa").find("\\end\\"), std::string::npos);
}

TEST_F(CliTest, DecodePrintsSequenceAndAlignment) {
  auto r = run_cli("decode --emission " + (dir_ / "corpus" / "utt00000.ctce").string() +
                   " --collapse strong --theta 0.999 --beam-size 16");
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("sequence: "), std::string::npos);
  EXPECT_NE(r.out.find("alignment:"), std::string::npos);
  EXPECT_NE(r.out.find("frames: "), std::string::npos);
}

TEST_F(CliTest, BenchWritesReports) {
  auto r = run_cli("bench --manifest " + (dir_ / "corpus" / "manifest.jsonl").string() +
                   " --lm " + (dir_ / "corpus" / "lm.arpa").string() +
                   " --collapse strong --theta 0.99,0.999 --gamma 10 --beam-size 8 --reps 1 --out " +
                   (dir_ / "out").string());
  ASSERT_EQ(r.status, 0) << r.out;
  const auto csv = slurp(dir_ / "out" / "report.csv");
  EXPECT_EQ(csv.rfind("# schema=1\n", 0), 0u);
  // baseline plus two thresholds
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  EXPECT_TRUE(std::filesystem::exists(dir_ / "out" / "report.json"));
  EXPECT_TRUE(std::filesystem::exists(dir_ / "out" / "hypotheses.csv"));
}

TEST_F(CliTest, StatsWritesTables) {
  auto r = run_cli("stats --manifest " + (dir_ / "corpus" / "manifest.jsonl").string() + " --out " +
                   (dir_ / "stats").string());
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_EQ(slurp(dir_ / "stats" / "collapsible.csv").rfind("mode,theta,collapsible_pct\n", 0), 0u);
  EXPECT_EQ(slurp(dir_ / "stats" / "run_lengths.csv").rfind("run_length,blank,non_blank\n", 0), 0u);
}

TEST_F(CliTest, ErrorsExitNonZero) {
  EXPECT_NE(run_cli("bench --manifest /nonexistent --out x").status, 0);
  auto r = run_cli("decode --emission " + (dir_ / "corpus" / "manifest.jsonl").string());
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.out.find("ctc-collapse: "), std::string::npos);
  EXPECT_NE(run_cli("bench --manifest " + (dir_ / "corpus" / "manifest.jsonl").string() +
                    " --collapse strong --theta 1.5 --out " + (dir_ / "bad").string())
                .status,
            0);
}

}  // namespace
}  // namespace ctc_collapse
