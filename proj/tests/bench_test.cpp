// tests/bench_test.cpp

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

#include <cmath>
#include <fstream>
#include <sstream>

#include "gtest/gtest.h"

#include "ctc_collapse/bench.hpp"
#include "ctc_collapse/synth.hpp"
#include "test_util.hpp"

namespace ctc_collapse {
namespace {

using testing::TempDir;

TEST(WerTest, Examples) {
  auto e = wer("the cat sat", "the cat sat");
  EXPECT_EQ(e.errors, 0u);
  EXPECT_EQ(e.words, 3u);
  EXPECT_EQ(e.percent(), 0.0);

  e = wer("the bat sat", "the cat sat");
  EXPECT_EQ(e.errors, 1u);
  EXPECT_NEAR(e.percent(), 33.33, 0.01);

  e = wer("", "a b");
  EXPECT_EQ(e.errors, 2u);
  EXPECT_EQ(e.percent(), 100.0);

  EXPECT_EQ(wer("a b c", "a c").errors, 1u);
  EXPECT_EQ(wer("", "").percent(), 0.0);
  EXPECT_TRUE(std::isinf(wer("x", "").percent()));
}

TEST(RtfTest, Examples) {
  EXPECT_NEAR(measure_rtf(2.79, 10.0), 0.279, 1e-12);
  EXPECT_THROW(measure_rtf(1.0, 0.0), std::invalid_argument);
  EXPECT_NEAR(reduction_percent(0.279, 0.156), 44.09, 0.01);
  EXPECT_EQ(reduction_percent(0.0, 1.0), 0.0);
}

TEST(CollapsibleFractionTest, Extremes) {
  auto all_blank = EmissionMatrix::from_probs({{0.9999, 0.0001}, {0.9999, 0.0001}});
  EXPECT_EQ(collapsible_fraction(all_blank, CollapseMode::strong(0.999)), 100.0);
  auto none = EmissionMatrix::from_probs({{0.1, 0.9}, {0.1, 0.9}});
  EXPECT_EQ(collapsible_fraction(none, CollapseMode::weak()), 0.0);
  EXPECT_THROW(collapsible_fraction(EmissionMatrix{}, CollapseMode::weak()), std::invalid_argument);
}

TEST(RunLengthHistogramTest, Example) {
  auto m = EmissionMatrix::from_probs({{0.9, 0.1}, {0.9, 0.1}, {0.9, 0.1}, {0.1, 0.9}, {0.1, 0.9}, {0.9, 0.1}});
  RunLengthHistogram h;
  h.add(m);
  EXPECT_EQ(h.blank, (std::map<std::size_t, std::size_t>{{1, 1}, {3, 1}}));
  EXPECT_EQ(h.non_blank, (std::map<std::size_t, std::size_t>{{2, 1}}));
  EXPECT_EQ(h.to_csv(), "run_length,blank,non_blank\n1,1,0\n2,0,1\n3,1,0\n");

  // adjacent distinct labels are separate runs
  RunLengthHistogram ab;
  ab.add(EmissionMatrix::from_probs({{0.1, 0.8, 0.1}, {0.1, 0.1, 0.8}, {0.1, 0.1, 0.8}}));
  EXPECT_TRUE(ab.blank.empty());
  EXPECT_EQ(ab.non_blank, (std::map<std::size_t, std::size_t>{{1, 1}, {2, 1}}));

  RunLengthHistogram empty;
  EXPECT_TRUE(empty.empty());
  EXPECT_EQ(empty.to_csv(), "run_length,blank,non_blank\n");
}

class ExperimentTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto texts = random_transcripts(6, 2);
    manifest_ = generate_corpus(texts, default_alphabet(), SynthConfig{}, dir_.path());
    corpus_ = load_corpus(manifest_, 0);
  }
  TempDir dir_{"bench"};
  std::filesystem::path manifest_;
  std::vector<LoadedUtterance> corpus_;
};

TEST_F(ExperimentTest, BaselineIsAddedAndReductionsAreRelativeToIt) {
  DecoderConfig strong;
  strong.beam_size = 8;
  strong.beam_threshold = 10;
  strong.collapse = CollapseMode::strong(0.999);
  DecoderConfig weak = strong;
  weak.collapse = CollapseMode::weak();
  std::vector<DecoderConfig> grid{strong, weak, strong};
  ExperimentOptions opt;
  opt.reps = 1;
  auto report = run_experiment(corpus_, grid, nullptr, default_alphabet(), opt);
  ASSERT_EQ(report.rows.size(), 3u);
  EXPECT_EQ(report.rows[0].config.collapse.kind, CollapseMode::Kind::kNone);
  EXPECT_EQ(report.rows[0].frame_reduction_pct, 0.0);
  EXPECT_EQ(report.rows[0].time_reduction_pct, 0.0);
  EXPECT_GT(report.rows[1].frame_reduction_pct, 20.0);
  EXPECT_GE(report.rows[2].frame_reduction_pct, report.rows[1].frame_reduction_pct);
  for (const auto &row : report.rows) {
    EXPECT_EQ(row.utterances, 6u);
    EXPECT_EQ(row.wer_pct, 0.0);
    EXPECT_EQ(row.baseline_match_pct, 100.0);
    EXPECT_GT(row.rtf, 0.0);
  }
}

TEST_F(ExperimentTest, FastTimingGivesTheSameHypotheses) {
  DecoderConfig cfg;
  cfg.beam_size = 8;
  cfg.collapse = CollapseMode::strong(0.99);
  std::vector<DecoderConfig> grid{cfg};
  ExperimentOptions slow, fast;
  slow.reps = fast.reps = 1;
  fast.timing = TimingMode::kFast;
  fast.threads = 3;
  auto a = run_experiment(corpus_, grid, nullptr, default_alphabet(), slow);
  auto b = run_experiment(corpus_, grid, nullptr, default_alphabet(), fast);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) EXPECT_EQ(a.rows[i].hypotheses, b.rows[i].hypotheses);
}

TEST_F(ExperimentTest, EmptyGridIsAnError) {
  EXPECT_THROW(run_experiment(corpus_, std::vector<DecoderConfig>{}, nullptr, default_alphabet()),
               std::invalid_argument);
}

TEST_F(ExperimentTest, ReportFiles) {
  DecoderConfig cfg;
  cfg.beam_size = 4;
  cfg.collapse = CollapseMode::weak();
  std::vector<DecoderConfig> grid{cfg};
  ExperimentOptions opt;
  opt.reps = 1;
  auto report = run_experiment(corpus_, grid, nullptr, default_alphabet(), opt);
  write_report(report, corpus_, dir_ / "out");

  std::ifstream csv(dir_ / "out" / "report.csv");
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "# schema=1");
  std::getline(csv, line);
  EXPECT_EQ(line, kReportCsvHeader);
  std::getline(csv, line);
  EXPECT_EQ(line.rfind("none,0,50,4,0.0000,", 0), 0u) << line;
  std::getline(csv, line);
  EXPECT_EQ(line.rfind("weak,0,50,4,0.0000,", 0), 0u) << line;

  auto json = nlohmann::json::parse(std::ifstream(dir_ / "out" / "report.json"));
  EXPECT_EQ(json["schema"], 1);
  EXPECT_EQ(json["rows"].size(), 2u);

  std::ifstream hyps(dir_ / "out" / "hypotheses.csv");
  std::size_t lines = 0;
  while (std::getline(hyps, line)) ++lines;
  EXPECT_EQ(lines, 1u + 2u * 6u);
}

TEST_F(ExperimentTest, CollapsibleTableIsMonotoneInTheta) {
  std::vector<CollapseMode> modes{CollapseMode::strong(0.9), CollapseMode::strong(0.99),
                                  CollapseMode::strong(0.999)};
  auto table = collapsible_table(corpus_, modes);
  ASSERT_EQ(table.size(), 3u);
  EXPECT_GE(table[0].percent, table[1].percent);
  EXPECT_GE(table[1].percent, table[2].percent);
  EXPECT_FALSE(run_length_histogram(corpus_).empty());
}

TEST(CorpusTest, EmptyManifest) {
  TempDir dir("bench");
  { std::ofstream out(dir / "m.jsonl"); }
  auto corpus = load_corpus(dir / "m.jsonl", 0);
  EXPECT_TRUE(corpus.empty());
  DecoderConfig cfg;
  std::vector<DecoderConfig> grid{cfg};
  auto report = run_experiment(corpus, grid, nullptr, default_alphabet());
  ASSERT_EQ(report.rows.size(), 1u);
  EXPECT_EQ(report.rows[0].utterances, 0u);
  EXPECT_EQ(report.rows[0].wer_pct, 0.0);
}

}  // namespace
}  // namespace ctc_collapse
