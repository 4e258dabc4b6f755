// tests/collapse_test.cpp

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
#include <cmath>
#include <random>

#include "gtest/gtest.h"

#include "ctc_collapse/collapse.hpp"
#include "ctc_collapse/greedy.hpp"
#include "test_util.hpp"

namespace ctc_collapse {
namespace {

using Frames = std::vector<std::size_t>;

// Two-label emission (blank at 0) from per-frame blank probabilities.
EmissionMatrix from_blank_probs(const std::vector<double> &blank) {
  std::vector<std::vector<double>> rows;
  for (double b : blank) rows.push_back({b, 1.0 - b});
  return EmissionMatrix::from_probs(rows);
}

std::vector<bool> indicator_from_bits(unsigned bits, std::size_t n) {
  std::vector<bool> v(n);
  for (std::size_t t = 0; t < n; ++t) v[t] = (bits >> t) & 1u;
  return v;
}

// Complement of phi(E) in [0, T): the definition the RLE pass must match.
Frames kept_by_definition(const std::vector<bool> &indicator) {
  Frames e;
  for (std::size_t t = 0; t < indicator.size(); ++t)
    if (indicator[t]) e.push_back(t);
  const auto phi = consecutive_extension(e, indicator.size());
  Frames kept;
  for (std::size_t t = 0; t < indicator.size(); ++t)
    if (!std::binary_search(phi.begin(), phi.end(), t)) kept.push_back(t);
  return kept;
}

TEST(WeakBlankFramesTest, ArgmaxIsBlank) {
  EXPECT_EQ(weak_blank_frames(from_blank_probs({0.6, 0.3, 0.7})).indices, (Frames{0, 2}));
}

TEST(WeakBlankFramesTest, AllBlankAndEmpty) {
  EXPECT_EQ(weak_blank_frames(from_blank_probs({0.9, 0.8, 0.51})).indices, (Frames{0, 1, 2}));
  EXPECT_TRUE(weak_blank_frames(EmissionMatrix{}).indices.empty());
}

TEST(WeakBlankFramesTest, TiesGoToTheLowerIndex) {
  auto blank_first = EmissionMatrix::from_probs({{0.5, 0.5}}, 0);
  auto blank_second = EmissionMatrix::from_probs({{0.5, 0.5}}, 1);
  EXPECT_EQ(weak_blank_frames(blank_first).indices, (Frames{0}));
  EXPECT_TRUE(weak_blank_frames(blank_second).indices.empty());
}

TEST(StrongBlankFramesTest, Threshold) {
  auto m = from_blank_probs({0.999, 0.5, 0.995});
  EXPECT_EQ(strong_blank_frames(m, 0.99).indices, (Frames{0, 2}));
  EXPECT_EQ(strong_blank_frames(m, 0.0).indices, (Frames{0, 1, 2}));
  EXPECT_THROW(strong_blank_frames(m, 1.5), std::invalid_argument);
}

TEST(StrongBlankFramesTest, ComparisonIsInclusive) {
  auto m = from_blank_probs({0.5, 0.25});
  EXPECT_EQ(strong_blank_frames(m, 0.5).indices, (Frames{0}));
}

TEST(StrongBlankFramesTest, AboveOneHalfIsSubsetOfWeak) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> theta(0.5000001, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    auto m = testing::random_emission(rng, 1 + rng() % 30, 2 + rng() % 6, 0, 3.0, 2.0);
    auto weak = weak_blank_frames(m).indices;
    for (auto t : strong_blank_frames(m, theta(rng)).indices)
      EXPECT_TRUE(std::binary_search(weak.begin(), weak.end(), t));
  }
}

TEST(StrongBlankFramesTest, MonotoneInThreshold) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    auto m = testing::random_emission(rng, 1 + rng() % 30, 2 + rng() % 6, 0, 3.0, 2.0);
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    auto lo = strong_blank_frames(m, a).indices;
    auto hi = strong_blank_frames(m, b).indices;
    EXPECT_TRUE(std::includes(lo.begin(), lo.end(), hi.begin(), hi.end()));
    EXPECT_LE(blank_collapse(m, CollapseMode::strong(a)).kept_indices.size(),
              blank_collapse(m, CollapseMode::strong(b)).kept_indices.size());
  }
}

TEST(ConsecutiveExtensionTest, LeadingInteriorAndTrailingRuns) {
  // 1-based {1,2,5,6,7,10} -> {1,2,6,7,10}
  EXPECT_EQ(consecutive_extension(Frames{0, 1, 4, 5, 6, 9}, 10), (Frames{0, 1, 5, 6, 9}));
}

TEST(ConsecutiveExtensionTest, AllBlankAndEmpty) {
  EXPECT_EQ(consecutive_extension(Frames{0, 1, 2, 3}, 4), (Frames{0, 1, 2, 3}));
  EXPECT_TRUE(consecutive_extension(Frames{}, 5).empty());
  EXPECT_TRUE(consecutive_extension(Frames{}, 0).empty());
}

TEST(ConsecutiveExtensionTest, RejectsOutOfRange) {
  EXPECT_THROW(consecutive_extension(Frames{3}, 3), std::out_of_range);
}

TEST(RunLengthEncodeTest, Examples) {
  auto rle = run_length_encode(std::vector<bool>{true, true, false, false, false, true});
  EXPECT_EQ(rle.values, (std::vector<bool>{true, false, true}));
  EXPECT_EQ(rle.counts, (std::vector<std::size_t>{2, 3, 1}));

  auto empty = run_length_encode(std::vector<int>{});
  EXPECT_TRUE(empty.values.empty());
  EXPECT_TRUE(empty.counts.empty());

  auto one = run_length_encode(std::vector<int>{7});
  EXPECT_EQ(one.values, (std::vector<int>{7}));
  EXPECT_EQ(one.counts, (std::vector<std::size_t>{1}));
}

TEST(RunLengthEncodeTest, ExpansionReconstructsInput) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<int> v(rng() % 50);
    for (auto &x : v) x = static_cast<int>(rng() % 3);
    auto rle = run_length_encode(v);
    std::vector<int> back;
    for (std::size_t i = 0; i < rle.values.size(); ++i) {
      if (i) {
        EXPECT_NE(rle.values[i], rle.values[i - 1]);
      }
      EXPECT_GT(rle.counts[i], 0u);
      back.insert(back.end(), rle.counts[i], rle.values[i]);
    }
    EXPECT_EQ(back, v);
  }
}

TEST(BlankCollapseTest, StrongExample) {
  auto m = from_blank_probs({0.999, 0.999, 0.3, 0.999, 0.999, 0.999, 0.4, 0.999});
  auto r = blank_collapse(m, CollapseMode::strong(0.99));
  // 1-based (3,4,7)
  EXPECT_EQ(r.kept_indices, (Frames{2, 3, 6}));
  ASSERT_EQ(r.collapsed.num_frames(), 3u);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 2; ++k)
      EXPECT_EQ(r.collapsed.at(i, k), m.at(r.kept_indices[i], k));
}

TEST(BlankCollapseTest, AllBlankCollapsesToNothing) {
  auto m = from_blank_probs({0.9999, 0.9999, 0.9999});
  EXPECT_EQ(blank_collapse(m, CollapseMode::weak()).collapsed.num_frames(), 0u);
  EXPECT_EQ(blank_collapse(m, CollapseMode::strong(0.999)).collapsed.num_frames(), 0u);
}

TEST(BlankCollapseTest, NoneIsIdentity) {
  auto m = from_blank_probs({0.9999, 0.2, 0.9999});
  auto r = blank_collapse(m, CollapseMode::none());
  EXPECT_EQ(r.collapsed, m);
  EXPECT_EQ(r.kept_indices, (Frames{0, 1, 2}));
}

TEST(BlankCollapseTest, RlePassMatchesDefinitionExhaustively) {
  for (std::size_t n = 0; n <= 12; ++n)
    for (unsigned bits = 0; bits < (1u << n); ++bits) {
      auto ind = indicator_from_bits(bits, n);
      ASSERT_EQ(kept_frames(ind), kept_by_definition(ind)) << "n=" << n << " bits=" << bits;
    }
}

TEST(BlankCollapseTest, KeptIndicesAreIncreasingAndRowsCopiedExactly) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 300; ++trial) {
    auto m = testing::random_emission(rng, rng() % 40, 2 + rng() % 5, 0, 4.0, 3.0);
    auto r = blank_collapse(m, CollapseMode::strong(0.9));
    for (std::size_t i = 0; i < r.kept_indices.size(); ++i) {
      if (i) {
        EXPECT_LT(r.kept_indices[i - 1], r.kept_indices[i]);
      }
      auto a = r.collapsed.row(i), b = m.row(r.kept_indices[i]);
      EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
    }
  }
}

TEST(BlankCollapseTest, DroppedFramesBoundEveryNonBlankByOneMinusTheta) {
  std::mt19937_64 rng(10);
  for (double theta : {0.9, 0.99, 0.999}) {
    for (int trial = 0; trial < 300; ++trial) {
      auto m = testing::random_emission(rng, 1 + rng() % 40, 2 + rng() % 6, 0, 6.0, 6.0);
      auto kept = blank_collapse(m, CollapseMode::strong(theta)).kept_indices;
      for (std::size_t t = 0; t < m.num_frames(); ++t) {
        if (std::binary_search(kept.begin(), kept.end(), t)) continue;
        for (std::size_t k = 1; k < m.num_labels(); ++k)
          EXPECT_LE(std::exp(m.at(t, k)), 1.0 - theta + 1e-12);
      }
    }
  }
}

TEST(BlankCollapseTest, GreedyDecodeIsInvariant) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 3000; ++trial) {
    const std::size_t v = 2 + rng() % 8;
    const int blank = static_cast<int>(rng() % v);
    auto m = testing::random_emission(rng, rng() % 64, v, blank, 2.0, 1.5);
    const auto expected = greedy_decode(m);
    ASSERT_EQ(greedy_decode(blank_collapse(m, CollapseMode::weak()).collapsed), expected);
    ASSERT_EQ(greedy_decode(blank_collapse(m, CollapseMode::strong(0.6)).collapsed), expected);
  }
}

TEST(RemapAlignmentTest, Examples) {
  auto m = from_blank_probs({0.999, 0.999, 0.3, 0.999, 0.999, 0.999, 0.4, 0.999});
  auto r = blank_collapse(m, CollapseMode::strong(0.99));
  EXPECT_EQ(remap_alignment(Frames{0, 2}, r), (Frames{2, 6}));
  EXPECT_TRUE(remap_alignment(Frames{}, r).empty());
  EXPECT_THROW(remap_alignment(Frames{3}, r), std::out_of_range);

  auto id = blank_collapse(m, CollapseMode::none());
  EXPECT_EQ(remap_alignment(Frames{0, 5, 7}, id), (Frames{0, 5, 7}));
}

}  // namespace
}  // namespace ctc_collapse
