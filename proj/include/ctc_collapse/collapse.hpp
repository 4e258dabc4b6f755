// include/ctc_collapse/collapse.hpp

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

// Blank collapse.
//
// A frame is a blank frame either because blank wins its argmax (weak) or
// because its blank probability reaches a threshold theta (strong). Runs of
// blank frames carry no more information for CTC decoding than a single
// blank, and runs touching either end of the utterance carry none at all.
// The collapsible frames of a blank set E are
//
//   phi(E) = { t in E : t-1 in E  or  t is the first frame  or
//              every frame from t to the end is in E }
//
// i.e. whole leading and trailing runs plus every interior blank except the
// first of its run. Dropping phi(E) shortens the emission before the beam
// search; kept_indices maps the short matrix back onto original frames.
//
// Frame indices are 0-based in this API. Reports print them 1-based.

#ifndef CTC_COLLAPSE_COLLAPSE_HPP_
#define CTC_COLLAPSE_COLLAPSE_HPP_

#include <cmath>
#include <cstddef>
#include <iterator>
#include <ranges>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctc_collapse/emissions.hpp"
#include "ctc_collapse/greedy.hpp"

namespace ctc_collapse {

/// Which frames count as blank frames. kNone disables collapsing.
struct CollapseMode {
  enum class Kind { kNone, kWeak, kStrong };

  Kind kind = Kind::kNone;
  double theta = 0.0;  // meaningful for kStrong only

  static CollapseMode none() { return {}; }
  static CollapseMode weak() { return {Kind::kWeak, 0.0}; }
  static CollapseMode strong(double theta) {
    if (!(theta >= 0.0 && theta <= 1.0))
      throw std::invalid_argument("blank threshold must lie in [0, 1]");
    return {Kind::kStrong, theta};
  }

  std::string name() const {
    switch (kind) {
      case Kind::kNone: return "none";
      case Kind::kWeak: return "weak";
      case Kind::kStrong: return "strong";
    }
    return "?";
  }

  friend bool operator==(const CollapseMode &, const CollapseMode &) = default;
};

struct BlankFrameSet {
  std::vector<std::size_t> indices;  // strictly increasing
  CollapseMode mode;
};

/// Per-frame blank indicator for the given mode. Strong frames satisfy
/// y_t^blank >= theta, compared in probability space.
inline std::vector<bool> blank_indicator(const EmissionMatrix &m, const CollapseMode &mode) {
  std::vector<bool> out(m.num_frames(), false);
  if (mode.kind == CollapseMode::Kind::kNone) return out;
  for (std::size_t t = 0; t < m.num_frames(); ++t) {
    if (mode.kind == CollapseMode::Kind::kWeak)
      out[t] = argmax_label(m.row(t)) == m.blank();
    else
      out[t] = std::exp(m.blank_log_prob(t)) >= mode.theta;
  }
  return out;
}

namespace internal {

inline BlankFrameSet to_frame_set(const std::vector<bool> &indicator, CollapseMode mode) {
  BlankFrameSet s{{}, mode};
  for (std::size_t t = 0; t < indicator.size(); ++t)
    if (indicator[t]) s.indices.push_back(t);
  return s;
}

}  // namespace internal

/// Frames whose argmax is blank (lowest index wins ties).
inline BlankFrameSet weak_blank_frames(const EmissionMatrix &m) {
  return internal::to_frame_set(blank_indicator(m, CollapseMode::weak()), CollapseMode::weak());
}

/// Frames with blank probability >= theta.
inline BlankFrameSet strong_blank_frames(const EmissionMatrix &m, double theta) {
  auto mode = CollapseMode::strong(theta);
  return internal::to_frame_set(blank_indicator(m, mode), mode);
}

/// phi(E) over frames [0, num_frames), straight from the set definition.
inline std::vector<std::size_t> consecutive_extension(std::span<const std::size_t> blank_frames,
                                                      std::size_t num_frames) {
  std::vector<bool> in(num_frames, false);
  for (std::size_t t : blank_frames) {
    if (t >= num_frames) throw std::out_of_range("blank frame index beyond num_frames");
    in[t] = true;
  }
  // suffix_all[t]: every s >= t is blank
  std::vector<bool> suffix_all(num_frames + 1, true);
  for (std::size_t t = num_frames; t-- > 0;) suffix_all[t] = in[t] && suffix_all[t + 1];

  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < num_frames; ++t) {
    if (!in[t]) continue;
    if (t == 0 || in[t - 1] || suffix_all[t]) out.push_back(t);
  }
  return out;
}

template <typename T>
struct RunLengthEncoding {
  std::vector<T> values;
  std::vector<std::size_t> counts;
};

/// Groups adjacent equal values: (T,T,F,F,F,T) -> values (T,F,T), counts (2,3,1).
template <std::ranges::input_range R>
auto run_length_encode(const R &input) {
  using T = std::ranges::range_value_t<R>;
  RunLengthEncoding<T> rle;
  for (auto &&v : input) {
    if (!rle.values.empty() && rle.values.back() == v) {
      ++rle.counts.back();
    } else {
      rle.values.push_back(v);
      rle.counts.push_back(1);
    }
  }
  return rle;
}

/// Surviving frames of a blank indicator, computed by a single pass over its
/// run-length encoding: the leading blank run is skipped, the trailing blank
/// run ends the scan, an interior blank run keeps only its first frame and a
/// non-blank run keeps everything.
inline std::vector<std::size_t> kept_frames(const std::vector<bool> &indicator) {
  const auto rle = run_length_encode(indicator);
  std::vector<std::size_t> kept;
  kept.reserve(indicator.size());
  std::size_t first = 0;  // first frame of run i
  for (std::size_t i = 0; i < rle.counts.size(); ++i) {
    const std::size_t count = rle.counts[i];
    if (rle.values[i]) {
      if (i + 1 == rle.counts.size()) break;
      if (i != 0) kept.push_back(first);
    } else {
      for (std::size_t t = first; t < first + count; ++t) kept.push_back(t);
    }
    first += count;
  }
  return kept;
}

struct CollapseResult {
  EmissionMatrix collapsed;
  std::vector<std::size_t> kept_indices;  // collapsed row i == original row kept_indices[i]
};

/// Drops the collapsible frames of m under `mode`. kNone returns m unchanged
/// with the identity index map.
inline CollapseResult blank_collapse(const EmissionMatrix &m, const CollapseMode &mode) {
  CollapseResult r;
  if (mode.kind == CollapseMode::Kind::kNone) {
    r.kept_indices.resize(m.num_frames());
    for (std::size_t t = 0; t < m.num_frames(); ++t) r.kept_indices[t] = t;
    r.collapsed = m;
    return r;
  }
  r.kept_indices = kept_frames(blank_indicator(m, mode));
  r.collapsed = m.select_rows(r.kept_indices);
  return r;
}

/// Maps frame positions in the collapsed matrix back to original frames.
inline std::vector<std::size_t> remap_alignment(std::span<const std::size_t> collapsed_positions,
                                                const CollapseResult &result) {
  std::vector<std::size_t> out;
  out.reserve(collapsed_positions.size());
  for (std::size_t p : collapsed_positions) {
    if (p >= result.kept_indices.size())
      throw std::out_of_range("collapsed frame " + std::to_string(p) + " beyond collapsed length " +
                              std::to_string(result.kept_indices.size()));
    out.push_back(result.kept_indices[p]);
  }
  return out;
}

}  // namespace ctc_collapse

#endif  // CTC_COLLAPSE_COLLAPSE_HPP_
