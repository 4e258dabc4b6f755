// include/ctc_collapse/greedy.hpp

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

#ifndef CTC_COLLAPSE_GREEDY_HPP_
#define CTC_COLLAPSE_GREEDY_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ctc_collapse/emissions.hpp"

namespace ctc_collapse {

/// Extended-label indices with blanks removed. Produced by map_b and every
/// decoder in the toolkit.
using LabelSequence = std::vector<int>;

/// Index of the largest entry; the lowest index wins ties.
inline int argmax_label(std::span<const double> row) {
  int best = 0;
  for (std::size_t k = 1; k < row.size(); ++k)
    if (row[k] > row[static_cast<std::size_t>(best)]) best = static_cast<int>(k);
  return best;
}

/// CTC many-to-one mapping: merge adjacent repeats, then drop blanks.
inline LabelSequence map_b(std::span<const int> path, int blank_index) {
  LabelSequence out;
  int prev = -1;
  for (int k : path) {
    if (k != prev && k != blank_index) out.push_back(k);
    prev = k;
  }
  return out;
}

/// Best-path decoding: per-frame argmax followed by map_b.
inline LabelSequence greedy_decode(const EmissionMatrix &m) {
  std::vector<int> path;
  path.reserve(m.num_frames());
  for (std::size_t t = 0; t < m.num_frames(); ++t) path.push_back(argmax_label(m.row(t)));
  return map_b(path, m.blank());
}

/// Renders a label sequence as text. Labels are concatenated; every
/// occurrence of `word_delimiter` becomes a single space and the result is
/// trimmed, so "|the|cat|" reads "the cat".
inline std::string labels_to_text(std::span<const int> labels, const Alphabet &alphabet,
                                  const std::string &word_delimiter = "|") {
  std::string out;
  bool pending_space = false;
  for (int k : labels) {
    const std::string &l = alphabet.label(k);
    if (l == word_delimiter || l == " ") {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out += l;
  }
  return out;
}

}  // namespace ctc_collapse

#endif  // CTC_COLLAPSE_GREEDY_HPP_
