// include/ctc_collapse/oracle.hpp

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

// Exact references for small instances. enumerate_posteriors walks every
// alignment path; ctc_forward runs the forward recursion for one target.
// The two share no code beyond map_b so each can check the other.

#ifndef CTC_COLLAPSE_ORACLE_HPP_
#define CTC_COLLAPSE_ORACLE_HPP_

#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "ctc_collapse/emissions.hpp"
#include "ctc_collapse/greedy.hpp"
#include "ctc_collapse/log_math.hpp"

namespace ctc_collapse {

/// Label sequence -> exact posterior probability.
using PathEnumeration = std::map<LabelSequence, double>;

inline constexpr double kMaxEnumeratedPaths = 1e7;

/// Sums the probability of every path in L'^T onto map_b(path).
inline PathEnumeration enumerate_posteriors(const EmissionMatrix &m) {
  const std::size_t T = m.num_frames();
  const std::size_t V = m.num_labels();
  PathEnumeration out;
  if (T == 0) {
    out[{}] = 1.0;
    return out;
  }
  if (std::pow(static_cast<double>(V), static_cast<double>(T)) > kMaxEnumeratedPaths)
    throw std::length_error("instance has more than 1e7 alignment paths");

  std::vector<int> path(T, 0);
  while (true) {
    double p = 1.0;
    for (std::size_t t = 0; t < T && p != 0.0; ++t)
      p *= std::exp(m.at(t, static_cast<std::size_t>(path[t])));
    if (p != 0.0) out[map_b(path, m.blank())] += p;

    // odometer increment
    std::size_t t = T;
    while (t-- > 0) {
      if (++path[t] < static_cast<int>(V)) break;
      path[t] = 0;
    }
    if (t == static_cast<std::size_t>(-1)) break;
  }
  return out;
}

/// Natural-log probability of `target` under m via the CTC forward
/// recursion over the blank-interleaved target.
inline double ctc_forward(const EmissionMatrix &m, std::span<const int> target) {
  const std::size_t T = m.num_frames();
  const int blank = m.blank();
  if (T == 0) return target.empty() ? 0.0 : kLogZero;

  const std::size_t S = 2 * target.size() + 1;
  auto sym = [&](std::size_t s) {
    return static_cast<std::size_t>(s % 2 == 0 ? blank : target[s / 2]);
  };

  std::vector<double> alpha(S, kLogZero), next(S, kLogZero);
  alpha[0] = m.at(0, sym(0));
  if (S > 1) alpha[1] = m.at(0, sym(1));
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t s = 0; s < S; ++s) {
      double a = alpha[s];
      if (s >= 1) a = log_add(a, alpha[s - 1]);
      if (s >= 2 && s % 2 == 1 && sym(s) != sym(s - 2)) a = log_add(a, alpha[s - 2]);
      next[s] = a == kLogZero ? kLogZero : a + m.at(t, sym(s));
    }
    alpha.swap(next);
  }
  return S >= 2 ? log_add(alpha[S - 1], alpha[S - 2]) : alpha[S - 1];
}

}  // namespace ctc_collapse

#endif  // CTC_COLLAPSE_ORACLE_HPP_
