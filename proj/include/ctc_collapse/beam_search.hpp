// include/ctc_collapse/beam_search.hpp

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

// CTC prefix beam search with n-gram shallow fusion.
//
// Every live prefix c keeps two log-probabilities: p_b (all alignments of c
// ending in blank) and p_nb (ending in c's last label). One emission row y
// advances them as
//
//   p_b(c)      += p_tot(c) * y[blank]
//   p_nb(c)     += p_nb(c)  * y[last(c)]
//   p_nb(c + k) += p_b(c)   * y[k]        if k == last(c)
//   p_nb(c + k) += p_tot(c) * y[k]        otherwise
//
// (all in log space, "+=" being log-sum-exp), so two extensions that reach
// the same prefix merge. Candidates are ranked by
//
//   score(c) = log p_tot(c) + lm_weight * log P_lm(c) + length_penalty * |words(c)|
//
// then pruned to those within beam_threshold of the best and finally to the
// beam_size best. Prefixes live in a trie shared by all frames of one
// decode, so LM state and text are computed once per distinct prefix.

#ifndef CTC_COLLAPSE_BEAM_SEARCH_HPP_
#define CTC_COLLAPSE_BEAM_SEARCH_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "ctc_collapse/collapse.hpp"
#include "ctc_collapse/emissions.hpp"
#include "ctc_collapse/greedy.hpp"
#include "ctc_collapse/lm_ngram.hpp"
#include "ctc_collapse/log_math.hpp"

namespace ctc_collapse {

/// How emitted labels become LM tokens.
enum class LmUnit {
  kWord,  // labels accumulate into a word, scored when the delimiter is emitted
  kChar,  // every non-blank label is scored as its own token
};

struct DecoderConfig {
  std::size_t beam_size = 1500;
  double beam_threshold = 50.0;  // log-domain margin below the best score
  double lm_weight = 1.57;
  double length_penalty = -0.64;  // per LM token
  CollapseMode collapse = CollapseMode::none();
  LmUnit lm_unit = LmUnit::kWord;
  std::string word_delimiter = "|";

  void validate() const {
    if (beam_size < 1) throw std::invalid_argument("beam_size must be >= 1");
    if (!(beam_threshold >= 0.0)) throw std::invalid_argument("beam_threshold must be >= 0");
  }
};

/// A live prefix. log_p_tot() = log(P_b + P_nb).
struct Hypothesis {
  LabelSequence prefix;
  double log_p_b = kLogZero;
  double log_p_nb = kLogZero;
  LmState lm_state;
  double lm_log = 0.0;       // accumulated natural-log P_lm of completed tokens
  std::size_t lm_tokens = 0; // completed LM tokens

  double log_p_tot() const { return log_add(log_p_b, log_p_nb); }
};

/// log p_tot + lm_weight * lm_log + length_penalty * lm_tokens.
inline double hypothesis_score(const Hypothesis &h, const DecoderConfig &cfg) {
  return h.log_p_tot() + cfg.lm_weight * h.lm_log +
         cfg.length_penalty * static_cast<double>(h.lm_tokens);
}

/// Incremental decoder over one utterance. step() consumes one emission row;
/// hypotheses() is ordered best first. Without an LM, lm_weight and
/// length_penalty have no effect (no tokens are ever completed).
class PrefixBeamSearch {
 public:
  PrefixBeamSearch(DecoderConfig cfg, int blank_index, const ArpaModel *lm = nullptr,
                   const Alphabet *alphabet = nullptr)
      : cfg_(std::move(cfg)), blank_(blank_index), lm_(lm), alphabet_(alphabet) {
    cfg_.validate();
    if (lm_ && !alphabet_) throw std::invalid_argument("LM fusion needs the alphabet");
    reset();
  }

  void reset() {
    nodes_.clear();
    children_.clear();
    Node root;
    root.parent = -1;
    root.label = -1;
    if (lm_) root.lm_state = lm_->initial_state();
    nodes_.push_back(std::move(root));
    beams_.assign(1, Beam{0, 0.0, kLogZero, 0.0});
    frames_ = 0;
  }

  std::size_t frames_consumed() const { return frames_; }
  std::size_t num_beams() const { return beams_.size(); }

  void step(std::span<const double> row) {
    if (static_cast<std::size_t>(blank_) >= row.size())
      throw std::invalid_argument("blank index outside emission row");
    ++frames_;
    const double y_blank = row[static_cast<std::size_t>(blank_)];
    const std::size_t vocab = row.size();

    // accumulators for prefixes that already exist as trie nodes
    if (slot_.size() < nodes_.size()) slot_.resize(nodes_.size(), -1);
    std::vector<Candidate> cand;
    cand.reserve(beams_.size() * 2);
    std::vector<int> touched;

    auto existing = [&](int node) -> Candidate & {
      int &s = slot_[static_cast<std::size_t>(node)];
      if (s < 0) {
        s = static_cast<int>(cand.size());
        cand.push_back(Candidate{node, -1, -1, kLogZero, kLogZero, 0.0});
        touched.push_back(node);
      }
      return cand[static_cast<std::size_t>(s)];
    };
    std::vector<Candidate> fresh;  // extensions with no trie node yet; unique by construction

    for (const Beam &b : beams_) {
      const double p_tot = log_add(b.log_p_b, b.log_p_nb);
      const Node &node = nodes_[static_cast<std::size_t>(b.node)];
      const int last = node.label;

      if (y_blank != kLogZero && p_tot != kLogZero) {
        Candidate &c = existing(b.node);
        c.log_p_b = log_add(c.log_p_b, p_tot + y_blank);
      }
      if (last >= 0 && b.log_p_nb != kLogZero && row[static_cast<std::size_t>(last)] != kLogZero) {
        Candidate &c = existing(b.node);
        c.log_p_nb = log_add(c.log_p_nb, b.log_p_nb + row[static_cast<std::size_t>(last)]);
      }
      for (std::size_t k = 0; k < vocab; ++k) {
        const int label = static_cast<int>(k);
        if (label == blank_ || row[k] == kLogZero) continue;
        const double from = label == last ? b.log_p_b : p_tot;
        if (from == kLogZero) continue;
        const double contrib = from + row[k];
        const int child = find_child(b.node, label, vocab);
        if (child >= 0) {
          Candidate &c = existing(child);
          c.log_p_nb = log_add(c.log_p_nb, contrib);
        } else {
          fresh.push_back(Candidate{-1, b.node, label, kLogZero, contrib, 0.0});
        }
      }
    }
    for (int n : touched) slot_[static_cast<std::size_t>(n)] = -1;
    cand.insert(cand.end(), fresh.begin(), fresh.end());

    // score
    double best = kLogZero;
    for (Candidate &c : cand) {
      const LmDelta lm = c.node >= 0 ? LmDelta{nodes_[static_cast<std::size_t>(c.node)].lm_log,
                                               nodes_[static_cast<std::size_t>(c.node)].lm_tokens}
                                     : extension_lm(c.parent, c.label);
      c.score = log_add(c.log_p_b, c.log_p_nb) + cfg_.lm_weight * lm.lm_log +
                cfg_.length_penalty * static_cast<double>(lm.tokens);
      best = std::max(best, c.score);
    }

    // threshold, then histogram pruning
    const double floor = best - cfg_.beam_threshold;
    std::erase_if(cand, [&](const Candidate &c) {
      return c.score == kLogZero || std::isnan(c.score) || c.score < floor;
    });
    auto better = [&](const Candidate &a, const Candidate &b) {
      if (a.score != b.score) return a.score > b.score;
      return prefix_less(a, b);
    };
    if (cand.size() > cfg_.beam_size) {
      std::nth_element(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(cfg_.beam_size),
                       cand.end(), better);
      cand.resize(cfg_.beam_size);
    }
    std::sort(cand.begin(), cand.end(), better);

    beams_.clear();
    for (const Candidate &c : cand) {
      const int node = c.node >= 0 ? c.node : make_child(c.parent, c.label, vocab);
      beams_.push_back(Beam{node, c.log_p_b, c.log_p_nb, c.score});
    }
  }

  /// Current beams, best first.
  std::vector<Hypothesis> hypotheses() const {
    std::vector<Hypothesis> out;
    out.reserve(beams_.size());
    for (const Beam &b : beams_) out.push_back(to_hypothesis(b));
    return out;
  }

  struct Final {
    Hypothesis hypothesis;
    double score;  // includes the end-of-sentence LM term
  };

  /// Closes every hypothesis (pending word, then </s>) and re-ranks. Ties in
  /// score go to the lexicographically smaller prefix.
  std::vector<Final> finalize() const {
    std::vector<Final> out;
    out.reserve(beams_.size());
    for (const Beam &b : beams_) {
      Hypothesis h = to_hypothesis(b);
      if (lm_) {
        const Node &n = nodes_[static_cast<std::size_t>(b.node)];
        if (cfg_.lm_unit == LmUnit::kWord && !n.partial_word.empty()) {
          auto [lp, next] = lm_->score_token(h.lm_state, n.partial_word);
          h.lm_log += lp;
          h.lm_tokens += 1;
          h.lm_state = std::move(next);
        }
        h.lm_log += lm_->score_sentence_end(h.lm_state);
      }
      const double s = hypothesis_score(h, cfg_);
      out.push_back(Final{std::move(h), s});
    }
    std::sort(out.begin(), out.end(), [](const Final &a, const Final &b) {
      if (a.score != b.score) return a.score > b.score;
      return a.hypothesis.prefix < b.hypothesis.prefix;
    });
    return out;
  }

 private:
  struct Node {
    int parent = -1;
    int label = -1;
    LmState lm_state;
    double lm_log = 0.0;
    std::size_t lm_tokens = 0;
    std::string partial_word;  // LmUnit::kWord only
  };
  struct Beam {
    int node;
    double log_p_b;
    double log_p_nb;
    double score;
  };
  struct Candidate {
    int node;    // >= 0 when the prefix already has a trie node
    int parent;  // otherwise: parent node + label
    int label;
    double log_p_b;
    double log_p_nb;
    double score;
  };
  struct LmDelta {
    double lm_log;
    std::size_t tokens;
  };
  struct LmExtension {
    double lm_log;
    std::size_t tokens;
    LmState state;
    std::string partial_word;
  };

  static std::uint64_t child_key(int parent, int label, std::size_t vocab) {
    return static_cast<std::uint64_t>(parent) * vocab + static_cast<std::uint64_t>(label);
  }

  int find_child(int parent, int label, std::size_t vocab) const {
    auto it = children_.find(child_key(parent, label, vocab));
    return it == children_.end() ? -1 : it->second;
  }

  LmExtension extend_lm(int parent, int label) const {
    const Node &p = nodes_[static_cast<std::size_t>(parent)];
    LmExtension e{p.lm_log, p.lm_tokens, p.lm_state, {}};
    if (!lm_) return e;
    const std::string &text = alphabet_->label(label);
    if (cfg_.lm_unit == LmUnit::kChar) {
      auto [lp, next] = lm_->score_token(p.lm_state, text);
      e.lm_log += lp;
      e.tokens += 1;
      e.state = std::move(next);
    } else if (text == cfg_.word_delimiter) {
      if (!p.partial_word.empty()) {
        auto [lp, next] = lm_->score_token(p.lm_state, p.partial_word);
        e.lm_log += lp;
        e.tokens += 1;
        e.state = std::move(next);
      }
    } else {
      e.partial_word = p.partial_word + text;
    }
    return e;
  }

  LmDelta extension_lm(int parent, int label) const {
    if (!lm_) {
      const Node &p = nodes_[static_cast<std::size_t>(parent)];
      return {p.lm_log, p.lm_tokens};
    }
    // word mode without a completed word leaves the LM part untouched
    if (cfg_.lm_unit == LmUnit::kWord && alphabet_->label(label) != cfg_.word_delimiter) {
      const Node &p = nodes_[static_cast<std::size_t>(parent)];
      return {p.lm_log, p.lm_tokens};
    }
    auto e = extend_lm(parent, label);
    return {e.lm_log, e.tokens};
  }

  int make_child(int parent, int label, std::size_t vocab) {
    auto e = extend_lm(parent, label);
    Node n;
    n.parent = parent;
    n.label = label;
    n.lm_state = std::move(e.state);
    n.lm_log = e.lm_log;
    n.lm_tokens = e.tokens;
    n.partial_word = std::move(e.partial_word);
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(std::move(n));
    children_.emplace(child_key(parent, label, vocab), id);
    return id;
  }

  LabelSequence prefix_of(int node) const {
    LabelSequence out;
    for (int n = node; n > 0; n = nodes_[static_cast<std::size_t>(n)].parent)
      out.push_back(nodes_[static_cast<std::size_t>(n)].label);
    std::reverse(out.begin(), out.end());
    return out;
  }

  LabelSequence prefix_of(const Candidate &c) const {
    if (c.node >= 0) return prefix_of(c.node);
    auto p = prefix_of(c.parent);
    p.push_back(c.label);
    return p;
  }

  bool prefix_less(const Candidate &a, const Candidate &b) const {
    return prefix_of(a) < prefix_of(b);
  }

  Hypothesis to_hypothesis(const Beam &b) const {
    const Node &n = nodes_[static_cast<std::size_t>(b.node)];
    Hypothesis h;
    h.prefix = prefix_of(b.node);
    h.log_p_b = b.log_p_b;
    h.log_p_nb = b.log_p_nb;
    h.lm_state = n.lm_state;
    h.lm_log = n.lm_log;
    h.lm_tokens = n.lm_tokens;
    return h;
  }

  DecoderConfig cfg_;
  int blank_;
  const ArpaModel *lm_;
  const Alphabet *alphabet_;
  std::vector<Node> nodes_;
  std::unordered_map<std::uint64_t, int> children_;
  std::vector<Beam> beams_;
  std::vector<int> slot_;
  std::size_t frames_ = 0;
};

/// Viterbi alignment of `labels` against m: for each label, the first frame
/// of the best path on which it is emitted. Empty if no path exists.
inline std::vector<std::size_t> align_labels(const EmissionMatrix &m, std::span<const int> labels) {
  const std::size_t T = m.num_frames();
  const std::size_t S = 2 * labels.size() + 1;
  if (labels.empty() || T == 0) return {};
  auto sym = [&](std::size_t s) { return s % 2 == 0 ? m.blank() : labels[s / 2]; };

  std::vector<double> score(S, kLogZero), next(S);
  std::vector<std::vector<std::size_t>> back(T, std::vector<std::size_t>(S, 0));
  score[0] = m.at(0, static_cast<std::size_t>(sym(0)));
  if (S > 1) score[1] = m.at(0, static_cast<std::size_t>(sym(1)));
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t s = 0; s < S; ++s) {
      double best = score[s];
      std::size_t arg = s;
      if (s >= 1 && score[s - 1] > best) {
        best = score[s - 1];
        arg = s - 1;
      }
      if (s >= 2 && s % 2 == 1 && sym(s) != sym(s - 2) && score[s - 2] > best) {
        best = score[s - 2];
        arg = s - 2;
      }
      next[s] = best == kLogZero ? kLogZero : best + m.at(t, static_cast<std::size_t>(sym(s)));
      back[t][s] = arg;
    }
    score.swap(next);
  }
  std::size_t s = S - 1;
  if (S >= 2 && score[S - 2] > score[S - 1]) s = S - 2;
  if (score[s] == kLogZero) return {};

  std::vector<std::size_t> first(labels.size(), 0);
  for (std::size_t t = T; t-- > 0;) {
    if (s % 2 == 1) first[s / 2] = t;  // walking backwards, the last write is the first frame
    if (t > 0) s = back[t][s];
  }
  return first;
}

struct DecodeResult {
  LabelSequence labels;
  double score = 0.0;      // final fused score of the winner
  double log_p_tot = 0.0;  // its acoustic log-probability
  std::vector<std::size_t> alignment;  // original frame of each label's first emission
  std::size_t frames_decoded = 0;      // rows fed to the search after collapse
};

/// Collapses (per cfg.collapse), searches, finalizes and maps the winner's
/// alignment back onto original frames.
inline DecodeResult decode(const EmissionMatrix &m, const DecoderConfig &cfg,
                           const ArpaModel *lm = nullptr, const Alphabet *alphabet = nullptr) {
  const CollapseResult collapsed = blank_collapse(m, cfg.collapse);
  const EmissionMatrix &em = collapsed.collapsed;

  PrefixBeamSearch search(cfg, m.blank(), lm, alphabet);
  for (std::size_t t = 0; t < em.num_frames(); ++t) search.step(em.row(t));

  DecodeResult r;
  r.frames_decoded = em.num_frames();
  auto finals = search.finalize();
  if (finals.empty()) return r;
  r.labels = std::move(finals.front().hypothesis.prefix);
  r.score = finals.front().score;
  r.log_p_tot = finals.front().hypothesis.log_p_tot();
  r.alignment = remap_alignment(align_labels(em, r.labels), collapsed);
  return r;
}

}  // namespace ctc_collapse

#endif  // CTC_COLLAPSE_BEAM_SEARCH_HPP_
