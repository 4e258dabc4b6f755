// include/ctc_collapse/synth.hpp

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

// Synthetic peaky CTC emissions.
//
// An utterance is laid out as alternating label runs and blank runs:
//
//   [blank run] tok1-run [gap] tok2-run [gap] ... tokN-run [blank run]
//
// Label runs are geometric (mostly one or two frames). The leading and
// trailing blank runs always exist; an interior gap holds a blank run when
// the two tokens are equal (CTC needs the separator) or, otherwise, with
// probability gap_probability. Blank run lengths are 1 + negative binomial
// with the mean chosen so that blank frames make up blank_fraction of the
// utterance in expectation.
//
// Each frame gives its dominant label 1 - r and spreads r uniformly over
// the other labels. For label frames r = (1 - peak_confidence) * jitter;
// inside a blank run r additionally shrinks by blank_sharpening per frame of
// distance from the nearest label frame, so blank frames far from speech are
// far more confident than label frames. r never exceeds 0.45, which keeps
// the dominant label the strict argmax: greedy decoding reproduces the
// transcript by construction.

#ifndef CTC_COLLAPSE_SYNTH_HPP_
#define CTC_COLLAPSE_SYNTH_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctc_collapse/emissions.hpp"
#include "ctc_collapse/greedy.hpp"

namespace ctc_collapse {

struct SynthConfig {
  double blank_fraction = 0.45;     // expected share of blank-dominant frames, in (0, 1)
  double peak_confidence = 0.97;    // dominant-label mass on label frames, in (0.5, 1)
  double label_run_continue = 0.25; // geometric: P(run > n | run >= n)
  double blank_run_shape = 2.0;     // negative-binomial shape of blank runs (rounded)
  double gap_probability = 0.02;    // blank run between two distinct tokens
  double blank_sharpening = 0.01;   // residual factor per frame into a blank run
  double jitter = 0.5;              // log-normal sigma on every frame's residual
  std::uint64_t seed = 1;
  double frame_shift_s = 0.02;

  void validate() const {
    if (!(blank_fraction > 0.0 && blank_fraction < 1.0))
      throw std::invalid_argument("blank_fraction must lie in (0, 1)");
    if (!(peak_confidence > 0.5 && peak_confidence < 1.0))
      throw std::invalid_argument("peak_confidence must lie in (0.5, 1)");
    if (!(label_run_continue >= 0.0 && label_run_continue < 1.0))
      throw std::invalid_argument("label_run_continue must lie in [0, 1)");
    if (!(blank_run_shape > 0.0)) throw std::invalid_argument("blank_run_shape must be > 0");
    if (!(gap_probability >= 0.0 && gap_probability <= 1.0))
      throw std::invalid_argument("gap_probability must lie in [0, 1]");
    if (!(blank_sharpening > 0.0 && blank_sharpening <= 1.0))
      throw std::invalid_argument("blank_sharpening must lie in (0, 1]");
    if (!(jitter >= 0.0)) throw std::invalid_argument("jitter must be >= 0");
    if (!(frame_shift_s > 0.0)) throw std::invalid_argument("frame_shift_s must be > 0");
  }
};

/// Blank plus "|" (word delimiter), apostrophe and a-z; blank at index 0.
inline Alphabet default_alphabet() {
  Alphabet a;
  a.blank_index = 0;
  a.labels = {"|", "'"};
  for (char c = 'a'; c <= 'z'; ++c) a.labels.emplace_back(1, c);
  return a;
}

/// "the cat" -> t h e | c a t. Characters must be labels of the alphabet.
inline LabelSequence text_to_labels(const std::string &text, const Alphabet &alphabet,
                                    const std::string &word_delimiter = "|") {
  LabelSequence out;
  const auto delim = alphabet.find(word_delimiter);
  std::istringstream words(text);
  std::string w;
  bool first = true;
  while (words >> w) {
    if (!first) {
      if (!delim) throw std::invalid_argument("alphabet lacks the word delimiter");
      out.push_back(*delim);
    }
    first = false;
    for (char c : w) {
      auto k = alphabet.find(std::string(1, c));
      if (!k) throw std::invalid_argument(std::string("character '") + c + "' not in alphabet");
      out.push_back(*k);
    }
  }
  return out;
}

struct SyntheticUtterance {
  EmissionMatrix emission;
  double duration_s = 0.0;
};

namespace internal {

// Per-frame plan: dominant label and how far the frame sits inside a blank
// run (0 for label frames).
struct FramePlan {
  int dominant;
  std::size_t depth;
};

}  // namespace internal

/// Deterministic given (transcript, cfg.seed). All values are on the float32
/// grid so the emission survives a CTCE round trip bit-exactly.
inline SyntheticUtterance generate_emission(std::span<const int> transcript, std::size_t num_labels,
                                            int blank_index, const SynthConfig &cfg) {
  cfg.validate();
  if (num_labels < 2) throw std::invalid_argument("need at least one non-blank label");
  for (int k : transcript)
    if (k < 0 || static_cast<std::size_t>(k) >= num_labels || k == blank_index)
      throw std::invalid_argument("transcript label outside the alphabet");

  std::mt19937_64 rng(cfg.seed);
  std::geometric_distribution<int> label_extra(1.0 - cfg.label_run_continue);
  std::bernoulli_distribution open_gap(cfg.gap_probability);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // expected blank frames and expected number of blank runs -> mean run length
  const std::size_t n = transcript.size();
  std::size_t forced = 0;
  for (std::size_t i = 1; i < n; ++i) forced += transcript[i] == transcript[i - 1];
  const double mean_label_run = 1.0 / (1.0 - cfg.label_run_continue);
  const double label_frames = static_cast<double>(n) * mean_label_run;
  double blank_frames = cfg.blank_fraction / (1.0 - cfg.blank_fraction) * label_frames;
  double runs = n == 0 ? 1.0
                       : 2.0 + static_cast<double>(forced) +
                             cfg.gap_probability * static_cast<double>(n - 1 - forced);
  if (n == 0) blank_frames = 10.0;
  const double extra_mean = std::max(blank_frames / runs - 1.0, 1e-6);
  // std::negative_binomial_distribution takes an integer shape
  const int shape = std::max(1, static_cast<int>(std::lround(cfg.blank_run_shape)));
  std::negative_binomial_distribution<int> blank_extra(
      shape, static_cast<double>(shape) / (static_cast<double>(shape) + extra_mean));
  auto blank_run = [&] { return static_cast<std::size_t>(1 + blank_extra(rng)); };

  // lay out the frames; depth is filled in afterwards
  std::vector<internal::FramePlan> plan;
  auto push_blanks = [&](std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) plan.push_back({blank_index, 1});
  };
  push_blanks(blank_run());
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      const bool repeat = transcript[i] == transcript[i - 1];
      const bool gap = open_gap(rng);
      if (repeat || gap) push_blanks(blank_run());
    }
    const std::size_t len = 1 + static_cast<std::size_t>(label_extra(rng));
    for (std::size_t j = 0; j < len; ++j) plan.push_back({transcript[i], 0});
  }
  if (n > 0) push_blanks(blank_run());

  // depth of a blank frame = distance to the nearest label frame (utterance
  // edges do not count as label frames)
  const std::size_t T = plan.size();
  constexpr std::size_t kFar = std::numeric_limits<std::size_t>::max() / 4;
  std::vector<std::size_t> left(T, kFar), right(T, kFar);
  for (std::size_t t = 0; t < T; ++t) {
    if (plan[t].dominant != blank_index) left[t] = 0;
    else if (t > 0 && left[t - 1] != kFar) left[t] = left[t - 1] + 1;
  }
  for (std::size_t t = T; t-- > 0;) {
    if (plan[t].dominant != blank_index) right[t] = 0;
    else if (t + 1 < T && right[t + 1] != kFar) right[t] = right[t + 1] + 1;
  }
  for (std::size_t t = 0; t < T; ++t)
    if (plan[t].dominant == blank_index)
      plan[t].depth = n == 0 ? T : std::min(left[t], right[t]);

  std::vector<double> data;
  data.reserve(T * num_labels);
  const double others = static_cast<double>(num_labels - 1);
  for (const auto &f : plan) {
    double r = (1.0 - cfg.peak_confidence) * std::exp(cfg.jitter * gauss(rng));
    if (f.depth > 0) r *= std::pow(cfg.blank_sharpening, static_cast<double>(f.depth));
    r = std::clamp(r, 1e-12, 0.45);
    const float dominant = static_cast<float>(std::log1p(-r));
    const float other = static_cast<float>(std::log(r / others));
    for (std::size_t k = 0; k < num_labels; ++k)
      data.push_back(static_cast<int>(k) == f.dominant ? dominant : other);
  }

  SyntheticUtterance out;
  out.emission = EmissionMatrix::from_log_probs(T, num_labels, std::move(data), blank_index);
  out.duration_s = static_cast<double>(T) * cfg.frame_shift_s;
  return out;
}

/// Seed for utterance `index` of a corpus generated with `base`.
inline std::uint64_t derive_seed(std::uint64_t base, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::array<std::uint32_t, 2> words{};
  seq.generate(words.begin(), words.end());
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

/// Writes alphabet.json, one CTCE per transcript and manifest.jsonl into
/// out_dir. Returns the manifest path.
inline std::filesystem::path generate_corpus(std::span<const std::string> transcripts,
                                             const Alphabet &alphabet, const SynthConfig &cfg,
                                             const std::filesystem::path &out_dir) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);
  save_alphabet(alphabet, out_dir / "alphabet.json");

  std::vector<Utterance> utts;
  utts.reserve(transcripts.size());
  for (std::size_t i = 0; i < transcripts.size(); ++i) {
    SynthConfig c = cfg;
    c.seed = derive_seed(cfg.seed, i);
    const auto labels = text_to_labels(transcripts[i], alphabet);
    auto synth = generate_emission(labels, alphabet.size(), alphabet.blank_index, c);

    char id[32];
    std::snprintf(id, sizeof(id), "utt%05zu", i);
    Utterance u;
    u.id = id;
    u.emission_path = out_dir / (u.id + ".ctce");
    u.reference = labels_to_text(labels, alphabet);
    u.duration_s = synth.duration_s;
    save_emission(synth.emission, u.emission_path);
    utts.push_back(std::move(u));
  }
  const auto manifest = out_dir / "manifest.jsonl";
  write_manifest(utts, manifest);
  return manifest;
}

/// Random sentences over a small built-in English vocabulary with Zipf-like
/// word frequencies. Deterministic given seed.
inline std::vector<std::string> random_transcripts(std::size_t count, std::uint64_t seed,
                                                   std::size_t min_words = 4,
                                                   std::size_t max_words = 10) {
  static const std::vector<std::string> kWords = {
      "the",    "of",     "and",   "to",     "a",      "in",     "that",   "is",     "was",
      "he",     "for",    "it",    "with",   "as",     "his",    "on",     "be",     "at",
      "by",     "i",      "this",  "had",    "not",    "are",    "but",    "from",   "or",
      "have",   "an",     "they",  "which",  "one",    "you",    "were",   "her",    "all",
      "she",    "there",  "would", "their",  "we",     "him",    "been",   "has",    "when",
      "who",    "will",   "more",  "no",     "if",     "out",    "so",     "said",   "what",
      "up",     "its",    "about", "into",   "than",   "them",   "can",    "only",   "other",
      "new",    "some",   "could", "time",   "these",  "two",    "may",    "then",   "do",
      "first",  "any",    "my",    "now",    "such",   "like",   "our",    "over",   "man",
      "me",     "even",   "most",  "made",   "after",  "also",   "did",    "many",   "before",
      "must",   "through","back",  "years",  "where",  "much",   "your",   "way",    "well",
      "down",   "should", "because","each",  "just",   "those",  "people", "how",    "too",
      "little", "state",  "good",  "very",   "make",   "world",  "still",  "own",    "see",
      "men",    "work",   "long",  "get",    "here",   "between","both",   "life",   "being",
      "under",  "never",  "day",   "same",   "another","know",   "while",  "last",   "might",
      "us",     "great",  "old",   "year",   "off",    "come",   "since",  "against","go",
      "came",   "right",  "used",  "take",   "three",  "moment", "curiosity","beside","book",
      "door",   "light",  "voice", "hand",   "night",  "room",   "water",  "green",  "sleep",
      "letter", "street", "summer","free",   "small",  "tree",   "apple",  "happy",  "call",
      "all's",  "don't",  "i'll",  "wasn't", "couldn't"};
  std::vector<double> weights(kWords.size());
  for (std::size_t i = 0; i < kWords.size(); ++i) weights[i] = 1.0 / static_cast<double>(i + 2);

  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> word(weights.begin(), weights.end());
  std::uniform_int_distribution<std::size_t> length(min_words, max_words);
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::string s;
    const std::size_t len = length(rng);
    for (std::size_t w = 0; w < len; ++w) {
      if (w) s.push_back(' ');
      s += kWords[word(rng)];
    }
    out.push_back(std::move(s));
  }
  return out;
}

/// Word bigram ARPA text estimated from `sentences` with absolute
/// discounting (D = 0.5) backing off to add-one unigrams. Includes <s>,
/// </s> and <unk>.
inline std::string estimate_word_bigram_arpa(std::span<const std::string> sentences) {
  constexpr double kDiscount = 0.5;
  std::map<std::string, double> uni;
  std::map<std::string, std::map<std::string, double>> bi;
  for (const auto &s : sentences) {
    std::istringstream in(s);
    std::string prev = "<s>", w;
    while (in >> w) {
      uni[w] += 1;
      bi[prev][w] += 1;
      prev = w;
    }
    uni["</s>"] += 1;
    bi[prev]["</s>"] += 1;
  }
  uni.emplace("<unk>", 0.0);

  double total = 0.0;
  for (const auto &[w, c] : uni) total += c;
  const double denom = total + static_cast<double>(uni.size());
  std::map<std::string, double> p_uni;
  for (const auto &[w, c] : uni) p_uni[w] = (c + 1.0) / denom;

  std::map<std::string, double> backoff;
  for (const auto &[h, nexts] : bi) {
    double ch = 0.0, seen_uni = 0.0;
    for (const auto &[w, c] : nexts) {
      ch += c;
      seen_uni += p_uni[w];
    }
    const double left = kDiscount * static_cast<double>(nexts.size()) / ch;
    backoff[h] = left / std::max(1.0 - seen_uni, 1e-12);
  }

  std::size_t bigrams = 0;
  for (const auto &[h, nexts] : bi) bigrams += nexts.size();

  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(6);
  out << "\\data\\\n";
  out << "ngram 1=" << uni.size() + 1 << "\n";
  out << "ngram 2=" << bigrams << "\n\n";
  out << "\\1-grams:\n";
  out << "-99.000000\t<s>";
  if (auto it = backoff.find("<s>"); it != backoff.end()) out << '\t' << std::log10(it->second);
  out << '\n';
  for (const auto &[w, p] : p_uni) {
    out << std::log10(p) << '\t' << w;
    if (auto it = backoff.find(w); it != backoff.end()) out << '\t' << std::log10(it->second);
    out << '\n';
  }
  out << "\n\\2-grams:\n";
  for (const auto &[h, nexts] : bi) {
    double ch = 0.0;
    for (const auto &[w, c] : nexts) ch += c;
    for (const auto &[w, c] : nexts)
      out << std::log10((c - kDiscount) / ch) << '\t' << h << ' ' << w << '\n';
  }
  out << "\n\\end\\\n";
  return out.str();
}

}  // namespace ctc_collapse

#endif  // CTC_COLLAPSE_SYNTH_HPP_
