// include/ctc_collapse/lm_ngram.hpp

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

// Back-off n-gram language model read from ARPA text.
//
// Scores are natural-log throughout; the file's log10 values are converted
// while parsing. Lookup follows the usual back-off rule
//
//   log P(w | h) = log P*(w | h)                     if (h, w) is listed
//                = bow(h) + log P(w | h minus first)  otherwise
//
// with bow(h) = 0 for contexts that are not listed themselves.

#ifndef CTC_COLLAPSE_LM_NGRAM_HPP_
#define CTC_COLLAPSE_LM_NGRAM_HPP_

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <numbers>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace ctc_collapse {

class ArpaError : public std::runtime_error {
 public:
  ArpaError(std::size_t line, const std::string &what)
      : std::runtime_error(line ? "ARPA line " + std::to_string(line) + ": " + what
                                : "ARPA: " + what),
        line_(line) {}
  /// 1-based; 0 when the problem is not tied to one line (e.g. missing \end\).
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Scoring context: the most recent order-1 word ids. Id -1 stands for an
/// out-of-vocabulary word in a model without <unk>.
struct LmState {
  std::vector<int> context;
  friend bool operator==(const LmState &, const LmState &) = default;
};

/// Log-probability assigned to words the model cannot score at all
/// (no <unk> entry): ln(1e-10).
inline const double kOovLogProb = std::log(1e-10);

class ArpaModel {
 public:
  struct Entry {
    double log_prob = 0.0;  // natural log
    double backoff = 0.0;   // natural log
  };

  int order() const { return order_; }
  std::size_t vocabulary_size() const { return words_.size(); }
  const std::vector<std::string> &words() const { return words_; }
  std::size_t num_entries(int n) const {
    return n >= 1 && n <= order_ ? counts_[static_cast<std::size_t>(n - 1)] : 0;
  }

  /// Word id, falling back to <unk> and then to -1.
  int word_id(std::string_view word) const {
    auto it = vocab_.find(std::string(word));
    if (it != vocab_.end()) return it->second;
    return unk_id_;
  }
  bool has_word(std::string_view word) const { return vocab_.count(std::string(word)) > 0; }
  bool has_sentence_end() const { return eos_id_ >= 0; }

  /// Listed entry for a word-id sequence, if any.
  const Entry *find(std::span<const int> ngram) const {
    auto it = entries_.find(key_of(ngram));
    return it == entries_.end() ? nullptr : &it->second;
  }

  /// State at the start of a sentence: "<s>" when the model has it.
  LmState initial_state() const {
    LmState s;
    if (bos_id_ >= 0 && order_ > 1) s.context.push_back(bos_id_);
    return s;
  }

  /// log P(word | state) and the state after consuming `word`.
  std::pair<double, LmState> score_token(const LmState &state, std::string_view word) const {
    const int id = word_id(word);
    return {conditional(state.context, id), advance(state, id)};
  }

  /// log P(</s> | state); 0 when the model has no sentence-end entry.
  double score_sentence_end(const LmState &state) const {
    if (eos_id_ < 0) return 0.0;
    return conditional(state.context, eos_id_);
  }

  /// Back-off conditional log-probability of word id `w` after `context`.
  double conditional(std::span<const int> context, int w) const {
    if (w < 0) return kOovLogProb;
    std::size_t n = std::min(context.size(), static_cast<std::size_t>(order_ - 1));
    std::vector<int> key;
    key.reserve(n + 1);
    double backoff = 0.0;
    for (;; --n) {
      auto ctx = context.subspan(context.size() - n);
      key.assign(ctx.begin(), ctx.end());
      key.push_back(w);
      if (const Entry *e = find(key)) return backoff + e->log_prob;
      if (n == 0) break;
      if (const Entry *h = find(ctx)) backoff += h->backoff;
    }
    // only reachable for ids without a unigram, which the parser never creates
    return kOovLogProb;
  }

  LmState advance(const LmState &state, int w) const {
    LmState next = state;
    next.context.push_back(w);
    const std::size_t keep = static_cast<std::size_t>(std::max(order_ - 1, 0));
    if (next.context.size() > keep)
      next.context.erase(next.context.begin(),
                         next.context.begin() + static_cast<std::ptrdiff_t>(next.context.size() - keep));
    return next;
  }

  /// Parses ARPA text. Throws ArpaError naming the offending line.
  static ArpaModel parse(std::istream &in);

 private:
  static std::string key_of(std::span<const int> ids) {
    std::string k(ids.size() * sizeof(int), '\0');
    std::memcpy(k.data(), ids.data(), k.size());
    return k;
  }

  int intern(const std::string &w) {
    auto [it, inserted] = vocab_.emplace(w, static_cast<int>(words_.size()));
    if (inserted) words_.push_back(w);
    return it->second;
  }

  int order_ = 0;
  std::vector<std::size_t> counts_;
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> vocab_;
  std::unordered_map<std::string, Entry> entries_;
  int unk_id_ = -1;
  int bos_id_ = -1;
  int eos_id_ = -1;
};

namespace internal {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline bool parse_double(std::string_view s, double &out) {
  // from_chars for double is available in libstdc++ 11
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace internal

inline ArpaModel ArpaModel::parse(std::istream &in) {
  using internal::trim;
  constexpr double kLn10 = std::numbers::ln10;

  ArpaModel m;
  enum class Section { kPreamble, kData, kNgrams, kEnd } section = Section::kPreamble;
  std::vector<std::size_t> declared;
  std::vector<std::size_t> seen;
  int current = 0;
  std::vector<std::size_t> entry_line;  // parallel to insertion for prefix check
  std::vector<std::vector<int>> entry_ids;

  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view text = trim(raw);
    if (text.empty()) continue;

    if (text == "\\data\\") {
      if (section != Section::kPreamble) throw ArpaError(line, "duplicate \\data\\");
      section = Section::kData;
      continue;
    }
    if (section == Section::kPreamble) continue;  // free text before \data\ is allowed
    if (section == Section::kEnd) throw ArpaError(line, "content after \\end\\");

    if (text == "\\end\\") {
      section = Section::kEnd;
      continue;
    }
    if (text.front() == '\\') {
      // \N-grams:
      int n = 0;
      auto suffix = text.find("-grams:");
      if (suffix == std::string_view::npos ||
          std::from_chars(text.data() + 1, text.data() + suffix, n).ec != std::errc() || n < 1 ||
          n > static_cast<int>(declared.size()))
        throw ArpaError(line, "unexpected section header '" + std::string(text) + "'");
      if (n != current + 1) throw ArpaError(line, "n-gram sections out of order");
      current = n;
      section = Section::kNgrams;
      continue;
    }

    if (section == Section::kData) {
      // ngram N=C
      auto eq = text.find('=');
      if (text.rfind("ngram", 0) != 0 || eq == std::string_view::npos)
        throw ArpaError(line, "expected 'ngram N=count'");
      auto lhs = trim(text.substr(5, eq - 5));
      auto rhs = trim(text.substr(eq + 1));
      int n = 0;
      std::size_t c = 0;
      if (std::from_chars(lhs.data(), lhs.data() + lhs.size(), n).ec != std::errc() ||
          std::from_chars(rhs.data(), rhs.data() + rhs.size(), c).ec != std::errc() ||
          n != static_cast<int>(declared.size()) + 1)
        throw ArpaError(line, "bad count line '" + std::string(text) + "'");
      declared.push_back(c);
      continue;
    }

    // n-gram entry: log10p w1 .. wn [log10bow]
    auto fields = internal::split_ws(text);
    const auto n = static_cast<std::size_t>(current);
    if (fields.size() != n + 1 && fields.size() != n + 2)
      throw ArpaError(line, "expected " + std::to_string(n) + " words");
    Entry e;
    double lp = 0.0, bow = 0.0;
    if (!internal::parse_double(fields[0], lp)) throw ArpaError(line, "bad log-probability");
    if (fields.size() == n + 2 && !internal::parse_double(fields[n + 1], bow))
      throw ArpaError(line, "bad back-off weight");
    if (lp > 0.0) throw ArpaError(line, "positive log-probability");
    e.log_prob = lp * kLn10;
    e.backoff = bow * kLn10;

    std::vector<int> ids;
    ids.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) {
      std::string w(fields[i]);
      if (n == 1) {
        ids.push_back(m.intern(w));
      } else {
        auto it = m.vocab_.find(w);
        if (it == m.vocab_.end()) throw ArpaError(line, "word '" + w + "' has no unigram");
        ids.push_back(it->second);
      }
    }
    if (!m.entries_.emplace(key_of(ids), e).second)
      throw ArpaError(line, "duplicate n-gram");
    if (n > 1) {
      entry_line.push_back(line);
      entry_ids.push_back(std::move(ids));
    }
    if (seen.size() < n) seen.resize(n, 0);
    ++seen[n - 1];
  }

  if (section != Section::kEnd) throw ArpaError(0, "missing \\end\\");
  if (declared.empty()) throw ArpaError(0, "no n-gram counts in \\data\\");
  seen.resize(declared.size(), 0);
  for (std::size_t i = 0; i < declared.size(); ++i)
    if (seen[i] != declared[i])
      throw ArpaError(0, std::to_string(i + 1) + "-gram count " + std::to_string(seen[i]) +
                             " does not match header " + std::to_string(declared[i]));
  for (std::size_t i = 0; i < entry_ids.size(); ++i) {
    std::span<const int> prefix(entry_ids[i].data(), entry_ids[i].size() - 1);
    if (!m.find(prefix)) throw ArpaError(entry_line[i], "n-gram prefix is not listed");
  }

  m.order_ = static_cast<int>(declared.size());
  m.counts_ = declared;
  if (auto it = m.vocab_.find("<unk>"); it != m.vocab_.end()) m.unk_id_ = it->second;
  if (auto it = m.vocab_.find("<s>"); it != m.vocab_.end()) m.bos_id_ = it->second;
  if (auto it = m.vocab_.find("</s>"); it != m.vocab_.end()) m.eos_id_ = it->second;
  return m;
}

inline ArpaModel parse_arpa(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw ArpaError(0, "cannot open " + path.string());
  return ArpaModel::parse(in);
}

inline ArpaModel parse_arpa_string(const std::string &text) {
  std::istringstream in(text);
  return ArpaModel::parse(in);
}

}  // namespace ctc_collapse

#endif  // CTC_COLLAPSE_LM_NGRAM_HPP_
