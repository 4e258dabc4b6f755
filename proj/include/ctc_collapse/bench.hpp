// include/ctc_collapse/bench.hpp

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

// Measurement harness: WER, real-time factor, collapsible-frame fractions,
// run-length histograms and paired collapse-vs-baseline experiments.

#ifndef CTC_COLLAPSE_BENCH_HPP_
#define CTC_COLLAPSE_BENCH_HPP_

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "ctc_collapse/beam_search.hpp"
#include "ctc_collapse/collapse.hpp"
#include "ctc_collapse/emissions.hpp"
#include "ctc_collapse/greedy.hpp"
#include "ctc_collapse/lm_ngram.hpp"

namespace ctc_collapse {

// ---------------------------------------------------------------------------
// Metrics

struct WordErrors {
  std::size_t errors = 0;
  std::size_t words = 0;  // reference length; 0 flags an empty reference

  double percent() const {
    if (words == 0) return errors == 0 ? 0.0 : std::numeric_limits<double>::infinity();
    return 100.0 * static_cast<double>(errors) / static_cast<double>(words);
  }
};

inline std::vector<std::string> split_words(const std::string &s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(std::move(w));
  return out;
}

/// Word-level Levenshtein distance (unit substitution/insertion/deletion).
inline WordErrors wer(const std::string &hypothesis, const std::string &reference) {
  const auto hyp = split_words(hypothesis);
  const auto ref = split_words(reference);
  std::vector<std::size_t> prev(hyp.size() + 1), cur(hyp.size() + 1);
  for (std::size_t j = 0; j <= hyp.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= hyp.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return {prev[hyp.size()], ref.size()};
}

/// decode_time_s / audio_s.
inline double measure_rtf(double decode_time_s, double audio_s) {
  if (!(audio_s > 0.0)) throw std::invalid_argument("audio duration must be positive");
  return decode_time_s / audio_s;
}

/// 100 * (1 - after / before).
inline double reduction_percent(double before, double after) {
  if (!(before > 0.0)) return 0.0;
  return 100.0 * (1.0 - after / before);
}

/// Share of frames that blank collapse would drop, in percent.
inline double collapsible_fraction(const EmissionMatrix &m, const CollapseMode &mode) {
  if (m.empty()) throw std::invalid_argument("collapsible fraction of an empty emission");
  const auto kept = blank_collapse(m, mode).kept_indices.size();
  return 100.0 * static_cast<double>(m.num_frames() - kept) / static_cast<double>(m.num_frames());
}

/// Run-length counts over the per-frame argmax sequence. A blank run is a
/// maximal stretch of blank-argmax frames; a non-blank run is a maximal
/// stretch of one non-blank label, so "ab" gives two runs of length 1.
struct RunLengthHistogram {
  std::map<std::size_t, std::size_t> blank;
  std::map<std::size_t, std::size_t> non_blank;

  void add(const EmissionMatrix &m) {
    std::vector<int> path(m.num_frames());
    for (std::size_t t = 0; t < path.size(); ++t) path[t] = argmax_label(m.row(t));
    const auto rle = run_length_encode(path);
    for (std::size_t i = 0; i < rle.values.size(); ++i)
      ++(rle.values[i] == m.blank() ? blank : non_blank)[rle.counts[i]];
  }

  bool empty() const { return blank.empty() && non_blank.empty(); }

  /// "run_length,blank,non_blank" rows for every length seen.
  std::string to_csv() const {
    std::map<std::size_t, std::pair<std::size_t, std::size_t>> rows;
    for (auto [len, n] : blank) rows[len].first = n;
    for (auto [len, n] : non_blank) rows[len].second = n;
    std::string out = "run_length,blank,non_blank\n";
    for (auto [len, c] : rows)
      out += std::to_string(len) + ',' + std::to_string(c.first) + ',' + std::to_string(c.second) + '\n';
    return out;
  }
};

// ---------------------------------------------------------------------------
// Corpus

struct LoadedUtterance {
  Utterance meta;
  EmissionMatrix emission;
};

/// Reads the manifest and every emission it references.
inline std::vector<LoadedUtterance> load_corpus(const std::filesystem::path &manifest,
                                                int blank_index) {
  std::vector<LoadedUtterance> out;
  for (auto &u : read_manifest(manifest)) {
    auto m = load_emission(u.emission_path, blank_index);
    out.push_back({std::move(u), std::move(m)});
  }
  return out;
}

struct CollapsibleRow {
  CollapseMode mode;
  double percent;  // over all frames of the corpus
};

/// Corpus-level collapsible-frame percentages, one per mode.
inline std::vector<CollapsibleRow> collapsible_table(std::span<const LoadedUtterance> corpus,
                                                     std::span<const CollapseMode> modes) {
  std::vector<CollapsibleRow> rows;
  for (const auto &mode : modes) {
    std::size_t total = 0, dropped = 0;
    for (const auto &u : corpus) {
      total += u.emission.num_frames();
      dropped += u.emission.num_frames() - blank_collapse(u.emission, mode).kept_indices.size();
    }
    rows.push_back({mode, total ? 100.0 * static_cast<double>(dropped) / static_cast<double>(total) : 0.0});
  }
  return rows;
}

inline RunLengthHistogram run_length_histogram(std::span<const LoadedUtterance> corpus) {
  RunLengthHistogram h;
  for (const auto &u : corpus) h.add(u.emission);
  return h;
}

// ---------------------------------------------------------------------------
// Experiments

enum class TimingMode {
  kRepeatable,  // one worker thread
  kFast,        // utterances spread over all hardware threads
};

struct ExperimentOptions {
  TimingMode timing = TimingMode::kRepeatable;
  std::size_t reps = 3;      // per-utterance timing repetitions; the median is kept
  std::size_t threads = 0;   // kFast only; 0 = hardware concurrency
  std::string word_delimiter = "|";
};

struct BenchRow {
  DecoderConfig config;
  double wer_pct = 0.0;
  double rtf = 0.0;
  double frame_reduction_pct = 0.0;
  double time_reduction_pct = 0.0;
  std::size_t utterances = 0;
  // not part of the CSV schema
  std::size_t errors = 0;
  std::size_t words = 0;
  std::size_t frames = 0;           // rows decoded after collapse
  double decode_time_s = 0.0;       // sum of per-utterance medians
  double audio_s = 0.0;
  double baseline_match_pct = 100;  // utterances whose output equals the paired baseline
  std::vector<std::string> hypotheses;
};

struct BenchReport {
  std::vector<BenchRow> rows;
};

namespace internal {

// Rows are paired with the collapse-free run sharing every other knob.
inline auto pairing_key(const DecoderConfig &c) {
  return std::make_tuple(c.beam_size, c.beam_threshold, c.lm_weight, c.length_penalty,
                         static_cast<int>(c.lm_unit), c.word_delimiter);
}

inline BenchRow run_config(std::span<const LoadedUtterance> corpus, const DecoderConfig &cfg,
                           const ArpaModel *lm, const Alphabet &alphabet,
                           const ExperimentOptions &opt) {
  struct Result {
    std::string text;
    std::size_t frames;
    double seconds;
  };
  std::vector<Result> results(corpus.size());
  const std::size_t reps = std::max<std::size_t>(1, opt.reps);

  auto work = [&](std::size_t i) {
    const auto &u = corpus[i];
    std::vector<double> times;
    DecodeResult r;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const auto start = std::chrono::steady_clock::now();
      r = decode(u.emission, cfg, lm, &alphabet);
      const auto stop = std::chrono::steady_clock::now();
      times.push_back(std::chrono::duration<double>(stop - start).count());
    }
    std::nth_element(times.begin(), times.begin() + static_cast<std::ptrdiff_t>(times.size() / 2),
                     times.end());
    results[i] = {labels_to_text(r.labels, alphabet, opt.word_delimiter), r.frames_decoded,
                  times[times.size() / 2]};
  };

  std::size_t threads = 1;
  if (opt.timing == TimingMode::kFast)
    threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  if (threads <= 1 || corpus.size() < 2) {
    for (std::size_t i = 0; i < corpus.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mu;
    for (std::size_t w = 0; w < threads; ++w)
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < corpus.size();) {
          try {
            work(i);
          } catch (...) {
            std::lock_guard lock(failure_mu);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    for (auto &t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  BenchRow row;
  row.config = cfg;
  row.utterances = corpus.size();
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto e = wer(results[i].text, corpus[i].meta.reference);
    row.errors += e.errors;
    row.words += e.words;
    row.frames += results[i].frames;
    row.decode_time_s += results[i].seconds;
    row.audio_s += corpus[i].meta.duration_s;
    row.hypotheses.push_back(std::move(results[i].text));
  }
  row.wer_pct = WordErrors{row.errors, row.words}.percent();
  row.rtf = row.audio_s > 0.0 ? measure_rtf(row.decode_time_s, row.audio_s) : 0.0;
  return row;
}

}  // namespace internal

/// Decodes the corpus once per grid entry. A collapse-free baseline is added
/// for every distinct (beam, threshold, LM) setting that lacks one; frame and
/// time reductions of each row are relative to its baseline.
inline BenchReport run_experiment(std::span<const LoadedUtterance> corpus,
                                  std::span<const DecoderConfig> grid, const ArpaModel *lm,
                                  const Alphabet &alphabet, const ExperimentOptions &opt = {}) {
  if (grid.empty()) throw std::invalid_argument("empty configuration grid");

  std::vector<DecoderConfig> configs;
  for (const auto &c : grid) {
    const bool has_baseline = std::any_of(configs.begin(), configs.end(), [&](const DecoderConfig &o) {
      return o.collapse.kind == CollapseMode::Kind::kNone &&
             internal::pairing_key(o) == internal::pairing_key(c);
    });
    if (!has_baseline && c.collapse.kind != CollapseMode::Kind::kNone) {
      DecoderConfig base = c;
      base.collapse = CollapseMode::none();
      configs.push_back(base);
    }
    const bool duplicate = std::any_of(configs.begin(), configs.end(), [&](const DecoderConfig &o) {
      return internal::pairing_key(o) == internal::pairing_key(c) && o.collapse == c.collapse;
    });
    if (!duplicate) configs.push_back(c);
  }

  BenchReport report;
  for (const auto &c : configs) report.rows.push_back(internal::run_config(corpus, c, lm, alphabet, opt));

  std::size_t original_frames = 0;
  for (const auto &u : corpus) original_frames += u.emission.num_frames();
  for (auto &row : report.rows) {
    const BenchRow *base = nullptr;
    for (const auto &b : report.rows)
      if (b.config.collapse.kind == CollapseMode::Kind::kNone &&
          internal::pairing_key(b.config) == internal::pairing_key(row.config))
        base = &b;
    row.frame_reduction_pct = reduction_percent(static_cast<double>(original_frames),
                                                static_cast<double>(row.frames));
    row.time_reduction_pct = reduction_percent(base->decode_time_s, row.decode_time_s);
    std::size_t same = 0;
    for (std::size_t i = 0; i < row.hypotheses.size(); ++i) same += row.hypotheses[i] == base->hypotheses[i];
    row.baseline_match_pct =
        row.hypotheses.empty() ? 100.0 : 100.0 * static_cast<double>(same) / static_cast<double>(row.hypotheses.size());
  }
  return report;
}

// ---------------------------------------------------------------------------
// Report files

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char *kReportCsvHeader =
    "collapse_mode,theta,gamma,beam_size,wer_pct,rtf,frame_reduction_pct,time_reduction_pct,utterances";

namespace internal {

inline std::string fmt(const char *spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

inline double theta_of(const CollapseMode &m) {
  return m.kind == CollapseMode::Kind::kStrong ? m.theta : 0.0;
}

}  // namespace internal

/// Versioned CSV: a "# schema=N" line, the header, one row per config.
inline std::string report_csv(const BenchReport &report) {
  std::string out = "# schema=" + std::to_string(kReportSchemaVersion) + "\n";
  out += kReportCsvHeader;
  out += '\n';
  for (const auto &r : report.rows) {
    out += r.config.collapse.name() + ',' + internal::fmt("%.6g", internal::theta_of(r.config.collapse)) +
           ',' + internal::fmt("%.6g", r.config.beam_threshold) + ',' + std::to_string(r.config.beam_size) +
           ',' + internal::fmt("%.4f", r.wer_pct) + ',' + internal::fmt("%.6f", r.rtf) + ',' +
           internal::fmt("%.4f", r.frame_reduction_pct) + ',' + internal::fmt("%.4f", r.time_reduction_pct) +
           ',' + std::to_string(r.utterances) + '\n';
  }
  return out;
}

inline nlohmann::json report_json(const BenchReport &report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto &r : report.rows) {
    rows.push_back({{"collapse_mode", r.config.collapse.name()},
                    {"theta", internal::theta_of(r.config.collapse)},
                    {"gamma", r.config.beam_threshold},
                    {"beam_size", r.config.beam_size},
                    {"lm_weight", r.config.lm_weight},
                    {"length_penalty", r.config.length_penalty},
                    {"wer_pct", r.wer_pct},
                    {"errors", r.errors},
                    {"words", r.words},
                    {"rtf", r.rtf},
                    {"decode_time_s", r.decode_time_s},
                    {"audio_s", r.audio_s},
                    {"frames", r.frames},
                    {"frame_reduction_pct", r.frame_reduction_pct},
                    {"time_reduction_pct", r.time_reduction_pct},
                    {"baseline_match_pct", r.baseline_match_pct},
                    {"utterances", r.utterances}});
  }
  return {{"schema", kReportSchemaVersion}, {"rows", rows}};
}

/// report.csv, report.json and hypotheses.csv (row, utterance id, text).
inline void write_report(const BenchReport &report, std::span<const LoadedUtterance> corpus,
                         const std::filesystem::path &out_dir) {
  std::filesystem::create_directories(out_dir);
  auto write = [](const std::filesystem::path &p, const std::string &text) {
    std::ofstream out(p, std::ios::trunc);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + p.string());
  };
  write(out_dir / "report.csv", report_csv(report));
  write(out_dir / "report.json", report_json(report).dump(2) + "\n");
  std::string hyps = "row,id,hypothesis\n";
  for (std::size_t r = 0; r < report.rows.size(); ++r)
    for (std::size_t i = 0; i < report.rows[r].hypotheses.size(); ++i)
      hyps += std::to_string(r) + ',' + corpus[i].meta.id + ',' + report.rows[r].hypotheses[i] + '\n';
  write(out_dir / "hypotheses.csv", hyps);
}

}  // namespace ctc_collapse

#endif  // CTC_COLLAPSE_BENCH_HPP_
