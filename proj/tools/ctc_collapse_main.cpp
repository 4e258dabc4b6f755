// tools/ctc_collapse_main.cpp

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

// ctc-collapse: synth | decode | bench | stats

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ctc_collapse/ctc_collapse.hpp"

namespace fs = std::filesystem;
using namespace ctc_collapse;

namespace {

struct DecodeFlags {
  std::string collapse = "none";
  double theta = 0.999;
  double gamma = 50.0;
  std::size_t beam_size = 1500;
  double lm_weight = 1.57;
  double length_penalty = -0.64;
  std::string lm_unit = "word";
  std::string word_delimiter = "|";
};

void add_decode_flags(CLI::App *cmd, DecodeFlags &f, bool lists) {
  cmd->add_option("--beam-size", f.beam_size, "Maximum live prefixes")->capture_default_str();
  cmd->add_option("--lm-weight", f.lm_weight, "LM weight")->capture_default_str();
  cmd->add_option("--length-penalty", f.length_penalty, "Score added per LM token")
      ->capture_default_str();
  cmd->add_option("--lm-unit", f.lm_unit, "LM token unit")
      ->check(CLI::IsMember({"word", "char"}))
      ->capture_default_str();
  cmd->add_option("--word-delimiter", f.word_delimiter, "Label that separates words")
      ->capture_default_str();
  if (!lists) {
    cmd->add_option("--collapse", f.collapse, "Blank collapse mode")
        ->check(CLI::IsMember({"none", "weak", "strong"}))
        ->capture_default_str();
    cmd->add_option("--theta", f.theta, "Blank threshold for strong collapse")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd->add_option("--gamma", f.gamma, "Beam threshold (log-domain margin)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
  }
}

DecoderConfig make_config(const DecodeFlags &f, const std::string &collapse, double theta,
                          double gamma) {
  DecoderConfig c;
  c.beam_size = f.beam_size;
  c.beam_threshold = gamma;
  c.lm_weight = f.lm_weight;
  c.length_penalty = f.length_penalty;
  c.lm_unit = f.lm_unit == "char" ? LmUnit::kChar : LmUnit::kWord;
  c.word_delimiter = f.word_delimiter;
  if (collapse == "weak") c.collapse = CollapseMode::weak();
  else if (collapse == "strong") c.collapse = CollapseMode::strong(theta);
  c.validate();
  return c;
}

std::optional<ArpaModel> maybe_lm(const std::string &path) {
  if (path.empty()) return std::nullopt;
  return parse_arpa(path);
}

Alphabet alphabet_for(const std::string &flag, const fs::path &beside) {
  fs::path p = flag.empty() ? beside / "alphabet.json" : fs::path(flag);
  if (!flag.empty() || fs::exists(p)) return load_alphabet(p);
  return default_alphabet();
}

void write_text(const fs::path &p, const std::string &text) {
  std::ofstream out(p, std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

// --- synth -----------------------------------------------------------------

struct SynthFlags {
  std::string out;
  std::size_t count = 100;
  std::string transcripts;
  std::uint64_t transcript_seed = 7;
  SynthConfig cfg;
  bool write_lm = false;
};

int run_synth(const SynthFlags &f) {
  std::vector<std::string> texts;
  if (!f.transcripts.empty()) {
    std::ifstream in(f.transcripts);
    if (!in) throw std::runtime_error("cannot open " + f.transcripts);
    for (std::string line; std::getline(in, line);)
      if (line.find_first_not_of(" \t\r") != std::string::npos) texts.push_back(line);
  } else {
    texts = random_transcripts(f.count, f.transcript_seed);
  }
  const auto manifest = generate_corpus(texts, default_alphabet(), f.cfg, f.out);
  if (f.write_lm) write_text(fs::path(f.out) / "lm.arpa", estimate_word_bigram_arpa(texts));
  std::cout << "wrote " << texts.size() << " utterances to " << manifest.string() << "\n";
  return 0;
}

// --- decode ----------------------------------------------------------------

struct DecodeCmdFlags {
  std::string emission;
  std::string alphabet;
  std::string lm;
  DecodeFlags d;
};

int run_decode(const DecodeCmdFlags &f) {
  const Alphabet alphabet = alphabet_for(f.alphabet, fs::path(f.emission).parent_path());
  const EmissionMatrix m = load_emission(f.emission, alphabet.blank_index);
  if (m.num_labels() != alphabet.size() && !m.empty())
    throw std::runtime_error("emission has " + std::to_string(m.num_labels()) +
                             " labels, alphabet " + std::to_string(alphabet.size()));
  const auto lm = maybe_lm(f.lm);
  const auto cfg = make_config(f.d, f.d.collapse, f.d.theta, f.d.gamma);
  const auto r = decode(m, cfg, lm ? &*lm : nullptr, &alphabet);

  std::cout << "sequence: " << labels_to_text(r.labels, alphabet, cfg.word_delimiter) << "\n";
  std::cout << "labels:";
  for (int k : r.labels) std::cout << ' ' << alphabet.label(k);
  std::cout << "\nalignment:";
  for (auto t : r.alignment) std::cout << ' ' << t + 1;  // 1-based frames
  std::cout << "\nscore: " << r.score << "\n";
  std::cout << "frames: " << m.num_frames() << " -> " << r.frames_decoded << "\n";
  return 0;
}

// --- bench -----------------------------------------------------------------

struct BenchFlags {
  std::string manifest;
  std::string alphabet;
  std::string lm;
  std::vector<std::string> collapse{"none"};
  std::vector<double> theta{0.999};
  std::vector<double> gamma{50.0};
  std::string out;
  std::string timing = "repeatable";
  std::size_t reps = 3;
  std::size_t threads = 0;
  DecodeFlags d;
};

int run_bench(const BenchFlags &f) {
  const Alphabet alphabet = alphabet_for(f.alphabet, fs::path(f.manifest).parent_path());
  const auto corpus = load_corpus(f.manifest, alphabet.blank_index);
  const auto lm = maybe_lm(f.lm);

  std::vector<DecoderConfig> grid;
  for (double g : f.gamma)
    for (const auto &mode : f.collapse) {
      if (mode == "strong")
        for (double th : f.theta) grid.push_back(make_config(f.d, mode, th, g));
      else
        grid.push_back(make_config(f.d, mode, 0.0, g));
    }

  ExperimentOptions opt;
  opt.timing = f.timing == "fast" ? TimingMode::kFast : TimingMode::kRepeatable;
  opt.reps = f.reps;
  opt.threads = f.threads;
  opt.word_delimiter = f.d.word_delimiter;
  const auto report = run_experiment(corpus, grid, lm ? &*lm : nullptr, alphabet, opt);
  write_report(report, corpus, f.out);
  std::cout << report_csv(report);
  return 0;
}

// --- stats -----------------------------------------------------------------

struct StatsFlags {
  std::string manifest;
  std::string alphabet;
  std::vector<double> theta{0.999, 0.99, 0.9};
  std::string out;
};

int run_stats(const StatsFlags &f) {
  const Alphabet alphabet = alphabet_for(f.alphabet, fs::path(f.manifest).parent_path());
  const auto corpus = load_corpus(f.manifest, alphabet.blank_index);

  std::vector<CollapseMode> modes;
  for (double th : f.theta) modes.push_back(CollapseMode::strong(th));
  modes.push_back(CollapseMode::weak());
  std::string table = "mode,theta,collapsible_pct\n";
  for (const auto &row : collapsible_table(corpus, modes)) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%s,%.6g,%.4f\n", row.mode.name().c_str(),
                  row.mode.kind == CollapseMode::Kind::kStrong ? row.mode.theta : 0.0, row.percent);
    table += buf;
  }
  const std::string hist = run_length_histogram(corpus).to_csv();

  if (!f.out.empty()) {
    fs::create_directories(f.out);
    write_text(fs::path(f.out) / "collapsible.csv", table);
    write_text(fs::path(f.out) / "run_lengths.csv", hist);
  }
  std::cout << table << "\n" << hist;
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"CTC decoding with blank collapse: synthesis, decoding and benchmarks"};
  app.require_subcommand(1);

  SynthFlags synth;
  auto *synth_cmd = app.add_subcommand("synth", "Generate a synthetic emission corpus");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--count", synth.count, "Random transcripts to generate")->capture_default_str();
  synth_cmd->add_option("--transcripts", synth.transcripts, "Text file, one transcript per line");
  synth_cmd->add_option("--transcript-seed", synth.transcript_seed, "Seed for random transcripts")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth.cfg.seed, "Emission seed")->capture_default_str();
  synth_cmd->add_option("--blank-fraction", synth.cfg.blank_fraction)->capture_default_str();
  synth_cmd->add_option("--peak-confidence", synth.cfg.peak_confidence)->capture_default_str();
  synth_cmd->add_option("--label-run-continue", synth.cfg.label_run_continue)->capture_default_str();
  synth_cmd->add_option("--blank-run-shape", synth.cfg.blank_run_shape)->capture_default_str();
  synth_cmd->add_option("--gap-probability", synth.cfg.gap_probability)->capture_default_str();
  synth_cmd->add_option("--blank-sharpening", synth.cfg.blank_sharpening)->capture_default_str();
  synth_cmd->add_option("--jitter", synth.cfg.jitter)->capture_default_str();
  synth_cmd->add_option("--frame-shift", synth.cfg.frame_shift_s, "Seconds per frame")
      ->capture_default_str();
  synth_cmd->add_flag("--write-lm", synth.write_lm, "Also write a word bigram lm.arpa");

  DecodeCmdFlags dec;
  auto *decode_cmd = app.add_subcommand("decode", "Decode one CTCE emission");
  decode_cmd->add_option("--emission", dec.emission, "CTCE file")->required()->check(CLI::ExistingFile);
  decode_cmd->add_option("--alphabet", dec.alphabet, "Alphabet JSON (default: alphabet.json beside the emission)");
  decode_cmd->add_option("--lm", dec.lm, "ARPA language model")->check(CLI::ExistingFile);
  add_decode_flags(decode_cmd, dec.d, false);

  BenchFlags bench;
  auto *bench_cmd = app.add_subcommand("bench", "Decode a corpus under a configuration grid");
  bench_cmd->add_option("--manifest", bench.manifest, "JSON-lines manifest")->required()->check(CLI::ExistingFile);
  bench_cmd->add_option("--alphabet", bench.alphabet, "Alphabet JSON (default: alphabet.json beside the manifest)");
  bench_cmd->add_option("--lm", bench.lm, "ARPA language model")->check(CLI::ExistingFile);
  bench_cmd->add_option("--collapse", bench.collapse, "Collapse modes: none, weak, strong")
      ->delimiter(',')
      ->check(CLI::IsMember({"none", "weak", "strong"}))
      ->capture_default_str();
  bench_cmd->add_option("--theta", bench.theta, "Blank thresholds for strong collapse")
      ->delimiter(',')
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  bench_cmd->add_option("--gamma", bench.gamma, "Beam thresholds")
      ->delimiter(',')
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  bench_cmd->add_option("--out", bench.out, "Report directory")->required();
  bench_cmd->add_option("--timing", bench.timing, "repeatable: single thread; fast: all cores")
      ->check(CLI::IsMember({"repeatable", "fast"}))
      ->capture_default_str();
  bench_cmd->add_option("--reps", bench.reps, "Timing repetitions per utterance (median kept)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench_cmd->add_option("--threads", bench.threads, "Workers for --timing fast (0 = all cores)");
  add_decode_flags(bench_cmd, bench.d, true);

  StatsFlags stats;
  auto *stats_cmd = app.add_subcommand("stats", "Collapsible-frame fractions and run-length histogram");
  stats_cmd->add_option("--manifest", stats.manifest, "JSON-lines manifest")->required()->check(CLI::ExistingFile);
  stats_cmd->add_option("--alphabet", stats.alphabet, "Alphabet JSON (default: alphabet.json beside the manifest)");
  stats_cmd->add_option("--theta", stats.theta, "Blank thresholds")
      ->delimiter(',')
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  stats_cmd->add_option("--out", stats.out, "Directory for collapsible.csv and run_lengths.csv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth_cmd) return run_synth(synth);
    if (*decode_cmd) return run_decode(dec);
    if (*bench_cmd) return run_bench(bench);
    if (*stats_cmd) return run_stats(stats);
  } catch (const std::exception &e) {
    std::cerr << "ctc-collapse: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
