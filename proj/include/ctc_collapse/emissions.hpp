// include/ctc_collapse/emissions.hpp

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

// Emission data model: the extended label set, the per-frame log-probability
// matrix, the CTCE binary container and JSON-lines corpus manifests.

#ifndef CTC_COLLAPSE_EMISSIONS_HPP_
#define CTC_COLLAPSE_EMISSIONS_HPP_

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"

namespace ctc_collapse {

/// Thrown by emission/alphabet loading and validation. kind() tells the
/// failure classes apart so callers (and tests) do not have to parse text.
class EmissionError : public std::runtime_error {
 public:
  enum class Kind {
    kIo,
    kMalformedHeader,
    kDimensionMismatch,
    kNormalization,
    kInvalidValue,
    kInvalidAlphabet,
  };

  EmissionError(Kind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Extended label set L' = L + {blank}. Indices used everywhere else in the
/// toolkit are positions in L' (size() entries); the blank sits at
/// blank_index and the non-blank labels fill the remaining slots in order.
struct Alphabet {
  std::vector<std::string> labels;
  int blank_index = 0;

  std::size_t size() const { return labels.size() + 1; }

  /// Extended index -> label text. The blank maps to "<blank>".
  const std::string &label(int k) const {
    static const std::string kBlank = "<blank>";
    if (k == blank_index) return kBlank;
    return labels.at(static_cast<std::size_t>(k < blank_index ? k : k - 1));
  }

  /// Label text -> extended index.
  std::optional<int> find(const std::string &text) const {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == text) {
        int k = static_cast<int>(i);
        return k < blank_index ? k : k + 1;
      }
    }
    return std::nullopt;
  }

  void validate() const {
    if (blank_index < 0 || static_cast<std::size_t>(blank_index) > labels.size())
      throw EmissionError(EmissionError::Kind::kInvalidAlphabet,
                          "blank_index " + std::to_string(blank_index) +
                              " outside [0, " + std::to_string(labels.size()) + "]");
    std::unordered_set<std::string> seen;
    for (const auto &l : labels) {
      if (l.empty())
        throw EmissionError(EmissionError::Kind::kInvalidAlphabet, "empty label");
      if (!seen.insert(l).second)
        throw EmissionError(EmissionError::Kind::kInvalidAlphabet,
                            "duplicate label '" + l + "'");
    }
  }
};

inline void to_json(nlohmann::json &j, const Alphabet &a) {
  j = nlohmann::json{{"labels", a.labels}, {"blank_index", a.blank_index}};
}

inline void from_json(const nlohmann::json &j, Alphabet &a) {
  j.at("labels").get_to(a.labels);
  a.blank_index = j.value("blank_index", 0);
}

inline Alphabet load_alphabet(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw EmissionError(EmissionError::Kind::kIo, "cannot open " + path.string());
  Alphabet a;
  try {
    a = nlohmann::json::parse(in).get<Alphabet>();
  } catch (const nlohmann::json::exception &e) {
    throw EmissionError(EmissionError::Kind::kInvalidAlphabet,
                        path.string() + ": " + e.what());
  }
  a.validate();
  return a;
}

inline void save_alphabet(const Alphabet &a, const std::filesystem::path &path) {
  std::ofstream out(path);
  if (!out)
    throw EmissionError(EmissionError::Kind::kIo, "cannot write " + path.string());
  out << nlohmann::json(a).dump() << '\n';
  if (!out)
    throw EmissionError(EmissionError::Kind::kIo, "write failed: " + path.string());
}

/// Rows must exponentiate to a distribution within this absolute slack.
inline constexpr double kRowSumTolerance = 1e-4;

/// T x |L'| natural-log probabilities, frame-major. Immutable once built.
class EmissionMatrix {
 public:
  EmissionMatrix() = default;

  /// Validates every entry (finite or -inf) and every row's normalization.
  static EmissionMatrix from_log_probs(std::size_t num_frames, std::size_t num_labels,
                                       std::vector<double> log_probs,
                                       int blank_index = 0) {
    EmissionMatrix m(num_frames, num_labels, std::move(log_probs), blank_index);
    m.validate();
    return m;
  }

  /// Convenience for tests and generators: rows given in probability domain.
  static EmissionMatrix from_probs(const std::vector<std::vector<double>> &rows,
                                   int blank_index = 0) {
    std::size_t v = rows.empty() ? 0 : rows.front().size();
    std::vector<double> data;
    data.reserve(rows.size() * v);
    for (const auto &r : rows) {
      if (r.size() != v)
        throw EmissionError(EmissionError::Kind::kDimensionMismatch, "ragged rows");
      for (double p : r) data.push_back(std::log(p));
    }
    return from_log_probs(rows.size(), v, std::move(data), blank_index);
  }

  std::size_t num_frames() const { return num_frames_; }
  std::size_t num_labels() const { return num_labels_; }
  int blank() const { return blank_index_; }
  bool empty() const { return num_frames_ == 0; }

  std::span<const double> row(std::size_t t) const {
    return {data_.data() + t * num_labels_, num_labels_};
  }
  double at(std::size_t t, std::size_t k) const { return data_[t * num_labels_ + k]; }
  double blank_log_prob(std::size_t t) const {
    return at(t, static_cast<std::size_t>(blank_index_));
  }
  std::span<const double> log_probs() const { return data_; }

  /// Rows at the given frame indices, in the given order. No revalidation:
  /// every row was already checked.
  EmissionMatrix select_rows(std::span<const std::size_t> frames) const {
    std::vector<double> data;
    data.reserve(frames.size() * num_labels_);
    for (std::size_t t : frames) {
      auto r = row(t);
      data.insert(data.end(), r.begin(), r.end());
    }
    return EmissionMatrix(frames.size(), num_labels_, std::move(data), blank_index_);
  }

  friend bool operator==(const EmissionMatrix &a, const EmissionMatrix &b) {
    if (a.num_frames_ != b.num_frames_ || a.num_labels_ != b.num_labels_ ||
        a.blank_index_ != b.blank_index_)
      return false;
    // bitwise, so -inf == -inf and the round-trip check is exact
    return a.data_.size() == b.data_.size() &&
           (a.data_.empty() ||
            std::memcmp(a.data_.data(), b.data_.data(), a.data_.size() * sizeof(double)) == 0);
  }

 private:
  EmissionMatrix(std::size_t t, std::size_t v, std::vector<double> data, int blank)
      : num_frames_(t), num_labels_(v), blank_index_(blank), data_(std::move(data)) {}

  void validate() const {
    if (data_.size() != num_frames_ * num_labels_)
      throw EmissionError(EmissionError::Kind::kDimensionMismatch,
                          "expected " + std::to_string(num_frames_ * num_labels_) +
                              " values, got " + std::to_string(data_.size()));
    if (num_frames_ > 0 &&
        (blank_index_ < 0 || static_cast<std::size_t>(blank_index_) >= num_labels_))
      throw EmissionError(EmissionError::Kind::kDimensionMismatch,
                          "blank index " + std::to_string(blank_index_) +
                              " outside label range " + std::to_string(num_labels_));
    for (std::size_t t = 0; t < num_frames_; ++t) {
      double sum = 0.0;
      for (double v : row(t)) {
        if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
          throw EmissionError(EmissionError::Kind::kInvalidValue,
                              "frame " + std::to_string(t + 1) + " holds a non-finite value");
        sum += std::exp(v);
      }
      if (std::abs(sum - 1.0) > kRowSumTolerance)
        throw EmissionError(EmissionError::Kind::kNormalization,
                            "frame " + std::to_string(t + 1) + " sums to " +
                                std::to_string(sum));
    }
  }

  std::size_t num_frames_ = 0;
  std::size_t num_labels_ = 0;
  int blank_index_ = 0;
  std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// CTCE container: "CTCE", u32 version, u32 T, u32 V, T*V float32 (all LE).

inline constexpr std::array<char, 4> kCtceMagic = {'C', 'T', 'C', 'E'};
inline constexpr std::uint32_t kCtceVersion = 1;
inline constexpr std::size_t kCtceHeaderBytes = 16;

namespace internal {

template <typename T>
T to_little_endian(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

template <typename T>
void write_le(std::ostream &out, T v) {
  v = to_little_endian(v);
  out.write(reinterpret_cast<const char *>(&v), sizeof(T));
}

template <typename T>
bool read_le(std::istream &in, T &v) {
  if (!in.read(reinterpret_cast<char *>(&v), sizeof(T))) return false;
  v = to_little_endian(v);
  return true;
}

}  // namespace internal

/// Reads a CTCE file. The container does not record which column is the
/// blank; pass it from the companion alphabet.
inline EmissionMatrix load_emission(const std::filesystem::path &path, int blank_index = 0) {
  using Kind = EmissionError::Kind;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EmissionError(Kind::kIo, "cannot open " + path.string());

  std::array<char, 4> magic{};
  std::uint32_t version = 0, frames = 0, labels = 0;
  if (!in.read(magic.data(), magic.size()) || magic != kCtceMagic)
    throw EmissionError(Kind::kMalformedHeader, path.string() + ": bad magic");
  if (!internal::read_le(in, version) || !internal::read_le(in, frames) ||
      !internal::read_le(in, labels))
    throw EmissionError(Kind::kMalformedHeader, path.string() + ": truncated header");
  if (version != kCtceVersion)
    throw EmissionError(Kind::kMalformedHeader,
                        path.string() + ": unsupported version " + std::to_string(version));

  std::size_t count = static_cast<std::size_t>(frames) * labels;
  std::vector<double> data;
  data.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    float f;
    if (!internal::read_le(in, f))
      throw EmissionError(Kind::kDimensionMismatch,
                          path.string() + ": payload shorter than T*V=" + std::to_string(count));
    data.push_back(static_cast<double>(f));
  }
  if (in.peek() != std::char_traits<char>::eof())
    throw EmissionError(Kind::kDimensionMismatch, path.string() + ": trailing bytes after payload");

  try {
    return EmissionMatrix::from_log_probs(frames, labels, std::move(data), blank_index);
  } catch (const EmissionError &e) {
    throw EmissionError(e.kind(), path.string() + ": " + e.what());
  }
}

/// Writes m as float32. Values that are not float-representable are rounded,
/// so the round trip is exact only for matrices already on the float grid
/// (anything loaded from disk or produced by the generator).
inline void save_emission(const EmissionMatrix &m, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw EmissionError(EmissionError::Kind::kIo, "cannot write " + path.string());
  out.write(kCtceMagic.data(), kCtceMagic.size());
  internal::write_le(out, kCtceVersion);
  internal::write_le(out, static_cast<std::uint32_t>(m.num_frames()));
  internal::write_le(out, static_cast<std::uint32_t>(m.num_labels()));
  for (double v : m.log_probs()) internal::write_le(out, static_cast<float>(v));
  out.flush();
  if (!out) throw EmissionError(EmissionError::Kind::kIo, "write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Manifests

struct Utterance {
  std::string id;
  std::filesystem::path emission_path;
  std::string reference;
  double duration_s = 0.0;
};

class ManifestError : public std::runtime_error {
 public:
  ManifestError(std::size_t line, const std::string &what)
      : std::runtime_error("manifest line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// One JSON object per line: id, emission, ref (optional), duration_s
/// (optional, default 0). Relative emission paths are resolved against the
/// manifest's directory. Blank lines are skipped.
inline std::vector<Utterance> read_manifest(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw EmissionError(EmissionError::Kind::kIo, "cannot open " + path.string());
  const auto base = path.parent_path();

  std::vector<Utterance> out;
  std::unordered_set<std::string> ids;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
      throw ManifestError(line, e.what());
    }
    if (!j.is_object()) throw ManifestError(line, "expected a JSON object");
    if (!j.contains("id") || !j["id"].is_string()) throw ManifestError(line, "missing \"id\"");
    if (!j.contains("emission") || !j["emission"].is_string())
      throw ManifestError(line, "missing \"emission\"");

    Utterance u;
    u.id = j["id"].get<std::string>();
    std::filesystem::path em = j["emission"].get<std::string>();
    u.emission_path = em.is_absolute() ? em : base / em;
    if (j.contains("ref")) {
      if (!j["ref"].is_string()) throw ManifestError(line, "\"ref\" must be a string");
      u.reference = j["ref"].get<std::string>();
    }
    if (j.contains("duration_s")) {
      if (!j["duration_s"].is_number()) throw ManifestError(line, "\"duration_s\" must be a number");
      u.duration_s = j["duration_s"].get<double>();
      if (!(u.duration_s >= 0.0)) throw ManifestError(line, "negative duration_s");
    }
    if (!ids.insert(u.id).second) throw ManifestError(line, "duplicate id '" + u.id + "'");
    out.push_back(std::move(u));
  }
  return out;
}

/// Writes utterances as JSON lines. Emission paths are written relative to
/// the manifest directory when they live beneath it.
inline void write_manifest(std::span<const Utterance> utts, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw EmissionError(EmissionError::Kind::kIo, "cannot write " + path.string());
  const auto base = path.parent_path();
  for (const auto &u : utts) {
    auto em = u.emission_path;
    if (!base.empty() && em.is_absolute() == base.is_absolute()) {
      auto rel = em.lexically_relative(base);
      if (!rel.empty() && *rel.begin() != "..") em = rel;
    }
    nlohmann::json j = {{"id", u.id},
                        {"emission", em.generic_string()},
                        {"ref", u.reference},
                        {"duration_s", u.duration_s}};
    out << j.dump() << '\n';
  }
  if (!out) throw EmissionError(EmissionError::Kind::kIo, "write failed: " + path.string());
}

}  // namespace ctc_collapse

#endif  // CTC_COLLAPSE_EMISSIONS_HPP_
