// Copyright 2026 The ocrforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ocrforge/error.hpp"

namespace ocrforge::metrics {

// ---------------------------------------------------------------------------
// Text normalization

enum class UnicodeForm { kComposed, kDecomposed };
enum class Casing { kPreserve, kFold };
enum class CharsetFilter { kNone, kLatinAlphanumeric };
enum class Whitespace { kPreserve, kCollapse, kStripAll };

/// A named normalization policy. Steps run in a fixed order:
/// unicode form, casing, charset filter, whitespace.
struct NormProfile {
  std::string name;
  UnicodeForm unicode_form = UnicodeForm::kComposed;
  Casing casing = Casing::kPreserve;
  CharsetFilter charset_filter = CharsetFilter::kNone;
  Whitespace whitespace = Whitespace::kPreserve;

  friend bool operator==(const NormProfile&, const NormProfile&) = default;
};

/// NFC, case preserved, nothing filtered, whitespace kept.
NormProfile exact_nfc();
/// NFC, case folded, ASCII letters and digits only, no whitespace.
/// The usual convention for the English scene-text benchmarks.
NormProfile str_benchmark();
/// exact_nfc, but whitespace runs collapse to one space and ends are trimmed.
NormProfile collapsed_nfc();

/// Built-in profile by name; throws ValidationError for unknown names.
NormProfile profile_by_name(std::string_view name);
std::vector<std::string> builtin_profile_names();

/// Parses "<form> <casing> <filter> <whitespace>", e.g.
/// "composed fold latin-alphanumeric strip-all".
NormProfile parse_profile(std::string name, std::string_view steps);
std::string describe_profile(const NormProfile& profile);

/// UTF-8 in, UTF-8 out. Ill-formed input sequences become U+FFFD.
std::string normalize(std::string_view text, const NormProfile& profile);

/// UTF-8 <-> Unicode scalar values.
std::u32string to_scalars(std::string_view utf8);
std::string to_utf8(std::u32string_view scalars);

// ---------------------------------------------------------------------------
// Edit distance

/// Levenshtein distance with unit costs, O(|a|*|b|) time and
/// O(min(|a|,|b|)) space.
template <typename T>
std::size_t edit_distance(std::span<const T> a, std::span<const T> b) {
  if (a.size() < b.size()) std::swap(a, b);
  // b is the shorter sequence; one row of |b|+1 cells.
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      row[j] = std::min({up + 1, row[j - 1] + 1, diag + cost});
      diag = up;
    }
  }
  return row[b.size()];
}

inline std::size_t edit_distance(std::u32string_view a, std::u32string_view b) {
  return edit_distance(std::span<const char32_t>(a.data(), a.size()),
                       std::span<const char32_t>(b.data(), b.size()));
}

/// Distance over the scalar values of two UTF-8 strings. Callers normalize.
std::size_t edit_distance_utf8(std::string_view a, std::string_view b);

// ---------------------------------------------------------------------------
// Character error rate and word accuracy

/// Reference normalized to the empty string. `index` is set for corpus calls.
class EmptyReference : public ValidationError {
 public:
  explicit EmptyReference(std::optional<std::size_t> index = std::nullopt);
  std::optional<std::size_t> index() const { return index_; }

 private:
  std::optional<std::size_t> index_;
};

class EmptyInput : public ValidationError {
 public:
  EmptyInput() : ValidationError("no prediction/reference pairs") {}
};

struct CerResult {
  std::size_t distance = 0;
  std::size_t ref_len = 0;
  double cer = 0.0;
};

struct TextPair {
  std::string prediction;
  std::string reference;
};

CerResult cer(std::string_view prediction, std::string_view reference,
              const NormProfile& profile);

enum class CerAveraging { kMicro, kMacro };

/// Micro: sum of distances over sum of reference lengths.
/// Macro: unweighted mean of per-pair CER.
double corpus_cer(std::span<const TextPair> pairs, const NormProfile& profile,
                  CerAveraging averaging = CerAveraging::kMicro);

/// Per-pair results, in input order.
std::vector<CerResult> pairwise_cer(std::span<const TextPair> pairs,
                                    const NormProfile& profile);

double word_accuracy(std::span<const TextPair> pairs,
                     const NormProfile& profile);

}  // namespace ocrforge::metrics
