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

#include "ocrforge/metrics.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <sstream>

namespace ocrforge::metrics {
namespace {

const icu::Normalizer2& normalizer(UnicodeForm form) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* instance =
      form == UnicodeForm::kComposed ? icu::Normalizer2::getNFCInstance(status)
                                     : icu::Normalizer2::getNFDInstance(status);
  if (U_FAILURE(status) || instance == nullptr) {
    throw EnvironmentError("ICU normalizer unavailable");
  }
  return *instance;
}

icu::UnicodeString apply_form(const icu::UnicodeString& text, UnicodeForm form) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString out = normalizer(form).normalize(text, status);
  if (U_FAILURE(status)) throw ValidationError("unicode normalization failed");
  return out;
}

bool is_latin_alnum(UChar32 c) {
  return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z') ||
         (c >= U'0' && c <= U'9');
}

template <typename Enum>
struct NamedValue {
  std::string_view name;
  Enum value;
};

constexpr NamedValue<UnicodeForm> kForms[] = {
    {"composed", UnicodeForm::kComposed}, {"decomposed", UnicodeForm::kDecomposed}};
constexpr NamedValue<Casing> kCasings[] = {{"preserve", Casing::kPreserve},
                                           {"fold", Casing::kFold}};
constexpr NamedValue<CharsetFilter> kFilters[] = {
    {"none", CharsetFilter::kNone},
    {"latin-alphanumeric", CharsetFilter::kLatinAlphanumeric}};
constexpr NamedValue<Whitespace> kSpacing[] = {{"preserve", Whitespace::kPreserve},
                                               {"collapse", Whitespace::kCollapse},
                                               {"strip-all", Whitespace::kStripAll}};

template <typename Enum, std::size_t N>
Enum lookup(const NamedValue<Enum> (&table)[N], std::string_view word,
            std::string_view what) {
  for (const auto& entry : table) {
    if (entry.name == word) return entry.value;
  }
  throw ValidationError("unknown " + std::string(what) + " step '" +
                        std::string(word) + "'");
}

template <typename Enum, std::size_t N>
std::string_view name_of(const NamedValue<Enum> (&table)[N], Enum value) {
  for (const auto& entry : table) {
    if (entry.value == value) return entry.name;
  }
  return "?";
}

}  // namespace

NormProfile exact_nfc() {
  return {"exact-nfc", UnicodeForm::kComposed, Casing::kPreserve,
          CharsetFilter::kNone, Whitespace::kPreserve};
}

NormProfile str_benchmark() {
  return {"str-benchmark", UnicodeForm::kComposed, Casing::kFold,
          CharsetFilter::kLatinAlphanumeric, Whitespace::kStripAll};
}

NormProfile collapsed_nfc() {
  return {"collapsed-nfc", UnicodeForm::kComposed, Casing::kPreserve,
          CharsetFilter::kNone, Whitespace::kCollapse};
}

std::vector<std::string> builtin_profile_names() {
  return {"exact-nfc", "str-benchmark", "collapsed-nfc"};
}

NormProfile profile_by_name(std::string_view name) {
  for (const auto& profile : {exact_nfc(), str_benchmark(), collapsed_nfc()}) {
    if (profile.name == name) return profile;
  }
  throw ValidationError("unknown normalization profile '" + std::string(name) +
                        "'");
}

NormProfile parse_profile(std::string name, std::string_view steps) {
  std::istringstream in{std::string(steps)};
  std::vector<std::string> words;
  for (std::string word; in >> word;) words.push_back(word);
  if (words.size() != 4) {
    throw ValidationError("profile '" + name +
                          "' needs four steps: form casing filter whitespace");
  }
  return {std::move(name), lookup(kForms, words[0], "unicode form"),
          lookup(kCasings, words[1], "casing"),
          lookup(kFilters, words[2], "charset filter"),
          lookup(kSpacing, words[3], "whitespace")};
}

std::string describe_profile(const NormProfile& profile) {
  std::string out;
  out += name_of(kForms, profile.unicode_form);
  out += ' ';
  out += name_of(kCasings, profile.casing);
  out += ' ';
  out += name_of(kFilters, profile.charset_filter);
  out += ' ';
  out += name_of(kSpacing, profile.whitespace);
  return out;
}

std::string normalize(std::string_view text, const NormProfile& profile) {
  icu::UnicodeString s = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  s = apply_form(s, profile.unicode_form);

  if (profile.casing == Casing::kFold) {
    s.foldCase();
    // Folding can leave the string outside the requested form.
    s = apply_form(s, profile.unicode_form);
  }

  if (profile.charset_filter != CharsetFilter::kNone ||
      profile.whitespace != Whitespace::kPreserve) {
    icu::UnicodeString filtered;
    bool pending_space = false;
    for (int32_t i = 0; i < s.length();) {
      const UChar32 c = s.char32At(i);
      i += U16_LENGTH(c);
      if (profile.charset_filter == CharsetFilter::kLatinAlphanumeric &&
          !is_latin_alnum(c)) {
        continue;
      }
      if (u_isUWhiteSpace(c)) {
        if (profile.whitespace == Whitespace::kPreserve) {
          filtered.append(c);
        } else if (profile.whitespace == Whitespace::kCollapse) {
          pending_space = !filtered.isEmpty();
        }
        continue;
      }
      if (pending_space) {
        filtered.append(static_cast<UChar32>(U' '));
        pending_space = false;
      }
      filtered.append(c);
    }
    s = std::move(filtered);
  }

  std::string out;
  s.toUTF8String(out);
  return out;
}

std::u32string to_scalars(std::string_view utf8) {
  const icu::UnicodeString s = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  std::u32string out;
  out.reserve(static_cast<std::size_t>(s.length()));
  for (int32_t i = 0; i < s.length();) {
    const UChar32 c = s.char32At(i);
    i += U16_LENGTH(c);
    out.push_back(static_cast<char32_t>(c));
  }
  return out;
}

std::string to_utf8(std::u32string_view scalars) {
  icu::UnicodeString s;
  for (char32_t c : scalars) s.append(static_cast<UChar32>(c));
  std::string out;
  s.toUTF8String(out);
  return out;
}

std::size_t edit_distance_utf8(std::string_view a, std::string_view b) {
  return edit_distance(to_scalars(a), to_scalars(b));
}

EmptyReference::EmptyReference(std::optional<std::size_t> index)
    : ValidationError(index ? "reference " + std::to_string(*index) +
                                  " is empty after normalization"
                            : std::string("reference is empty after normalization")),
      index_(index) {}

namespace {

CerResult cer_at(std::string_view prediction, std::string_view reference,
                 const NormProfile& profile, std::optional<std::size_t> index) {
  const std::u32string ref = to_scalars(normalize(reference, profile));
  if (ref.empty()) throw EmptyReference(index);
  const std::u32string pred = to_scalars(normalize(prediction, profile));
  CerResult result;
  result.distance = edit_distance(pred, ref);
  result.ref_len = ref.size();
  result.cer = static_cast<double>(result.distance) /
               static_cast<double>(result.ref_len);
  return result;
}

}  // namespace

CerResult cer(std::string_view prediction, std::string_view reference,
              const NormProfile& profile) {
  return cer_at(prediction, reference, profile, std::nullopt);
}

std::vector<CerResult> pairwise_cer(std::span<const TextPair> pairs,
                                    const NormProfile& profile) {
  std::vector<CerResult> results;
  results.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    results.push_back(
        cer_at(pairs[i].prediction, pairs[i].reference, profile, i));
  }
  return results;
}

double corpus_cer(std::span<const TextPair> pairs, const NormProfile& profile,
                  CerAveraging averaging) {
  if (pairs.empty()) throw EmptyInput();
  const auto results = pairwise_cer(pairs, profile);
  if (averaging == CerAveraging::kMacro) {
    double sum = 0.0;
    for (const auto& r : results) sum += r.cer;
    return sum / static_cast<double>(results.size());
  }
  std::size_t distance = 0;
  std::size_t length = 0;
  for (const auto& r : results) {
    distance += r.distance;
    length += r.ref_len;
  }
  return static_cast<double>(distance) / static_cast<double>(length);
}

double word_accuracy(std::span<const TextPair> pairs,
                     const NormProfile& profile) {
  if (pairs.empty()) throw EmptyInput();
  std::size_t hits = 0;
  for (const auto& pair : pairs) {
    if (normalize(pair.prediction, profile) ==
        normalize(pair.reference, profile)) {
      ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

}  // namespace ocrforge::metrics
