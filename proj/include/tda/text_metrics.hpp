// include/tda/text_metrics.hpp
//
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

#ifndef TDA_TEXT_METRICS_HPP
#define TDA_TEXT_METRICS_HPP

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace tda {

// Canonical transcript form: lowercase, [a-z0-9'] kept, everything else
// treated as whitespace, runs of whitespace collapsed to single spaces,
// no leading/trailing space.
std::string normalize_text(std::string_view raw);

// Splits a normalized transcript into words. Non-normalized input is
// normalized first, so callers can pass raw text.
std::vector<std::string> split_words(std::string_view text);

struct EditCounts {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;   // tokens present in reference, absent in hypothesis
  std::size_t insertions = 0;  // tokens present in hypothesis, absent in reference
  std::size_t total() const { return substitutions + deletions + insertions; }
};

// Levenshtein distance with unit costs over arbitrary token sequences.
// When several edit scripts have the same total cost, the backtrace prefers
// substitution over insertion over deletion so the S/D/I split is stable.
EditCounts edit_counts(const std::vector<std::string>& reference,
                       const std::vector<std::string>& hypothesis);
std::size_t edit_distance(const std::vector<std::string>& reference,
                          const std::vector<std::string>& hypothesis);

// Word error rate: (S + D + I) / #reference words, computed on normalized
// text. Throws EmptyReferenceError when the reference normalizes to nothing.
double wer(std::string_view reference, std::string_view hypothesis);

// Character error rate over the normalized strings, spaces included.
double cer(std::string_view reference, std::string_view hypothesis);

// Longest-common-prefix distance on normalized characters:
//   1 - LCP(a, b) / max(|a|, |b|)
// Both empty -> 0 (identical); exactly one empty -> 1.
double lcp_distance(std::string_view reference, std::string_view hypothesis);

// Ratio of two error rates, used to compare an error rate under some
// processing against a baseline. Throws UndefinedRatioError when the
// denominator is zero.
double effectiveness_ratio(double numerator, double denominator);

}  // namespace tda

#endif  // TDA_TEXT_METRICS_HPP
