// src/text_metrics.cpp
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

#include "tda/text_metrics.hpp"

#include <algorithm>
#include <cctype>

#include "tda/errors.hpp"

namespace tda {

std::string normalize_text(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    const auto u = static_cast<unsigned char>(c);
    char lower = static_cast<char>(std::tolower(u));
    const bool keep = (lower >= 'a' && lower <= 'z') || (lower >= '0' && lower <= '9') || lower == '\'';
    if (keep) {
      if (pending_space && !out.empty()) out.push_back(' ');
      pending_space = false;
      out.push_back(lower);
    } else {
      pending_space = true;  // any other byte acts as a separator
    }
  }
  return out;
}

std::vector<std::string> split_words(std::string_view text) {
  const std::string norm = normalize_text(text);
  std::vector<std::string> words;
  std::size_t start = 0;
  while (start < norm.size()) {
    std::size_t end = norm.find(' ', start);
    if (end == std::string::npos) end = norm.size();
    if (end > start) words.emplace_back(norm.substr(start, end - start));
    start = end + 1;
  }
  return words;
}

namespace {

// Shared DP for any token type that supports operator==.
template <typename Tok>
EditCounts edit_counts_impl(const std::vector<Tok>& ref, const std::vector<Tok>& hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  std::vector<std::vector<std::size_t>> d(n + 1, std::vector<std::size_t>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      if (ref[i - 1] == hyp[j - 1]) {
        d[i][j] = d[i - 1][j - 1];
      } else {
        d[i][j] = 1 + std::min({d[i - 1][j - 1], d[i][j - 1], d[i - 1][j]});
      }
    }
  }

  // Backtrace, preferring substitution, then insertion, then deletion when
  // the costs tie, so callers get a deterministic S/D/I breakdown.
  EditCounts counts;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && ref[i - 1] == hyp[j - 1] && d[i][j] == d[i - 1][j - 1]) {
      --i;
      --j;
    } else if (i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + 1) {
      ++counts.substitutions;
      --i;
      --j;
    } else if (j > 0 && d[i][j] == d[i][j - 1] + 1) {
      ++counts.insertions;
      --j;
    } else {
      ++counts.deletions;
      --i;
    }
  }
  return counts;
}

}  // namespace

EditCounts edit_counts(const std::vector<std::string>& reference,
                       const std::vector<std::string>& hypothesis) {
  return edit_counts_impl(reference, hypothesis);
}

std::size_t edit_distance(const std::vector<std::string>& reference,
                          const std::vector<std::string>& hypothesis) {
  return edit_counts_impl(reference, hypothesis).total();
}

double wer(std::string_view reference, std::string_view hypothesis) {
  const std::vector<std::string> ref = split_words(reference);
  const std::vector<std::string> hyp = split_words(hypothesis);
  if (ref.empty()) throw EmptyReferenceError("wer: reference normalizes to the empty transcript");
  const EditCounts c = edit_counts(ref, hyp);
  return static_cast<double>(c.total()) / static_cast<double>(ref.size());
}

double cer(std::string_view reference, std::string_view hypothesis) {
  const std::string ref_n = normalize_text(reference);
  const std::string hyp_n = normalize_text(hypothesis);
  if (ref_n.empty()) throw EmptyReferenceError("cer: reference normalizes to the empty transcript");
  std::vector<char> ref(ref_n.begin(), ref_n.end());
  std::vector<char> hyp(hyp_n.begin(), hyp_n.end());
  const EditCounts c = edit_counts_impl(ref, hyp);
  return static_cast<double>(c.total()) / static_cast<double>(ref.size());
}

double lcp_distance(std::string_view reference, std::string_view hypothesis) {
  const std::string a = normalize_text(reference);
  const std::string b = normalize_text(hypothesis);
  const std::size_t longer = std::max(a.size(), b.size());
  if (longer == 0) return 0.0;
  std::size_t lcp = 0;
  const std::size_t shorter = std::min(a.size(), b.size());
  while (lcp < shorter && a[lcp] == b[lcp]) ++lcp;
  return 1.0 - static_cast<double>(lcp) / static_cast<double>(longer);
}

double effectiveness_ratio(double numerator, double denominator) {
  if (denominator == 0.0) throw UndefinedRatioError("effectiveness_ratio: zero denominator");
  return numerator / denominator;
}

}  // namespace tda
