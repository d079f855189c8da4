// tests/test_text_metrics.cpp
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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "tda/errors.hpp"
#include "tda/random.hpp"
#include "tda/text_metrics.hpp"

using namespace tda;

namespace {

// Independent oracle: plain exponential recursion on the Levenshtein
// definition, no memoization, no shared code with the DP implementation.
std::size_t brute_edit(const std::vector<std::string>& a, std::size_t i,
                       const std::vector<std::string>& b, std::size_t j) {
  if (i == a.size()) return b.size() - j;
  if (j == b.size()) return a.size() - i;
  const std::size_t if_sub = brute_edit(a, i + 1, b, j + 1) + (a[i] == b[j] ? 0 : 1);
  const std::size_t if_del = brute_edit(a, i + 1, b, j) + 1;
  const std::size_t if_ins = brute_edit(a, i, b, j + 1) + 1;
  return std::min({if_sub, if_del, if_ins});
}

std::vector<std::string> random_tokens(tda::Rng& rng, int max_len, int alphabet) {
  std::vector<std::string> out(static_cast<std::size_t>(rng.uniform_int(0, max_len)));
  for (std::string& tok : out) tok = std::string(1, static_cast<char>('a' + rng.uniform_int(0, alphabet - 1)));
  return out;
}

}  // namespace

TEST_CASE("normalize_text lowercases, strips punctuation, collapses separators") {
  CHECK(normalize_text("Hello, World!") == "hello world");
  CHECK(normalize_text("  a   b  ") == "a b");
  CHECK(normalize_text("don't") == "don't");
  CHECK(normalize_text("A-B_C") == "a b c");
  CHECK(normalize_text("...") == "");
  CHECK(normalize_text("") == "");
  CHECK(normalize_text("MiXeD 123") == "mixed 123");
}

TEST_CASE("split_words") {
  CHECK(split_words("the cat sat") == std::vector<std::string>{"the", "cat", "sat"});
  CHECK(split_words("  One;Two  ") == std::vector<std::string>{"one", "two"});
  CHECK(split_words("").empty());
}

TEST_CASE("edit_distance hand cases") {
  using V = std::vector<std::string>;
  const V empty;
  CHECK(edit_distance(empty, empty) == 0);
  CHECK(edit_distance(V{"a", "b", "c"}, V{"a", "b", "c"}) == 0);
  CHECK(edit_distance(V{"a", "b", "c"}, empty) == 3);
  CHECK(edit_distance(empty, V{"x"}) == 1);
  // kitten -> sitting, the classic 3-edit pair (one token per letter)
  const V kitten{"k", "i", "t", "t", "e", "n"};
  const V sitting{"s", "i", "t", "t", "i", "n", "g"};
  CHECK(edit_distance(kitten, sitting) == 3);
}

TEST_CASE("edit_counts splits into substitutions, deletions, insertions") {
  using V = std::vector<std::string>;
  // ref "a b c d" vs hyp "a x c" : 1 substitution + 1 deletion
  const V ref{"a", "b", "c", "d"}, hyp{"a", "x", "c"};
  const EditCounts c = edit_counts(ref, hyp);
  CHECK(c.substitutions == 1);
  CHECK(c.deletions == 1);
  CHECK(c.insertions == 0);
  CHECK(c.total() == 2);
  CHECK(c.total() == edit_distance(ref, hyp));
}

TEST_CASE("edit_distance equals exponential brute force on 1000 random short pairs") {
  Rng rng(20260815);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::vector<std::string> a = random_tokens(rng, 8, 3);
    const std::vector<std::string> b = random_tokens(rng, 8, 3);
    const std::size_t expect = brute_edit(a, 0, b, 0);
    CAPTURE(trial);
    CHECK(edit_distance(a, b) == expect);
    CHECK(edit_counts(a, b).total() == expect);
  }
}

TEST_CASE("wer basics") {
  CHECK(wer("the cat sat", "the cat sat") == doctest::Approx(0.0));
  CHECK(wer("the cat sat", "the bad sat") == doctest::Approx(1.0 / 3.0));
  // hypothesis longer than reference can push the rate above 1
  CHECK(wer("one", "two words here") > 1.0);
  CHECK_THROWS_AS((void)wer("", "anything"), EmptyReferenceError);
  CHECK_THROWS_AS((void)wer("...", "anything"), EmptyReferenceError);
}

TEST_CASE("wer on a truncated-transcript pair with one error in six words") {
  // whole-clip decode cut to prefix length differs from the prefix decode in
  // its final word only
  const std::string s_whole_k = "then good bye said the rats";
  const std::string s_k = "then good bye said the raps";
  CHECK(wer(s_whole_k, s_k) == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("cer counts characters of the normalized strings, spaces included") {
  CHECK(cer("abc", "abc") == doctest::Approx(0.0));
  CHECK(cer("abc", "abd") == doctest::Approx(1.0 / 3.0));
  // "a b" vs "ab": deleting the space is one edit over three reference chars
  CHECK(cer("a b", "ab") == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS((void)cer("", "x"), EmptyReferenceError);
}

TEST_CASE("lcp_distance") {
  CHECK(lcp_distance("", "") == doctest::Approx(0.0));
  CHECK(lcp_distance("abc", "abc") == doctest::Approx(0.0));
  CHECK(lcp_distance("abc", "") == doctest::Approx(1.0));
  // lcp("abcd", "abxx") = 2, max length 4
  CHECK(lcp_distance("abcd", "abxx") == doctest::Approx(0.5));
  // different lengths: lcp("ab", "abcd") = 2, max 4
  CHECK(lcp_distance("ab", "abcd") == doctest::Approx(0.5));
}

TEST_CASE("effectiveness_ratio") {
  CHECK(effectiveness_ratio(29.1, 102.8) == doctest::Approx(29.1 / 102.8));
  CHECK(effectiveness_ratio(1.0, 1.0) == doctest::Approx(1.0));
  // ratios above 1 are legal (transform can make things worse)
  CHECK(effectiveness_ratio(1.5, 1.0) > 1.0);
  CHECK_THROWS_AS((void)effectiveness_ratio(1.0, 0.0), UndefinedRatioError);
}
