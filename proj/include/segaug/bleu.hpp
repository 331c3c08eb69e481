// bleu.hpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Corpus-level BLEU from the formula: clipped modified n-gram
// precisions up to 4-grams, geometric mean, brevity penalty
// exp(1 - r/c) when the hypothesis is shorter than the reference.
// Tokenization may diverge from standard scorers by up to ~0.1 points
// on punctuation edge cases; it is not a bit-exact clone.

#ifndef SEGAUG_BLEU_HPP_
#define SEGAUG_BLEU_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "segaug/error.hpp"
#include "segaug/util.hpp"

namespace segaug {

constexpr int kBleuOrder = 4;

struct BleuSmoothing {
  enum class Kind { kNone, kAddK };
  Kind kind = Kind::kNone;
  double k = 1.0;

  static BleuSmoothing none() { return {Kind::kNone, 0.0}; }
  static BleuSmoothing add_k(double k) { return {Kind::kAddK, k}; }
};

struct BleuResult {
  double score = 0.0;                      // [0, 100]
  std::array<double, kBleuOrder> precisions{};  // possibly smoothed
  double brevity_penalty = 1.0;
  int64_t hyp_len = 0;
  int64_t ref_len = 0;
};

namespace detail {

inline bool is_bleu_punct(char32_t c) {
  if (c < 128) {
    return (c >= U'!' && c <= U'/') || (c >= U':' && c <= U'@') ||
           (c >= U'[' && c <= U'`') || (c >= U'{' && c <= U'~');
  }
  // common non-ASCII punctuation blocks
  if (c >= 0x00A1 && c <= 0x00BF) return true;   // inverted marks, quotes
  if (c >= 0x2010 && c <= 0x2027) return true;   // dashes, quotes, dots
  if (c >= 0x2030 && c <= 0x205E) return true;   // per-mille, daggers
  if (c >= 0x2E00 && c <= 0x2E4F) return true;   // supplemental punct
  if (c >= 0x3001 && c <= 0x3011) return true;   // CJK punct
  if (c >= 0xFF01 && c <= 0xFF0F) return true;   // fullwidth punct
  return false;
}

inline bool is_word_joiner(char32_t c) {
  return c == U'\'' || c == U'-' || c == 0x2019;
}

inline bool is_space_cp(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' ||
         c == U'\v' || c == 0x00A0;
}

}  // namespace detail

// Splits on whitespace and isolates punctuation as its own tokens,
// keeping apostrophes and hyphens that sit between alphanumerics
// attached to their word. Case is preserved.
inline std::vector<std::string> tokenize_for_bleu(const std::string& text) {
  std::vector<char32_t> cps = utf8_decode(text);
  std::string spaced;
  for (size_t i = 0; i < cps.size(); ++i) {
    char32_t c = cps[i];
    if (detail::is_space_cp(c)) {
      spaced.push_back(' ');
      continue;
    }
    if (detail::is_bleu_punct(c)) {
      bool intra_word = detail::is_word_joiner(c) && i > 0 &&
                        i + 1 < cps.size() &&
                        !detail::is_space_cp(cps[i - 1]) &&
                        !detail::is_bleu_punct(cps[i - 1]) &&
                        !detail::is_space_cp(cps[i + 1]) &&
                        !detail::is_bleu_punct(cps[i + 1]);
      if (intra_word) {
        utf8_append(spaced, c);
      } else {
        spaced.push_back(' ');
        utf8_append(spaced, c);
        spaced.push_back(' ');
      }
      continue;
    }
    utf8_append(spaced, c);
  }
  return split_whitespace(spaced);
}

namespace detail {

// n-gram key: tokens joined with \x1f
inline void count_ngrams(const std::vector<std::string>& tokens, int n,
                         std::unordered_map<std::string, int64_t>* counts) {
  if (static_cast<int>(tokens.size()) < n) return;
  for (size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key;
    for (int k = 0; k < n; ++k) {
      if (k) key.push_back('\x1f');
      key += tokens[i + k];
    }
    ++(*counts)[key];
  }
}

}  // namespace detail

inline BleuResult corpus_bleu(const std::vector<std::string>& hyps,
                              const std::vector<std::string>& refs,
                              const BleuSmoothing& smoothing =
                                  BleuSmoothing::none()) {
  if (hyps.size() != refs.size())
    throw DataError("corpus_bleu: " + std::to_string(hyps.size()) +
                    " hypotheses vs " + std::to_string(refs.size()) +
                    " references");
  if (hyps.empty()) throw DataError("corpus_bleu: empty corpus");

  std::array<int64_t, kBleuOrder> matches{};
  std::array<int64_t, kBleuOrder> totals{};
  int64_t hyp_len = 0, ref_len = 0;

  for (size_t i = 0; i < hyps.size(); ++i) {
    std::vector<std::string> hyp = tokenize_for_bleu(hyps[i]);
    std::vector<std::string> ref = tokenize_for_bleu(refs[i]);
    hyp_len += static_cast<int64_t>(hyp.size());
    ref_len += static_cast<int64_t>(ref.size());
    for (int n = 1; n <= kBleuOrder; ++n) {
      std::unordered_map<std::string, int64_t> hyp_counts, ref_counts;
      detail::count_ngrams(hyp, n, &hyp_counts);
      detail::count_ngrams(ref, n, &ref_counts);
      for (const auto& [key, count] : hyp_counts) {
        totals[n - 1] += count;
        auto it = ref_counts.find(key);
        if (it != ref_counts.end())
          matches[n - 1] += std::min(count, it->second);
      }
    }
  }

  BleuResult result;
  result.hyp_len = hyp_len;
  result.ref_len = ref_len;
  result.brevity_penalty =
      (hyp_len < ref_len && hyp_len > 0)
          ? std::exp(1.0 - static_cast<double>(ref_len) /
                               static_cast<double>(hyp_len))
          : 1.0;

  bool zero = false;
  double log_sum = 0.0;
  for (int n = 0; n < kBleuOrder; ++n) {
    double p;
    if (matches[n] > 0) {
      p = static_cast<double>(matches[n]) / static_cast<double>(totals[n]);
    } else if (smoothing.kind == BleuSmoothing::Kind::kAddK) {
      // smoothing kicks in only where the unsmoothed count is zero
      p = smoothing.k / (static_cast<double>(totals[n]) + smoothing.k);
    } else {
      p = 0.0;
      zero = true;
    }
    result.precisions[static_cast<size_t>(n)] = p;
    if (p > 0.0) log_sum += std::log(p);
  }

  result.score =
      zero ? 0.0
           : result.brevity_penalty * std::exp(log_sum / kBleuOrder) * 100.0;
  return result;
}

}  // namespace segaug

#endif  // SEGAUG_BLEU_HPP_
