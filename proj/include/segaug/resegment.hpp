// resegment.hpp
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
// Hypothesis resegmentation against a reference segmentation: place
// cuts in the hypothesis word stream so that the summed edit distance
// to the reference segments is minimal. Used to score translations of
// automatically segmented audio against manually segmented references.

#ifndef SEGAUG_RESEGMENT_HPP_
#define SEGAUG_RESEGMENT_HPP_

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "segaug/error.hpp"
#include "segaug/util.hpp"

namespace segaug {

// Unit-cost token edit distance.
inline int64_t levenshtein(std::span<const std::string> a,
                           std::span<const std::string> b) {
  const size_t n = a.size(), m = b.size();
  std::vector<int64_t> prev(m + 1), cur(m + 1);
  for (size_t j = 0; j <= m; ++j) prev[j] = static_cast<int64_t>(j);
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<int64_t>(i);
    for (size_t j = 1; j <= m; ++j) {
      int64_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

struct ResegmentResult {
  // m+1 cut indices: 0 = k_0 <= ... <= k_m = n. Segment j of the
  // hypothesis is hyp[cuts[j] : cuts[j+1]].
  std::vector<size_t> cuts;
  int64_t cost = 0;
};

struct ResegmentOptions {
  bool case_insensitive = false;
};

// Minimizes sum_j levenshtein(hyp[k_{j-1}:k_j], ref_j) over all cut
// placements via DP over (segment, hyp position). Ties resolve to the
// lexicographically earliest cut vector.
inline ResegmentResult mwer_resegment(
    const std::vector<std::string>& hyp_words_in,
    const std::vector<std::vector<std::string>>& ref_segments_in,
    const ResegmentOptions& opts = {}) {
  if (ref_segments_in.empty())
    throw DataError("mwer_resegment: no reference segments");

  std::vector<std::string> hyp = hyp_words_in;
  std::vector<std::vector<std::string>> refs = ref_segments_in;
  if (opts.case_insensitive) {
    for (std::string& w : hyp) w = to_lower_ascii(w);
    for (auto& seg : refs)
      for (std::string& w : seg) w = to_lower_ascii(w);
  }

  const size_t n = hyp.size();
  const size_t m = refs.size();
  const int64_t kInf = std::numeric_limits<int64_t>::max() / 4;

  // suffix[j][i]: min cost of aligning refs j.. to hyp[i..n)
  std::vector<std::vector<int64_t>> suffix(
      m + 1, std::vector<int64_t>(n + 1, kInf));
  for (size_t i = 0; i <= n; ++i) suffix[m][i] = (i == n) ? 0 : kInf;

  // seg_cost[i][t-i] = levenshtein(hyp[i:t], ref_j), filled per j
  for (size_t j = m; j-- > 0;) {
    const std::vector<std::string>& ref = refs[j];
    const size_t R = ref.size();
    for (size_t i = 0; i <= n; ++i) {
      // edit-distance DP rows over growing hyp[i:t]; row r corresponds
      // to t = i + r and holds distances against all ref prefixes
      std::vector<int64_t> row(R + 1);
      for (size_t b = 0; b <= R; ++b) row[b] = static_cast<int64_t>(b);
      int64_t best = kInf;
      if (suffix[j + 1][i] < kInf)
        best = row[R] + suffix[j + 1][i];  // empty hyp segment
      for (size_t t = i + 1; t <= n; ++t) {
        std::vector<int64_t> next(R + 1);
        next[0] = static_cast<int64_t>(t - i);
        for (size_t b = 1; b <= R; ++b) {
          int64_t sub = row[b - 1] + (hyp[t - 1] == ref[b - 1] ? 0 : 1);
          next[b] = std::min({row[b] + 1, next[b - 1] + 1, sub});
        }
        row = std::move(next);
        if (suffix[j + 1][t] < kInf)
          best = std::min(best, row[R] + suffix[j + 1][t]);
      }
      suffix[j][i] = best;
    }
  }

  ResegmentResult result;
  result.cost = suffix[0][0];
  result.cuts.push_back(0);

  // forward reconstruction: earliest cut that preserves optimality
  size_t i = 0;
  for (size_t j = 0; j < m; ++j) {
    const std::vector<std::string>& ref = refs[j];
    const size_t R = ref.size();
    std::vector<int64_t> row(R + 1);
    for (size_t b = 0; b <= R; ++b) row[b] = static_cast<int64_t>(b);
    size_t chosen = n;
    if (suffix[j + 1][i] < kInf &&
        row[R] + suffix[j + 1][i] == suffix[j][i]) {
      chosen = i;
    } else {
      for (size_t t = i + 1; t <= n; ++t) {
        std::vector<int64_t> next(R + 1);
        next[0] = static_cast<int64_t>(t - i);
        for (size_t b = 1; b <= R; ++b) {
          int64_t sub = row[b - 1] + (hyp[t - 1] == ref[b - 1] ? 0 : 1);
          next[b] = std::min({row[b] + 1, next[b - 1] + 1, sub});
        }
        row = std::move(next);
        if (suffix[j + 1][t] < kInf &&
            row[R] + suffix[j + 1][t] == suffix[j][i]) {
          chosen = t;
          break;
        }
      }
    }
    result.cuts.push_back(chosen);
    i = chosen;
  }
  return result;
}

}  // namespace segaug

#endif  // SEGAUG_RESEGMENT_HPP_
