// aligner.hpp
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
// CTC-style forced alignment: max-score (Viterbi) monotonic alignment
// of a cleaned character sequence against frame-level emission
// log-probabilities, followed by character-to-word merging and
// word-to-segment assignment.
//
// Trellis over (frame t, consumed chars j):
//   D[0][0] = 0,  D[0][j>0] = -inf
//   D[t][0] = D[t-1][0] + U[t-1][blank]
//   D[t][j] = max(D[t-1][j] + max(U[t-1][blank], U[t-1][c_j]),   (stay)
//                 D[t-1][j-1] + U[t-1][c_j])                     (advance)
// Backtracking from (T,L) prefers "stay" on ties, which pins ambiguous
// frames to the earlier character. A frame belongs to character j when
// the path sits at column j and the frame actually emitted c_j (stay
// frames that emitted blank belong to no character; emission ties go
// to blank).

#ifndef SEGAUG_ALIGNER_HPP_
#define SEGAUG_ALIGNER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "segaug/emissions.hpp"
#include "segaug/error.hpp"
#include "segaug/segmenter.hpp"
#include "segaug/textnorm.hpp"
#include "segaug/timeline.hpp"

namespace segaug {

struct CharSpan {
  int symbol = -1;            // vocab index
  int64_t start_frame = 0;    // inclusive
  int64_t end_frame = 0;      // inclusive
  double score = 0.0;         // mean log-prob over emitting frames
};

struct WordSpan {
  size_t clean_unit_ref = 0;  // index into the document's CleanUnit list
  std::string word_text;      // cleaned word
  int64_t start_frame = 0;    // inclusive
  int64_t end_frame = 0;      // inclusive
  double start_s = 0.0;
  double end_s = 0.0;
  double score = 0.0;         // mean over member char scores
};

struct AlignmentResult {
  std::vector<CharSpan> chars;
  double path_score = 0.0;      // trellis optimum D[T][L]
  double backtrack_score = 0.0;  // emission sum along the recovered path
};

// The alignment character sequence for a unit list: all cleaned words
// joined with the word-boundary symbol, mapped to vocab indices.
inline std::vector<int> char_sequence_for_units(
    const std::vector<CleanUnit>& units, const EmissionMatrix& em) {
  std::vector<int> seq;
  bool first = true;
  for (const CleanUnit& unit : units) {
    for (const std::string& word : unit.cleaned_words) {
      if (!first) seq.push_back(em.boundary_index());
      first = false;
      size_t i = 0;
      while (i < word.size()) {
        size_t before = i;
        char32_t cp = utf8_next(word, i);
        std::string sym = word.substr(before, i - before);
        (void)cp;
        int idx = em.index_of(sym);
        if (idx < 0)
          throw DataError("doc " + em.doc_id +
                          ": cleaned symbol '" + sym +
                          "' missing from the emission vocabulary");
        seq.push_back(idx);
      }
    }
  }
  return seq;
}

inline AlignmentResult align_chars(const EmissionMatrix& em,
                                   const std::vector<int>& chars) {
  const int64_t T = em.num_frames();
  const int64_t L = static_cast<int64_t>(chars.size());
  const int blank = em.blank_index();
  const double kNegInf = -std::numeric_limits<double>::infinity();

  if (T < L)
    throw StageError("doc " + em.doc_id + ": infeasible alignment (" +
                     std::to_string(T) + " frames < " + std::to_string(L) +
                     " characters)");

  AlignmentResult result;
  if (L == 0) {
    // blank-only path
    double score = 0.0;
    for (int64_t t = 0; t < T; ++t) score += em.at(t, blank);
    result.path_score = score;
    result.backtrack_score = score;
    return result;
  }

  // D is (T+1) x (L+1); fromStay[t][j] records the backtrack choice.
  const size_t W = static_cast<size_t>(L) + 1;
  std::vector<double> dp(static_cast<size_t>(T + 1) * W, kNegInf);
  std::vector<uint8_t> from_stay(static_cast<size_t>(T + 1) * W, 0);
  auto D = [&](int64_t t, int64_t j) -> double& {
    return dp[static_cast<size_t>(t) * W + static_cast<size_t>(j)];
  };
  auto Stay = [&](int64_t t, int64_t j) -> uint8_t& {
    return from_stay[static_cast<size_t>(t) * W + static_cast<size_t>(j)];
  };

  D(0, 0) = 0.0;
  for (int64_t t = 1; t <= T; ++t) {
    D(t, 0) = D(t - 1, 0) + em.at(t - 1, blank);
    Stay(t, 0) = 1;
    const int64_t jmax = std::min<int64_t>(L, t);
    for (int64_t j = 1; j <= jmax; ++j) {
      const double emit_c = em.at(t - 1, chars[static_cast<size_t>(j - 1)]);
      const double stay_emit = std::max(double(em.at(t - 1, blank)), emit_c);
      const double stay = D(t - 1, j) + stay_emit;
      const double advance = D(t - 1, j - 1) + emit_c;
      if (stay >= advance) {  // prefer stay on ties
        D(t, j) = stay;
        Stay(t, j) = 1;
      } else {
        D(t, j) = advance;
        Stay(t, j) = 0;
      }
    }
  }

  const double total = D(T, L);
  if (total == kNegInf)
    throw StageError("doc " + em.doc_id +
                     ": infeasible alignment (no finite path)");
  result.path_score = total;

  // Backtrack, attributing emitting frames to characters.
  struct Attr {
    int64_t first = -1, last = -1;
    double sum = 0.0;
    int64_t count = 0;
  };
  std::vector<Attr> attr(static_cast<size_t>(L));
  double emitted = 0.0;
  int64_t j = L;
  for (int64_t t = T; t > 0; --t) {
    if (Stay(t, j)) {
      const double emit_blank = em.at(t - 1, blank);
      if (j > 0) {
        const double emit_c = em.at(t - 1, chars[static_cast<size_t>(j - 1)]);
        emitted += std::max(emit_blank, emit_c);
        if (emit_c > emit_blank) {
          // stayed and re-emitted the current character
          Attr& a = attr[static_cast<size_t>(j - 1)];
          if (a.last < 0) a.last = t - 1;
          a.first = t - 1;
          a.sum += emit_c;
          ++a.count;
        }
      } else {
        emitted += emit_blank;
      }
    } else {
      const double emit_c = em.at(t - 1, chars[static_cast<size_t>(j - 1)]);
      emitted += emit_c;
      Attr& a = attr[static_cast<size_t>(j - 1)];
      if (a.last < 0) a.last = t - 1;
      a.first = t - 1;
      a.sum += emit_c;
      ++a.count;
      --j;
    }
  }
  result.backtrack_score = emitted;

  result.chars.reserve(static_cast<size_t>(L));
  for (int64_t k = 0; k < L; ++k) {
    const Attr& a = attr[static_cast<size_t>(k)];
    CharSpan span;
    span.symbol = chars[static_cast<size_t>(k)];
    span.start_frame = a.first;
    span.end_frame = a.last;
    span.score = a.count ? a.sum / static_cast<double>(a.count) : 0.0;
    result.chars.push_back(span);
  }
  return result;
}

// Groups character spans into time-stamped words, one WordSpan per
// cleaned word, linked back to its CleanUnit.
inline std::vector<WordSpan> chars_to_words(
    const std::vector<CharSpan>& spans, const std::vector<CleanUnit>& units,
    const EmissionMatrix& em) {
  // expected word sequence
  struct WordRef {
    size_t unit;
    const std::string* text;
  };
  std::vector<WordRef> expected;
  for (size_t u = 0; u < units.size(); ++u)
    for (const std::string& w : units[u].cleaned_words)
      expected.push_back({u, &w});

  std::vector<WordSpan> words;
  size_t wi = 0;
  size_t i = 0;
  const int boundary = em.boundary_index();
  while (i < spans.size()) {
    if (spans[i].symbol == boundary) {
      ++i;
      continue;
    }
    size_t b = i;
    std::string text;
    double score_sum = 0.0;
    while (i < spans.size() && spans[i].symbol != boundary) {
      text += em.vocab[static_cast<size_t>(spans[i].symbol)];
      score_sum += spans[i].score;
      ++i;
    }
    if (wi >= expected.size() || *expected[wi].text != text)
      throw StageError("doc " + em.doc_id +
                       ": aligned character stream does not match the "
                       "cleaned words (at word " + std::to_string(wi) + ")");
    WordSpan w;
    w.clean_unit_ref = expected[wi].unit;
    w.word_text = text;
    w.start_frame = spans[b].start_frame;
    w.end_frame = spans[i - 1].end_frame;
    w.start_s = em.timeline.time_of(w.start_frame);
    w.end_s = em.timeline.end_time_of(w.end_frame);
    w.score = score_sum / static_cast<double>(i - b);
    words.push_back(std::move(w));
    ++wi;
  }
  if (wi != expected.size())
    throw StageError("doc " + em.doc_id + ": expected " +
                     std::to_string(expected.size()) + " words, aligned " +
                     std::to_string(wi));
  return words;
}

// ── Word-to-segment assignment ───────────────────────────────────────

struct SegmentAssignment {
  // For each segment, the CleanUnit indices it owns (original order).
  std::vector<std::vector<size_t>> unit_indices;
  size_t dropped_units = 0;  // midpoints that fell into no segment
};

// A unit belongs to the segment whose half-open interval [start,end)
// contains the midpoint of the unit's full span (first word start to
// last word end). Multi-word units move atomically.
inline SegmentAssignment assign_words_to_segments(
    const std::vector<WordSpan>& words, const std::vector<CleanUnit>& units,
    const Segmentation& seg) {
  SegmentAssignment out;
  out.unit_indices.resize(seg.segments.size());

  std::vector<double> unit_start(units.size(),
                                 std::numeric_limits<double>::infinity());
  std::vector<double> unit_end(units.size(),
                               -std::numeric_limits<double>::infinity());
  for (const WordSpan& w : words) {
    unit_start[w.clean_unit_ref] =
        std::min(unit_start[w.clean_unit_ref], w.start_s);
    unit_end[w.clean_unit_ref] = std::max(unit_end[w.clean_unit_ref], w.end_s);
  }

  for (size_t u = 0; u < units.size(); ++u) {
    if (unit_start[u] > unit_end[u]) {
      ++out.dropped_units;  // unit produced no aligned words
      continue;
    }
    const double mid = 0.5 * (unit_start[u] + unit_end[u]);
    // binary search: first segment with end_s > mid
    size_t lo = 0, hi = seg.segments.size();
    while (lo < hi) {
      size_t m = (lo + hi) / 2;
      if (seg.segments[m].end_s <= mid)
        lo = m + 1;
      else
        hi = m;
    }
    if (lo < seg.segments.size() && seg.segments[lo].start_s <= mid)
      out.unit_indices[lo].push_back(u);
    else
      ++out.dropped_units;
  }
  return out;
}

}  // namespace segaug

#endif  // SEGAUG_ALIGNER_HPP_
