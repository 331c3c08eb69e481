// segmenter.hpp
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
// Probability-driven hybrid audio segmentation.
//
// Both algorithms consume a sequence of per-frame speech probabilities
// and emit segments bounded by a (min,max) duration range and a
// classification threshold `thr`. Frames below `thr` are treated as
// non-speech: they are the preferred split points, they are excluded
// from emitted segments, and segment edges are trimmed past them.
//
// pdac: divide and conquer. A range longer than max is split at the
// globally lowest sub-threshold frame. The threshold condition
// outranks the duration range: if a range has any sub-threshold frame
// it is split there even when the resulting pieces violate `min`
// (such pieces carry `overflow`). Only when a range contains no
// sub-threshold frame does the splitter fall back to the lowest
// probability inside the min-distance window [s+Fmin, e-Fmin].
//
// pstrm: streaming. Walks left to right; within each window of at most
// max seconds it cuts at the lowest sub-threshold frame in
// [c+Fmin, c+Fmax), and when none exists the whole window becomes a
// segment. Emitted segment edges are trimmed of sub-threshold frames
// so that every boundary frame scores at least `thr`.
//
// Ties everywhere break toward the smallest frame index, which makes
// both algorithms deterministic.

#ifndef SEGAUG_SEGMENTER_HPP_
#define SEGAUG_SEGMENTER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "segaug/corpus.hpp"
#include "segaug/error.hpp"
#include "segaug/frame_probs.hpp"

namespace segaug {

struct SegmenterParams {
  double min_s = 0.4;
  double max_s = 30.0;
  double thr = 0.5;
  // Emitted segments shorter than this are discarded outright.
  double floor_s = 0.2;
  // When set, frames *above* thr are treated as split candidates
  // instead (the literal reading of the source formulation). Kept as
  // an explicit switch; never reinterpreted silently.
  bool invert_threshold = false;

  void validate() const {
    if (!(min_s > 0.0) || !(min_s < max_s))
      throw UsageError("segmenter requires 0 < min_s < max_s (got min=" +
                       std::to_string(min_s) + " max=" +
                       std::to_string(max_s) + ")");
    if (thr < 0.0 || thr > 1.0)
      throw UsageError("segmenter threshold must be in [0,1]");
  }
};

// Frame-index segment, half-open [begin, end).
// overflow: duration left the [min,max] range (threshold priority).
// via_threshold: a trim or sub-threshold split shaped this segment.
struct FrameSegment {
  int64_t begin = 0;
  int64_t end = 0;
  bool overflow = false;
  bool via_threshold = false;
};

struct TimeSegment {
  double start_s = 0.0;
  double end_s = 0.0;
  bool overflow = false;
  bool via_threshold = false;
};

struct Segmentation {
  std::vector<TimeSegment> segments;
  SegmenterParams params;
  Algorithm algorithm = Algorithm::kPdac;
};

namespace detail {

struct SegContext {
  std::span<const double> p;
  int64_t fmin = 1;
  int64_t fmax = 1;
  double thr = 0.5;
  bool invert = false;

  bool is_split_candidate(int64_t i) const {
    return invert ? p[i] > thr : p[i] < thr;
  }

  // Shrinks [s,e) past leading/trailing split-candidate frames.
  // Returns true when it removed anything.
  bool trim(int64_t& s, int64_t& e) const {
    int64_t s0 = s, e0 = e;
    while (s < e && is_split_candidate(s)) ++s;
    while (e > s && is_split_candidate(e - 1)) --e;
    return s != s0 || e != e0;
  }

  // Lowest-probability split candidate in (s,e), smallest index on
  // ties; -1 when none exists.
  int64_t best_candidate(int64_t s, int64_t e) const {
    int64_t best = -1;
    double best_p = 0.0;
    for (int64_t i = s + 1; i < e; ++i) {
      if (!is_split_candidate(i)) continue;
      if (best < 0 || p[i] < best_p) {
        best = i;
        best_p = p[i];
      }
    }
    return best;
  }

  // argmin p over [lo,hi] inclusive, smallest index on ties.
  int64_t argmin(int64_t lo, int64_t hi) const {
    int64_t best = lo;
    for (int64_t i = lo + 1; i <= hi; ++i)
      if (p[i] < p[best]) best = i;
    return best;
  }
};

inline void frame_params(const SegmenterParams& params, double frame_period_s,
                         int64_t* fmin, int64_t* fmax) {
  *fmin = static_cast<int64_t>(std::ceil(params.min_s / frame_period_s));
  *fmax = static_cast<int64_t>(std::floor(params.max_s / frame_period_s));
  if (*fmin < 1) *fmin = 1;
  if (*fmax < 1) *fmax = 1;  // a max below one frame degenerates
}

}  // namespace detail

inline std::vector<FrameSegment> pdac_frames(std::span<const double> probs,
                                             double frame_period_s,
                                             const SegmenterParams& params) {
  params.validate();
  std::vector<FrameSegment> out;
  const int64_t total = static_cast<int64_t>(probs.size());
  if (total == 0) return out;

  detail::SegContext ctx;
  ctx.p = probs;
  ctx.thr = params.thr;
  ctx.invert = params.invert_threshold;
  detail::frame_params(params, frame_period_s, &ctx.fmin, &ctx.fmax);

  struct Piece {
    int64_t s, e;
    bool via;
  };
  std::vector<Piece> stack;
  {
    int64_t s = 0, e = total;
    bool via = ctx.trim(s, e);
    if (s < e) stack.push_back({s, e, via});
  }
  while (!stack.empty()) {
    Piece piece = stack.back();
    stack.pop_back();
    const int64_t len = piece.e - piece.s;
    if (len <= ctx.fmax || len <= 1) {
      out.push_back({piece.s, piece.e, len < ctx.fmin, piece.via});
      continue;
    }
    int64_t cut = ctx.best_candidate(piece.s, piece.e);
    if (cut < 0) {
      int64_t lo = piece.s + ctx.fmin;
      int64_t hi = piece.e - ctx.fmin;
      if (lo > hi) {
        lo = piece.s + 1;
        hi = piece.e - 1;
      }
      cut = ctx.argmin(lo, hi);
    }
    if (ctx.is_split_candidate(cut)) {
      // threshold-priority split; the cut frame is non-speech and
      // is excluded from both sides
      int64_t ls = piece.s, le = cut;
      int64_t rs = cut + 1, re = piece.e;
      ctx.trim(ls, le);
      ctx.trim(rs, re);
      // push right first so the left side is processed first
      if (rs < re) stack.push_back({rs, re, true});
      if (ls < le) stack.push_back({ls, le, true});
    } else {
      stack.push_back({cut, piece.e, piece.via});
      stack.push_back({piece.s, cut, piece.via});
    }
  }

  std::sort(out.begin(), out.end(),
            [](const FrameSegment& a, const FrameSegment& b) {
              return a.begin < b.begin;
            });
  // absolute duration floor
  std::erase_if(out, [&](const FrameSegment& seg) {
    return static_cast<double>(seg.end - seg.begin) * frame_period_s <
           params.floor_s;
  });
  return out;
}

inline std::vector<FrameSegment> pstrm_frames(std::span<const double> probs,
                                              double frame_period_s,
                                              const SegmenterParams& params) {
  params.validate();
  std::vector<FrameSegment> out;
  const int64_t total = static_cast<int64_t>(probs.size());
  if (total == 0) return out;

  detail::SegContext ctx;
  ctx.p = probs;
  ctx.thr = params.thr;
  ctx.invert = params.invert_threshold;
  detail::frame_params(params, frame_period_s, &ctx.fmin, &ctx.fmax);

  int64_t begin = 0, end = total;
  ctx.trim(begin, end);
  int64_t cursor = begin;
  while (cursor < end) {
    if (end - cursor <= ctx.fmax) {
      int64_t s = cursor, e = end;
      bool via = ctx.trim(s, e);
      if (s < e) out.push_back({s, e, e - s < ctx.fmin, via});
      break;
    }
    int64_t cut = -1;
    double cut_p = 0.0;
    for (int64_t i = cursor + ctx.fmin; i < cursor + ctx.fmax; ++i) {
      if (!ctx.is_split_candidate(i)) continue;
      if (cut < 0 || probs[i] < cut_p) {
        cut = i;
        cut_p = probs[i];
      }
    }
    if (cut >= 0) {
      int64_t s = cursor, e = cut;
      ctx.trim(s, e);
      if (s < e) out.push_back({s, e, e - s < ctx.fmin, true});
      cursor = cut + 1;
    } else {
      // no candidate: the whole stream window becomes a segment,
      // edge-trimmed so boundary frames stay at or above thr
      int64_t s = cursor, e = cursor + ctx.fmax;
      bool via = ctx.trim(s, e);
      if (s < e) out.push_back({s, e, e - s < ctx.fmin, via});
      cursor += ctx.fmax;
    }
  }

  std::erase_if(out, [&](const FrameSegment& seg) {
    return static_cast<double>(seg.end - seg.begin) * frame_period_s <
           params.floor_s;
  });
  return out;
}

namespace detail {

inline Segmentation to_time_segments(const std::vector<FrameSegment>& frames,
                                     const Timeline& timeline,
                                     const SegmenterParams& params,
                                     Algorithm algorithm) {
  Segmentation seg;
  seg.params = params;
  seg.algorithm = algorithm;
  seg.segments.reserve(frames.size());
  for (const FrameSegment& f : frames) {
    TimeSegment t;
    t.start_s = timeline.time_of(f.begin);
    t.end_s = timeline.end_time_of(f.end - 1);
    t.overflow = f.overflow;
    t.via_threshold = f.via_threshold;
    seg.segments.push_back(t);
  }
  return seg;
}

}  // namespace detail

inline Segmentation pdac(const FrameProbabilities& probs,
                         const SegmenterParams& params) {
  std::vector<FrameSegment> frames =
      pdac_frames(probs.values, probs.timeline.frame_period_s, params);
  return detail::to_time_segments(frames, probs.timeline, params,
                                  Algorithm::kPdac);
}

inline Segmentation pstrm(const FrameProbabilities& probs,
                          const SegmenterParams& params) {
  std::vector<FrameSegment> frames =
      pstrm_frames(probs.values, probs.timeline.frame_period_s, params);
  return detail::to_time_segments(frames, probs.timeline, params,
                                  Algorithm::kPstrm);
}

inline Segmentation segment_with(Algorithm algorithm,
                                 const FrameProbabilities& probs,
                                 const SegmenterParams& params) {
  return algorithm == Algorithm::kPdac ? pdac(probs, params)
                                       : pstrm(probs, params);
}

// ── View planning ────────────────────────────────────────────────────

// Partitions [lo_s, hi_s] into mu non-overlapping duration ranges.
// The default four-way plan over (0.4, 30) is
//   (0.4,3) (3,10) (10,20) (20,30)
// with the streaming algorithm on the last range only (long minimums
// starve the divide-and-conquer splitter). Other mu values select cut
// points from the default set, or interpolate geometrically once the
// defaults run out. A single-view plan keeps divide and conquer.
inline std::vector<ViewSpec> plan_views(int mu, double lo_s = 0.4,
                                        double hi_s = 30.0) {
  if (mu < 1) throw UsageError("plan_views requires mu >= 1");
  if (!(lo_s > 0.0) || !(lo_s < hi_s))
    throw UsageError("plan_views requires 0 < lo_s < hi_s");

  const bool default_space = std::abs(lo_s - 0.4) < 1e-9 &&
                             std::abs(hi_s - 30.0) < 1e-9;
  static const double kDefaultCuts[] = {3.0, 10.0, 20.0};

  std::vector<double> bounds;
  bounds.push_back(lo_s);
  if (default_space && mu - 1 <= 3) {
    for (int j = 1; j < mu; ++j) {
      int idx = static_cast<int>(std::lround(j * 4.0 / mu)) - 1;
      if (idx < 0) idx = 0;
      if (idx > 2) idx = 2;
      bounds.push_back(kDefaultCuts[idx]);
    }
  } else {
    const double ratio = hi_s / lo_s;
    for (int j = 1; j < mu; ++j)
      bounds.push_back(lo_s * std::pow(ratio, static_cast<double>(j) / mu));
  }
  bounds.push_back(hi_s);

  static const char* kDefaultTags[] = {"s", "m", "l", "xl"};
  std::vector<ViewSpec> views;
  for (int i = 0; i < mu; ++i) {
    ViewSpec v;
    v.tag = (mu == 4 && default_space) ? kDefaultTags[i]
                                       : "v" + std::to_string(i + 1);
    v.min_s = bounds[i];
    v.max_s = bounds[i + 1];
    v.algorithm = Algorithm::kPdac;
    views.push_back(v);
  }
  if (mu >= 2 && views.back().max_s >= 20.0)
    views.back().algorithm = Algorithm::kPstrm;
  return views;
}

}  // namespace segaug

#endif  // SEGAUG_SEGMENTER_HPP_
