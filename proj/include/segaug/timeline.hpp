// timeline.hpp
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
// Frame-to-document-time mapping. Frame arrays (speech probabilities,
// emission matrices) are concatenations of per-utterance blocks; gaps
// between blocks carry no frames. A block maps a contiguous frame range
// onto an absolute position in document time.

#ifndef SEGAUG_TIMELINE_HPP_
#define SEGAUG_TIMELINE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "segaug/error.hpp"

namespace segaug {

struct TimelineBlock {
  int64_t first_frame = 0;
  int64_t frame_count = 0;
  double doc_start_s = 0.0;
};

struct Timeline {
  double frame_period_s = 0.02;
  std::vector<TimelineBlock> blocks;

  int64_t total_frames() const {
    if (blocks.empty()) return 0;
    const TimelineBlock& b = blocks.back();
    return b.first_frame + b.frame_count;
  }

  // Blocks must tile the frame range [0, T) contiguously and be
  // strictly ordered and disjoint in document time.
  void validate(const std::string& context) const {
    if (frame_period_s <= 0.0)
      throw DataError(context + ": frame_period_s must be positive");
    int64_t expect = 0;
    double prev_end = -1.0;
    for (size_t i = 0; i < blocks.size(); ++i) {
      const TimelineBlock& b = blocks[i];
      if (b.first_frame != expect)
        throw DataError(context + ": block " + std::to_string(i) +
                        " does not start at frame " + std::to_string(expect));
      if (b.frame_count <= 0)
        throw DataError(context + ": block " + std::to_string(i) +
                        " has non-positive frame_count");
      if (b.doc_start_s < prev_end - 1e-9)
        throw DataError(context + ": block " + std::to_string(i) +
                        " overlaps the previous block in document time");
      expect = b.first_frame + b.frame_count;
      prev_end = b.doc_start_s + b.frame_count * frame_period_s;
    }
  }

  const TimelineBlock& block_of(int64_t frame) const {
    // binary search over first_frame
    size_t lo = 0, hi = blocks.size();
    while (lo < hi) {
      size_t mid = (lo + hi) / 2;
      if (blocks[mid].first_frame + blocks[mid].frame_count <= frame)
        lo = mid + 1;
      else
        hi = mid;
    }
    if (lo >= blocks.size() || frame < blocks[lo].first_frame || frame < 0)
      throw DataError("frame " + std::to_string(frame) +
                      " is outside all timeline blocks");
    return blocks[lo];
  }

  // Document time of the start of `frame`.
  double time_of(int64_t frame) const {
    const TimelineBlock& b = block_of(frame);
    return b.doc_start_s + static_cast<double>(frame - b.first_frame) *
                               frame_period_s;
  }

  // Document time of the end of `frame` (start of the next frame slot).
  double end_time_of(int64_t frame) const {
    return time_of(frame) + frame_period_s;
  }
};

inline double frame_to_doc_time(int64_t frame, const Timeline& timeline) {
  return timeline.time_of(frame);
}

}  // namespace segaug

#endif  // SEGAUG_TIMELINE_HPP_
