// analysis.hpp
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
// Corpus analysis: contextual-overlap categorization of view segments
// against the manual segmentation, positional token histograms,
// duration bucketing, and per-view statistics.

#ifndef SEGAUG_ANALYSIS_HPP_
#define SEGAUG_ANALYSIS_HPP_

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "segaug/corpus.hpp"
#include "segaug/util.hpp"

namespace segaug {

enum class OverlapCategory { kEqual, kIsolated, kExpanded, kMixed };

inline std::string overlap_category_name(OverlapCategory c) {
  switch (c) {
    case OverlapCategory::kEqual: return "equal";
    case OverlapCategory::kIsolated: return "isolated";
    case OverlapCategory::kExpanded: return "expanded";
    case OverlapCategory::kMixed: return "mixed";
  }
  return "?";
}

// How a view segment [start,end) relates to the manual segmentation,
// within tolerance eps. Priority: equal (same boundaries), isolated
// (inside one manual segment), expanded (covers one whole manual
// segment), mixed (any other overlap). A segment overlapping nothing
// counts as mixed; `gap` reports that case separately.
inline OverlapCategory categorize_overlap(
    double start_s, double end_s,
    const std::vector<std::pair<double, double>>& manual, double eps_s = 0.2,
    bool* gap = nullptr) {
  if (gap) *gap = false;
  bool isolated = false, expanded = false, overlaps = false;
  for (const auto& [ms, me] : manual) {
    if (std::abs(ms - start_s) <= eps_s && std::abs(me - end_s) <= eps_s)
      return OverlapCategory::kEqual;
    if (ms - eps_s <= start_s && end_s <= me + eps_s) isolated = true;
    if (start_s - eps_s <= ms && me <= end_s + eps_s) expanded = true;
    if (ms < end_s && start_s < me) overlaps = true;
  }
  if (isolated) return OverlapCategory::kIsolated;
  if (expanded) return OverlapCategory::kExpanded;
  if (!overlaps && gap) *gap = true;
  return OverlapCategory::kMixed;
}

struct OverlapReport {
  size_t equal = 0, isolated = 0, expanded = 0, mixed = 0;
  size_t gap_only = 0;  // mixed segments that overlap no manual segment

  size_t total() const { return equal + isolated + expanded + mixed; }
  double pct(size_t n) const {
    return total() ? 100.0 * static_cast<double>(n) /
                         static_cast<double>(total())
                   : 0.0;
  }

  void add(OverlapCategory c, bool gap) {
    switch (c) {
      case OverlapCategory::kEqual: ++equal; break;
      case OverlapCategory::kIsolated: ++isolated; break;
      case OverlapCategory::kExpanded: ++expanded; break;
      case OverlapCategory::kMixed:
        ++mixed;
        if (gap) ++gap_only;
        break;
    }
  }
};

// Categorizes every view example against its document's manual
// segmentation. Examples for unknown documents are skipped.
inline std::map<std::string, OverlapReport> overlap_report_by_view(
    const std::vector<AugmentedExample>& examples,
    const std::vector<Document>& corpus, double eps_s = 0.2) {
  std::map<std::string, std::vector<std::pair<double, double>>> manual;
  for (const Document& doc : corpus) {
    auto& v = manual[doc.id];
    for (const ManualSegment& seg : doc.manual_segments)
      v.emplace_back(seg.start_s, seg.end_s);
  }
  std::map<std::string, OverlapReport> out;
  for (const AugmentedExample& ex : examples) {
    auto it = manual.find(ex.doc_id);
    if (it == manual.end()) continue;
    bool gap = false;
    OverlapCategory c =
        categorize_overlap(ex.start_s, ex.end_s, it->second, eps_s, &gap);
    out[ex.view_tag].add(c, gap);
  }
  return out;
}

// Counts occurrences of `token` by absolute word position (0-based)
// across the given texts.
inline std::map<size_t, size_t> position_histogram(
    const std::vector<std::string>& texts, const std::string& token) {
  std::map<size_t, size_t> hist;
  for (const std::string& text : texts) {
    std::vector<std::string> words = split_whitespace(text);
    for (size_t i = 0; i < words.size(); ++i)
      if (words[i] == token) ++hist[i];
  }
  return hist;
}

// Buckets example indices by duration into the planned view ranges
// (half-open [min,max)). Durations past the last range land in the
// last bucket; durations below the first range land in the first.
inline std::map<std::string, std::vector<size_t>> duration_buckets(
    const std::vector<AugmentedExample>& examples,
    const std::vector<ViewSpec>& views) {
  if (views.empty()) throw UsageError("duration_buckets: no views");
  std::map<std::string, std::vector<size_t>> out;
  for (const ViewSpec& v : views) out[v.tag];  // stable empty buckets
  for (size_t i = 0; i < examples.size(); ++i) {
    const double d = examples[i].duration_s();
    const ViewSpec* chosen = &views.back();
    for (const ViewSpec& v : views) {
      if (d < v.max_s) {
        chosen = &v;
        break;
      }
    }
    out[chosen->tag].push_back(i);
  }
  return out;
}

struct ViewStats {
  size_t count = 0;
  std::optional<double> mean_duration_s;
};

inline std::map<std::string, ViewStats> view_stats(
    const std::vector<AugmentedExample>& examples) {
  std::map<std::string, std::pair<size_t, double>> acc;
  for (const AugmentedExample& ex : examples) {
    auto& [count, sum] = acc[ex.view_tag];
    ++count;
    sum += ex.duration_s();
  }
  std::map<std::string, ViewStats> out;
  for (const auto& [tag, cs] : acc) {
    ViewStats s;
    s.count = cs.first;
    if (cs.first) s.mean_duration_s = cs.second / static_cast<double>(cs.first);
    out[tag] = s;
  }
  return out;
}

}  // namespace segaug

#endif  // SEGAUG_ANALYSIS_HPP_
