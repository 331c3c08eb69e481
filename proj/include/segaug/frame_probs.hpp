// frame_probs.hpp
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
// Per-frame speech-inclusion probabilities with a block timeline.
//
// Two on-disk forms:
//  * JSON Lines, one document per line:
//      {"doc_id","frame_period_s",
//       "blocks":[{"first_frame","frame_count","doc_start_s"}],
//       "values":[...]}
//  * Binary (one document per file, little-endian):
//      magic "SEGP", version u32, frame_period f32,
//      u32 block count, per block {u64 first_frame, u64 frame_count,
//      f64 doc_start_s}, u64 value count, f32 values.
//    The document id is the file's stem.

#ifndef SEGAUG_FRAME_PROBS_HPP_
#define SEGAUG_FRAME_PROBS_HPP_

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "segaug/error.hpp"
#include "segaug/io.hpp"
#include "segaug/timeline.hpp"
#include "segaug/util.hpp"

namespace segaug {

struct FrameProbabilities {
  std::string doc_id;
  Timeline timeline;
  std::vector<double> values;

  void validate() const {
    const std::string ctx = "probabilities for doc " + doc_id;
    timeline.validate(ctx);
    if (static_cast<int64_t>(values.size()) != timeline.total_frames())
      throw DataError(ctx + ": " + std::to_string(values.size()) +
                      " values vs " + std::to_string(timeline.total_frames()) +
                      " timeline frames");
    for (double v : values)
      if (v < 0.0 || v > 1.0 || !(v == v))
        throw DataError(ctx + ": probability outside [0,1]");
  }

  // Stable digest over everything that influences segmentation.
  uint64_t content_digest() const {
    uint64_t h = fnv1a64(doc_id);
    h = fnv1a64(&timeline.frame_period_s, sizeof(double), h);
    for (const TimelineBlock& b : timeline.blocks) {
      h = fnv1a64(&b.first_frame, sizeof(b.first_frame), h);
      h = fnv1a64(&b.frame_count, sizeof(b.frame_count), h);
      h = fnv1a64(&b.doc_start_s, sizeof(b.doc_start_s), h);
    }
    if (!values.empty())
      h = fnv1a64(values.data(), values.size() * sizeof(double), h);
    return h;
  }
};

namespace detail {

inline Timeline timeline_from_json(const nlohmann::json& j) {
  Timeline tl;
  tl.frame_period_s = j.at("frame_period_s").get<double>();
  for (const auto& jb : j.at("blocks")) {
    TimelineBlock b;
    b.first_frame = jb.at("first_frame").get<int64_t>();
    b.frame_count = jb.at("frame_count").get<int64_t>();
    b.doc_start_s = jb.at("doc_start_s").get<double>();
    tl.blocks.push_back(b);
  }
  return tl;
}

inline nlohmann::json timeline_to_json(const Timeline& tl) {
  nlohmann::json j;
  j["frame_period_s"] = tl.frame_period_s;
  j["blocks"] = nlohmann::json::array();
  for (const TimelineBlock& b : tl.blocks)
    j["blocks"].push_back({{"first_frame", b.first_frame},
                           {"frame_count", b.frame_count},
                           {"doc_start_s", b.doc_start_s}});
  return j;
}

}  // namespace detail

inline std::vector<FrameProbabilities> load_probabilities_jsonl(
    const std::filesystem::path& path) {
  std::vector<FrameProbabilities> out;
  for_each_line(path, [&](const std::string& line, size_t lineno) {
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      FrameProbabilities fp;
      fp.doc_id = j.at("doc_id").get<std::string>();
      fp.timeline = detail::timeline_from_json(j);
      fp.values = j.at("values").get<std::vector<double>>();
      fp.validate();
      out.push_back(std::move(fp));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + " line " + std::to_string(lineno) +
                      ": " + e.what());
    }
  });
  return out;
}

inline void save_probabilities_jsonl(
    const std::vector<FrameProbabilities>& probs,
    const std::filesystem::path& path) {
  std::string content;
  for (const FrameProbabilities& fp : probs) {
    nlohmann::json j = detail::timeline_to_json(fp.timeline);
    j["doc_id"] = fp.doc_id;
    j["values"] = fp.values;
    content += j.dump();
    content += '\n';
  }
  atomic_write_file(path, content);
}

inline constexpr uint32_t kSegpVersion = 1;

inline void save_probabilities_binary(const FrameProbabilities& fp,
                                      const std::filesystem::path& path) {
  BinaryWriter w;
  w.raw("SEGP", 4);
  w.u32(kSegpVersion);
  w.f32(static_cast<float>(fp.timeline.frame_period_s));
  w.u32(static_cast<uint32_t>(fp.timeline.blocks.size()));
  for (const TimelineBlock& b : fp.timeline.blocks) {
    w.u64(static_cast<uint64_t>(b.first_frame));
    w.u64(static_cast<uint64_t>(b.frame_count));
    w.f64(b.doc_start_s);
  }
  w.u64(fp.values.size());
  for (double v : fp.values) w.f32(static_cast<float>(v));
  atomic_write_file(path, w.data());
}

inline FrameProbabilities load_probabilities_binary(
    const std::filesystem::path& path) {
  BinaryReader r(read_file(path), path.string());
  char magic[4];
  r.raw(magic, 4);
  if (std::string(magic, 4) != "SEGP")
    throw DataError(path.string() + ": bad magic (expected SEGP)");
  uint32_t version = r.u32();
  if (version != kSegpVersion)
    throw DataError(path.string() + ": unsupported SEGP version " +
                    std::to_string(version));
  FrameProbabilities fp;
  fp.doc_id = path.stem().string();
  fp.timeline.frame_period_s = r.f32();
  uint32_t nblocks = r.u32();
  for (uint32_t i = 0; i < nblocks; ++i) {
    TimelineBlock b;
    b.first_frame = static_cast<int64_t>(r.u64());
    b.frame_count = static_cast<int64_t>(r.u64());
    b.doc_start_s = r.f64();
    fp.timeline.blocks.push_back(b);
  }
  uint64_t nvalues = r.u64();
  fp.values.reserve(nvalues);
  for (uint64_t i = 0; i < nvalues; ++i)
    fp.values.push_back(static_cast<double>(r.f32()));
  fp.validate();
  return fp;
}

// Accepts a JSONL file, a single .segp file, or a directory of .segp
// files.
inline std::vector<FrameProbabilities> load_probabilities(
    const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  std::vector<FrameProbabilities> out;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path))
      if (entry.path().extension() == ".segp") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const fs::path& f : files)
      out.push_back(load_probabilities_binary(f));
    return out;
  }
  if (path.extension() == ".segp") {
    out.push_back(load_probabilities_binary(path));
    return out;
  }
  return load_probabilities_jsonl(path);
}

}  // namespace segaug

#endif  // SEGAUG_FRAME_PROBS_HPP_
