// emissions.hpp
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
// Character-level emission log-probabilities for forced alignment.
//
// Binary form (one document per file, little-endian):
//   magic "SEGE", version u32, frame_period f32,
//   u32 vocab count, per symbol {u32 byte length, UTF-8 bytes},
//   u32 block count, per block {u64 first_frame, u64 frame_count,
//   f64 doc_start_s}, u64 T, T*V f32 row-major log-probs.
// The document id is the file's stem. A JSON Lines variant mirrors the
// probability format with "vocab" and "logprobs" fields.

#ifndef SEGAUG_EMISSIONS_HPP_
#define SEGAUG_EMISSIONS_HPP_

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "segaug/error.hpp"
#include "segaug/frame_probs.hpp"
#include "segaug/io.hpp"
#include "segaug/timeline.hpp"
#include "segaug/util.hpp"

namespace segaug {

inline const std::string kBlankSymbol = "∅";  // ∅
inline const std::string kBoundarySymbol = "|";

class EmissionMatrix {
 public:
  std::string doc_id;
  Timeline timeline;
  std::vector<std::string> vocab;
  std::vector<float> logprobs;  // T x V, row-major

  int64_t num_frames() const {
    return vocab.empty()
               ? 0
               : static_cast<int64_t>(logprobs.size() / vocab.size());
  }
  int vocab_size() const { return static_cast<int>(vocab.size()); }

  float at(int64_t t, int v) const {
    return logprobs[static_cast<size_t>(t) * vocab.size() +
                    static_cast<size_t>(v)];
  }

  int index_of(const std::string& symbol) const {
    auto it = index_.find(symbol);
    return it == index_.end() ? -1 : it->second;
  }
  int blank_index() const { return blank_; }
  int boundary_index() const { return boundary_; }

  void build_index() {
    index_.clear();
    for (size_t i = 0; i < vocab.size(); ++i)
      index_[vocab[i]] = static_cast<int>(i);
    blank_ = index_of(kBlankSymbol);
    boundary_ = index_of(kBoundarySymbol);
  }

  void validate() const {
    const std::string ctx = "emissions for doc " + doc_id;
    timeline.validate(ctx);
    if (vocab.empty()) throw DataError(ctx + ": empty vocabulary");
    if (blank_ < 0) throw DataError(ctx + ": vocabulary lacks blank symbol");
    if (boundary_ < 0)
      throw DataError(ctx + ": vocabulary lacks word-boundary symbol");
    if (logprobs.size() % vocab.size() != 0)
      throw DataError(ctx + ": log-prob matrix is not T x V");
    if (num_frames() != timeline.total_frames())
      throw DataError(ctx + ": " + std::to_string(num_frames()) +
                      " frames vs " + std::to_string(timeline.total_frames()) +
                      " timeline frames");
    // each row must be a distribution in log space
    const int V = vocab_size();
    for (int64_t t = 0; t < num_frames(); ++t) {
      double mx = -INFINITY;
      for (int v = 0; v < V; ++v) mx = std::max(mx, double(at(t, v)));
      double sum = 0.0;
      for (int v = 0; v < V; ++v) sum += std::exp(double(at(t, v)) - mx);
      double lse = mx + std::log(sum);
      if (std::abs(lse) > 1e-3)
        throw DataError(ctx + ": row " + std::to_string(t) +
                        " is not a distribution (logsumexp " +
                        std::to_string(lse) + ")");
    }
  }

  uint64_t content_digest() const {
    uint64_t h = fnv1a64(doc_id);
    h = fnv1a64(&timeline.frame_period_s, sizeof(double), h);
    for (const TimelineBlock& b : timeline.blocks) {
      h = fnv1a64(&b.first_frame, sizeof(b.first_frame), h);
      h = fnv1a64(&b.frame_count, sizeof(b.frame_count), h);
      h = fnv1a64(&b.doc_start_s, sizeof(b.doc_start_s), h);
    }
    for (const std::string& s : vocab) h = fnv1a64(s, h);
    if (!logprobs.empty())
      h = fnv1a64(logprobs.data(), logprobs.size() * sizeof(float), h);
    return h;
  }

 private:
  std::unordered_map<std::string, int> index_;
  int blank_ = -1;
  int boundary_ = -1;
};

inline constexpr uint32_t kSegeVersion = 1;

inline void save_emissions_binary(const EmissionMatrix& em,
                                  const std::filesystem::path& path) {
  BinaryWriter w;
  w.raw("SEGE", 4);
  w.u32(kSegeVersion);
  w.f32(static_cast<float>(em.timeline.frame_period_s));
  w.u32(static_cast<uint32_t>(em.vocab.size()));
  for (const std::string& s : em.vocab) w.str(s);
  w.u32(static_cast<uint32_t>(em.timeline.blocks.size()));
  for (const TimelineBlock& b : em.timeline.blocks) {
    w.u64(static_cast<uint64_t>(b.first_frame));
    w.u64(static_cast<uint64_t>(b.frame_count));
    w.f64(b.doc_start_s);
  }
  w.u64(static_cast<uint64_t>(em.num_frames()));
  for (float v : em.logprobs) w.f32(v);
  atomic_write_file(path, w.data());
}

inline EmissionMatrix load_emissions_binary(
    const std::filesystem::path& path) {
  BinaryReader r(read_file(path), path.string());
  char magic[4];
  r.raw(magic, 4);
  if (std::string(magic, 4) != "SEGE")
    throw DataError(path.string() + ": bad magic (expected SEGE)");
  uint32_t version = r.u32();
  if (version != kSegeVersion)
    throw DataError(path.string() + ": unsupported SEGE version " +
                    std::to_string(version));
  EmissionMatrix em;
  em.doc_id = path.stem().string();
  em.timeline.frame_period_s = r.f32();
  uint32_t nvocab = r.u32();
  for (uint32_t i = 0; i < nvocab; ++i) em.vocab.push_back(r.str());
  uint32_t nblocks = r.u32();
  for (uint32_t i = 0; i < nblocks; ++i) {
    TimelineBlock b;
    b.first_frame = static_cast<int64_t>(r.u64());
    b.frame_count = static_cast<int64_t>(r.u64());
    b.doc_start_s = r.f64();
    em.timeline.blocks.push_back(b);
  }
  uint64_t frames = r.u64();
  em.logprobs.resize(frames * nvocab);
  r.raw(em.logprobs.data(), em.logprobs.size() * sizeof(float));
  em.build_index();
  em.validate();
  return em;
}

inline std::vector<EmissionMatrix> load_emissions_jsonl(
    const std::filesystem::path& path) {
  std::vector<EmissionMatrix> out;
  for_each_line(path, [&](const std::string& line, size_t lineno) {
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      EmissionMatrix em;
      em.doc_id = j.at("doc_id").get<std::string>();
      em.timeline = detail::timeline_from_json(j);
      em.vocab = j.at("vocab").get<std::vector<std::string>>();
      for (const auto& row : j.at("logprobs"))
        for (const auto& v : row)
          em.logprobs.push_back(v.get<float>());
      em.build_index();
      em.validate();
      out.push_back(std::move(em));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + " line " + std::to_string(lineno) +
                      ": " + e.what());
    }
  });
  return out;
}

inline void save_emissions_jsonl(const std::vector<EmissionMatrix>& all,
                                 const std::filesystem::path& path) {
  std::string content;
  for (const EmissionMatrix& em : all) {
    nlohmann::json j = detail::timeline_to_json(em.timeline);
    j["doc_id"] = em.doc_id;
    j["vocab"] = em.vocab;
    nlohmann::json rows = nlohmann::json::array();
    const int V = em.vocab_size();
    for (int64_t t = 0; t < em.num_frames(); ++t) {
      nlohmann::json row = nlohmann::json::array();
      for (int v = 0; v < V; ++v) row.push_back(em.at(t, v));
      rows.push_back(std::move(row));
    }
    j["logprobs"] = std::move(rows);
    content += j.dump();
    content += '\n';
  }
  atomic_write_file(path, content);
}

// Accepts a JSONL file, a single .sege file, or a directory of .sege
// files.
inline std::vector<EmissionMatrix> load_emissions(
    const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  std::vector<EmissionMatrix> out;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path))
      if (entry.path().extension() == ".sege") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const fs::path& f : files) out.push_back(load_emissions_binary(f));
    return out;
  }
  if (path.extension() == ".sege") {
    out.push_back(load_emissions_binary(path));
    return out;
  }
  return load_emissions_jsonl(path);
}

}  // namespace segaug

#endif  // SEGAUG_EMISSIONS_HPP_
