// corpus.hpp
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
// Domain model and manifest I/O for document-level speech translation
// corpora and the sentence-level views derived from them.
//
// Manifests are JSON Lines, one document per line:
//   {"id", "duration_s", "segments":[{"index","start_s","end_s",
//    "src_text","tgt_text"}], "doc_translation"?}
// View outputs are JSON Lines, one example per line:
//   {"doc_id","view","start_s","end_s","src_text","tgt_text"?,
//    "special_token"?}
// All second values carry exactly three decimals.

#ifndef SEGAUG_CORPUS_HPP_
#define SEGAUG_CORPUS_HPP_

#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "segaug/error.hpp"
#include "segaug/io.hpp"
#include "segaug/log.hpp"
#include "segaug/util.hpp"

namespace segaug {

enum class Algorithm { kPdac, kPstrm };

inline std::string algorithm_name(Algorithm a) {
  return a == Algorithm::kPdac ? "pdac" : "pstrm";
}

inline Algorithm algorithm_from_name(const std::string& name) {
  if (name == "pdac") return Algorithm::kPdac;
  if (name == "pstrm") return Algorithm::kPstrm;
  throw UsageError("unknown segmentation algorithm: " + name);
}

struct ManualSegment {
  int index = 0;
  double start_s = 0.0;
  double end_s = 0.0;
  std::string src_text;
  std::string tgt_text;

  double duration_s() const { return end_s - start_s; }
};

struct Document {
  std::string id;
  double duration_s = 0.0;
  std::vector<ManualSegment> manual_segments;
  std::optional<std::string> doc_translation;
};

// One (min,max) duration range plus the algorithm that realizes it.
struct ViewSpec {
  std::string tag;
  double min_s = 0.0;
  double max_s = 0.0;
  Algorithm algorithm = Algorithm::kPdac;
};

// One alternative sentence-level triplet. `overflow` marks examples
// whose duration was allowed outside the planned range because the
// segmenter prioritized the probability threshold.
struct AugmentedExample {
  std::string doc_id;
  std::string view_tag;
  double start_s = 0.0;
  double end_s = 0.0;
  std::string src_text;
  std::optional<std::string> tgt_text;
  std::optional<std::string> special_token;
  bool overflow = false;

  double duration_s() const { return end_s - start_s; }
};

// ── Validation ───────────────────────────────────────────────────────

inline void validate_document(const Document& doc) {
  if (doc.id.empty()) throw DataError("document with empty id");
  if (doc.duration_s < 0.0)
    throw DataError("doc " + doc.id + ": negative duration_s");
  double prev_end = 0.0;
  for (size_t i = 0; i < doc.manual_segments.size(); ++i) {
    const ManualSegment& seg = doc.manual_segments[i];
    const std::string where =
        "doc " + doc.id + " segment " + std::to_string(seg.index);
    if (seg.index != static_cast<int>(i))
      throw DataError("doc " + doc.id + ": segment indices not contiguous (" +
                      std::to_string(seg.index) + " at position " +
                      std::to_string(i) + ")");
    if (seg.start_s < 0.0) throw DataError(where + ": start_s negative");
    if (seg.end_s <= seg.start_s)
      throw DataError(where + ": end_s <= start_s");
    if (seg.end_s > doc.duration_s + 1e-9)
      throw DataError(where + ": end_s exceeds duration_s");
    if (seg.src_text.empty()) throw DataError(where + ": src_text empty");
    if (i > 0 && seg.start_s < prev_end - 1e-9)
      throw DataError(where + ": segments overlap");
    prev_end = seg.end_s;
  }
}

inline void validate_example(const AugmentedExample& ex) {
  const std::string where = "example " + ex.doc_id + "/" + ex.view_tag;
  if (ex.start_s >= ex.end_s) throw DataError(where + ": start_s >= end_s");
  const double d = ex.duration_s();
  if (!ex.overflow && (d < 0.4 - 1e-9 || d > 30.0 + 1e-9))
    throw DataError(where + ": duration " + format_seconds(d) +
                    " outside [0.4, 30] without overflow flag");
}

// ── Manifest I/O ─────────────────────────────────────────────────────

struct LoadCorpusOptions {
  // Overlaps up to this many seconds are repaired by clamping the
  // earlier segment's end to the next start (counted as warnings).
  // Zero means any overlap is an error.
  double repair_overlap_s = 0.0;
};

inline std::vector<Document> load_corpus(
    const std::filesystem::path& path,
    const LoadCorpusOptions& opts = {}) {
  std::vector<Document> docs;
  size_t repaired = 0;
  for_each_line(path, [&](const std::string& line, size_t lineno) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + " line " + std::to_string(lineno) +
                      ": " + e.what());
    }
    try {
      Document doc;
      doc.id = j.at("id").get<std::string>();
      doc.duration_s = j.at("duration_s").get<double>();
      if (j.contains("doc_translation") && !j["doc_translation"].is_null())
        doc.doc_translation = j["doc_translation"].get<std::string>();
      for (const auto& js : j.at("segments")) {
        ManualSegment seg;
        seg.index = js.at("index").get<int>();
        seg.start_s = js.at("start_s").get<double>();
        seg.end_s = js.at("end_s").get<double>();
        seg.src_text = js.at("src_text").get<std::string>();
        seg.tgt_text = js.value("tgt_text", std::string());
        doc.manual_segments.push_back(std::move(seg));
      }
      if (opts.repair_overlap_s > 0.0) {
        for (size_t i = 0; i + 1 < doc.manual_segments.size(); ++i) {
          ManualSegment& cur = doc.manual_segments[i];
          const ManualSegment& nxt = doc.manual_segments[i + 1];
          double overlap = cur.end_s - nxt.start_s;
          if (overlap > 0.0 && overlap <= opts.repair_overlap_s &&
              nxt.start_s > cur.start_s) {
            cur.end_s = nxt.start_s;
            ++repaired;
          }
        }
      }
      validate_document(doc);
      docs.push_back(std::move(doc));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + " line " + std::to_string(lineno) +
                      ": " + e.what());
    }
  });
  if (repaired > 0)
    log_warn(std::to_string(repaired) + " overlapping manual segments "
             "repaired by clamping end_s (" + path.string() + ")");
  return docs;
}

namespace detail {
inline std::string json_escape(const std::string& s) {
  return nlohmann::json(s).dump();
}
}  // namespace detail

inline std::string document_to_jsonl(const Document& doc) {
  std::string out = "{\"id\":" + detail::json_escape(doc.id) +
                    ",\"duration_s\":" + format_seconds(doc.duration_s) +
                    ",\"segments\":[";
  for (size_t i = 0; i < doc.manual_segments.size(); ++i) {
    const ManualSegment& seg = doc.manual_segments[i];
    if (i) out += ',';
    out += "{\"index\":" + std::to_string(seg.index) +
           ",\"start_s\":" + format_seconds(seg.start_s) +
           ",\"end_s\":" + format_seconds(seg.end_s) +
           ",\"src_text\":" + detail::json_escape(seg.src_text) +
           ",\"tgt_text\":" + detail::json_escape(seg.tgt_text) + "}";
  }
  out += "]";
  if (doc.doc_translation)
    out += ",\"doc_translation\":" + detail::json_escape(*doc.doc_translation);
  out += "}";
  return out;
}

inline void save_corpus(const std::vector<Document>& docs,
                        const std::filesystem::path& path) {
  std::string content;
  for (const Document& doc : docs) {
    content += document_to_jsonl(doc);
    content += '\n';
  }
  atomic_write_file(path, content);
}

// Space-joined source transcript over the manual segments, with each
// segment's whitespace normalized.
inline std::string doc_transcript(const Document& doc) {
  std::string out;
  for (const ManualSegment& seg : doc.manual_segments) {
    std::string t = collapse_whitespace(seg.src_text);
    if (t.empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

// ── View I/O ─────────────────────────────────────────────────────────

struct SaveViewOptions {
  bool tsv = false;
  // Prepend the special token to tgt_text at export time.
  bool prepend_special = false;
};

inline std::string example_to_jsonl(const AugmentedExample& ex,
                                    bool prepend_special = false) {
  std::string out = "{";
  if (ex.special_token)
    out += "\"special_token\":" + detail::json_escape(*ex.special_token) + ",";
  out += "\"doc_id\":" + detail::json_escape(ex.doc_id) +
         ",\"view\":" + detail::json_escape(ex.view_tag) +
         ",\"start_s\":" + format_seconds(ex.start_s) +
         ",\"end_s\":" + format_seconds(ex.end_s) +
         ",\"src_text\":" + detail::json_escape(ex.src_text);
  if (ex.tgt_text) {
    std::string tgt = *ex.tgt_text;
    if (prepend_special && ex.special_token)
      tgt = *ex.special_token + " " + tgt;
    out += ",\"tgt_text\":" + detail::json_escape(tgt);
  }
  if (ex.overflow) out += ",\"overflow\":true";
  out += "}";
  return out;
}

inline std::string example_to_tsv(const AugmentedExample& ex,
                                  bool prepend_special = false) {
  std::string tgt = ex.tgt_text.value_or("");
  if (prepend_special && ex.special_token && ex.tgt_text)
    tgt = *ex.special_token + " " + tgt;
  return ex.doc_id + "\t" + ex.view_tag + "\t" + format_seconds(ex.start_s) +
         "\t" + format_seconds(ex.end_s) + "\t" + ex.src_text + "\t" + tgt +
         "\t" + ex.special_token.value_or("");
}

inline void save_view(const std::vector<AugmentedExample>& examples,
                      const std::filesystem::path& path,
                      const SaveViewOptions& opts = {}) {
  std::string content;
  for (const AugmentedExample& ex : examples) {
    validate_example(ex);
    content += opts.tsv ? example_to_tsv(ex, opts.prepend_special)
                        : example_to_jsonl(ex, opts.prepend_special);
    content += '\n';
  }
  atomic_write_file(path, content);
}

inline std::vector<AugmentedExample> load_view(
    const std::filesystem::path& path) {
  std::vector<AugmentedExample> out;
  for_each_line(path, [&](const std::string& line, size_t lineno) {
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      AugmentedExample ex;
      ex.doc_id = j.at("doc_id").get<std::string>();
      ex.view_tag = j.at("view").get<std::string>();
      ex.start_s = j.at("start_s").get<double>();
      ex.end_s = j.at("end_s").get<double>();
      ex.src_text = j.at("src_text").get<std::string>();
      if (j.contains("tgt_text") && !j["tgt_text"].is_null())
        ex.tgt_text = j["tgt_text"].get<std::string>();
      if (j.contains("special_token") && !j["special_token"].is_null())
        ex.special_token = j["special_token"].get<std::string>();
      ex.overflow = j.value("overflow", false);
      out.push_back(std::move(ex));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + " line " + std::to_string(lineno) +
                      ": " + e.what());
    }
  });
  return out;
}

}  // namespace segaug

#endif  // SEGAUG_CORPUS_HPP_
