// translate.hpp
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
// Target-text generation contract. The actual MT model is external;
// this module provides the pluggable translator port, builds the
// concatenated training pairs that match a view's length profile, and
// scores translations at the document level.
//
// External translator protocol: `<command> <in_path> <out_path>`,
// UTF-8, one sentence per line, exit 0 on success, same line count.

#ifndef SEGAUG_TRANSLATE_HPP_
#define SEGAUG_TRANSLATE_HPP_

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "segaug/bleu.hpp"
#include "segaug/corpus.hpp"
#include "segaug/error.hpp"
#include "segaug/io.hpp"
#include "segaug/util.hpp"

namespace segaug {

struct TranslatorPort {
  enum class Kind { kIdentity, kLexicon, kExternal };
  Kind kind = Kind::kIdentity;
  std::map<std::string, std::string> lexicon;  // kLexicon
  std::string command;                         // kExternal
  size_t batch_size = 64;
  double timeout_s = 0.0;  // 0 = no timeout

  // A stable description of everything that affects outputs.
  std::string spec_string() const {
    switch (kind) {
      case Kind::kIdentity:
        return "identity";
      case Kind::kLexicon: {
        uint64_t h = 0xcbf29ce484222325ULL;
        for (const auto& [k, v] : lexicon) {
          h = fnv1a64(k, h);
          h = fnv1a64(v, h);
        }
        return "lexicon:" + hex64(h);
      }
      case Kind::kExternal:
        return "command:" + command;
    }
    return "?";
  }
};

inline std::map<std::string, std::string> load_translation_lexicon(
    const std::filesystem::path& path) {
  std::map<std::string, std::string> lex;
  for_each_line(path, [&](const std::string& line, size_t lineno) {
    size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw DataError(path.string() + " line " + std::to_string(lineno) +
                      ": expected src<TAB>tgt");
    lex[trim(line.substr(0, tab))] = trim(line.substr(tab + 1));
  });
  return lex;
}

// "identity" | "lexicon:<file>" | "command:<cmd>"
inline TranslatorPort parse_translator_spec(const std::string& spec) {
  TranslatorPort port;
  if (spec == "identity") {
    port.kind = TranslatorPort::Kind::kIdentity;
  } else if (spec.rfind("lexicon:", 0) == 0) {
    port.kind = TranslatorPort::Kind::kLexicon;
    port.lexicon = load_translation_lexicon(spec.substr(8));
  } else if (spec.rfind("command:", 0) == 0) {
    port.kind = TranslatorPort::Kind::kExternal;
    port.command = spec.substr(8);
    if (port.command.empty())
      throw UsageError("translator command must not be empty");
  } else {
    throw UsageError("unknown translator spec '" + spec +
                     "' (expected identity | lexicon:<file> | "
                     "command:<cmd>)");
  }
  return port;
}

namespace detail {

inline std::vector<std::string> run_external_batch(
    const TranslatorPort& port, const std::vector<std::string>& sentences) {
  namespace fs = std::filesystem;
  static std::atomic<uint64_t> counter{0};
  const uint64_t id = counter.fetch_add(1);
  fs::path dir = fs::temp_directory_path();
  fs::path in_path = dir / ("segaug_mt_" + std::to_string(::getpid()) + "_" +
                            std::to_string(id) + ".in");
  fs::path out_path = in_path;
  out_path.replace_extension(".out");

  std::string content;
  for (const std::string& s : sentences) {
    content += s;
    content += '\n';
  }
  atomic_write_file(in_path, content);

  std::string cmd;
  if (port.timeout_s > 0.0)
    cmd = "timeout " + std::to_string(port.timeout_s) + " ";
  cmd += port.command + " '" + in_path.string() + "' '" + out_path.string() +
         "'";
  int rc = std::system(cmd.c_str());
  int exit_code = (rc >= 0 && WIFEXITED(rc)) ? WEXITSTATUS(rc) : -1;
  std::error_code ec;
  fs::remove(in_path, ec);
  if (exit_code == 124)
    throw StageError("translator timed out: " + port.command);
  if (exit_code != 0)
    throw StageError("translator exited with code " +
                     std::to_string(exit_code) + ": " + port.command);

  std::vector<std::string> out;
  for_each_line(out_path, [&](const std::string& line, size_t) {
    out.push_back(line);
  });
  fs::remove(out_path, ec);
  if (out.size() != sentences.size())
    throw StageError("translator wrote " + std::to_string(out.size()) +
                     " lines for " + std::to_string(sentences.size()) +
                     " inputs: " + port.command);
  return out;
}

}  // namespace detail

// Translates a list of sentences, preserving order and cardinality.
inline std::vector<std::string> translate_batch(
    const TranslatorPort& port, const std::vector<std::string>& sentences) {
  switch (port.kind) {
    case TranslatorPort::Kind::kIdentity:
      return sentences;
    case TranslatorPort::Kind::kLexicon: {
      std::vector<std::string> out;
      out.reserve(sentences.size());
      for (const std::string& s : sentences) {
        std::vector<std::string> words = split_whitespace(s);
        for (std::string& w : words) {
          auto it = port.lexicon.find(w);
          if (it != port.lexicon.end()) w = it->second;
        }
        out.push_back(join(words));
      }
      return out;
    }
    case TranslatorPort::Kind::kExternal: {
      std::vector<std::string> out;
      out.reserve(sentences.size());
      const size_t batch = port.batch_size ? port.batch_size : 64;
      for (size_t i = 0; i < sentences.size(); i += batch) {
        size_t e = std::min(sentences.size(), i + batch);
        std::vector<std::string> chunk(sentences.begin() + i,
                                       sentences.begin() + e);
        std::vector<std::string> translated =
            detail::run_external_batch(port, chunk);
        out.insert(out.end(), translated.begin(), translated.end());
      }
      return out;
    }
  }
  return {};
}

// ── Concatenated MT training pairs ───────────────────────────────────

struct MtPair {
  std::string src;
  std::string tgt;
  std::string doc_id;
  std::vector<int> constituent_indices;  // consecutive manual segments
};

// Core accumulation rule, with the target-length sampler injected:
// start a pair with the next unconsumed segment, then keep appending
// while the accumulated speech stays under the sampled target L and
// appending would not push it past max_s.
inline std::vector<MtPair> build_mt_pairs_with_sampler(
    const Document& doc, const ViewSpec& view,
    const std::function<double()>& next_target_s) {
  if (doc.manual_segments.empty())
    throw DataError("doc " + doc.id + ": no manual segments for MT pairs");
  std::vector<MtPair> pairs;
  size_t i = 0;
  const size_t m = doc.manual_segments.size();
  while (i < m) {
    const double target = next_target_s();
    MtPair pair;
    pair.doc_id = doc.id;
    double dur = doc.manual_segments[i].duration_s();
    pair.constituent_indices.push_back(doc.manual_segments[i].index);
    size_t j = i + 1;
    while (j < m) {
      const double next_dur = doc.manual_segments[j].duration_s();
      if (!(dur + next_dur < target)) break;
      if (dur + next_dur > view.max_s) break;
      dur += next_dur;
      pair.constituent_indices.push_back(doc.manual_segments[j].index);
      ++j;
    }
    std::vector<std::string> srcs, tgts;
    for (size_t k = i; k < j; ++k) {
      srcs.push_back(collapse_whitespace(doc.manual_segments[k].src_text));
      tgts.push_back(collapse_whitespace(doc.manual_segments[k].tgt_text));
    }
    pair.src = join(srcs);
    pair.tgt = join(tgts);
    pairs.push_back(std::move(pair));
    i = j;
  }
  return pairs;
}

// Seeded variant: target lengths are drawn uniformly from the view's
// duration range.
inline std::vector<MtPair> build_mt_pairs(const Document& doc,
                                          const ViewSpec& view,
                                          uint64_t seed) {
  std::mt19937_64 eng(seed);
  return build_mt_pairs_with_sampler(doc, view, [&]() {
    return uniform_double(eng, view.min_s, view.max_s);
  });
}

// ── Document-level BLEU ──────────────────────────────────────────────

// Joins each document's sentence hypotheses back into one line and
// scores against the document-level references. `subset` limits
// scoring to a seeded sample of documents.
inline BleuResult doc_level_bleu(
    const std::map<std::string, std::vector<std::string>>& hyps_by_doc,
    const std::map<std::string, std::string>& refs_by_doc,
    std::optional<size_t> subset = std::nullopt, uint64_t seed = 0,
    const BleuSmoothing& smoothing = BleuSmoothing::none()) {
  if (hyps_by_doc.empty()) throw DataError("doc_level_bleu: no hypotheses");
  std::vector<std::string> doc_ids;
  for (const auto& [id, _] : hyps_by_doc) {
    if (!refs_by_doc.count(id))
      throw DataError("doc_level_bleu: no reference for doc " + id);
    doc_ids.push_back(id);
  }
  if (subset && *subset < doc_ids.size()) {
    std::mt19937_64 eng(seed);
    deterministic_shuffle(doc_ids, eng);
    doc_ids.resize(*subset);
    std::sort(doc_ids.begin(), doc_ids.end());
  }
  std::vector<std::string> hyps, refs;
  for (const std::string& id : doc_ids) {
    hyps.push_back(join(hyps_by_doc.at(id)));
    refs.push_back(refs_by_doc.at(id));
  }
  return corpus_bleu(hyps, refs, smoothing);
}

// ── Paraphrase mode ──────────────────────────────────────────────────

// Re-translates the original source side, keeping the manual
// boundaries: one example per manual segment with a fresh target.
inline std::vector<AugmentedExample> paraphrase_view(
    const std::vector<Document>& corpus, const TranslatorPort& port,
    const std::string& view_tag = "para") {
  std::vector<AugmentedExample> out;
  for (const Document& doc : corpus) {
    std::vector<std::string> srcs;
    for (const ManualSegment& seg : doc.manual_segments)
      srcs.push_back(collapse_whitespace(seg.src_text));
    if (srcs.empty()) continue;
    std::vector<std::string> tgts = translate_batch(port, srcs);
    for (size_t i = 0; i < doc.manual_segments.size(); ++i) {
      const ManualSegment& seg = doc.manual_segments[i];
      AugmentedExample ex;
      ex.doc_id = doc.id;
      ex.view_tag = view_tag;
      ex.start_s = seg.start_s;
      ex.end_s = seg.end_s;
      ex.src_text = collapse_whitespace(seg.src_text);
      ex.tgt_text = tgts[i];
      const double d = ex.duration_s();
      ex.overflow = d < 0.4 || d > 30.0;
      out.push_back(std::move(ex));
    }
  }
  return out;
}

}  // namespace segaug

#endif  // SEGAUG_TRANSLATE_HPP_
