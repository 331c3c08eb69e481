// pipeline.hpp
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
// The augmentation pipeline: per document, segment each view, force-
// align the transcript once (cached, shared across views), recover
// per-segment source text, translate, and emit view files. Documents
// are processed by a bounded worker pool; outputs are merged in corpus
// order, so identical configs produce byte-identical files.

#ifndef SEGAUG_PIPELINE_HPP_
#define SEGAUG_PIPELINE_HPP_

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "segaug/aligner.hpp"
#include "segaug/analysis.hpp"
#include "segaug/cache.hpp"
#include "segaug/corpus.hpp"
#include "segaug/emissions.hpp"
#include "segaug/error.hpp"
#include "segaug/frame_probs.hpp"
#include "segaug/log.hpp"
#include "segaug/segmenter.hpp"
#include "segaug/textnorm.hpp"
#include "segaug/translate.hpp"

namespace segaug {

struct PipelineConfig {
  std::filesystem::path corpus_path;
  std::filesystem::path probs_path;
  std::filesystem::path emissions_path;
  std::filesystem::path out_dir;
  std::filesystem::path cache_dir;  // empty disables caching

  int mu = 4;
  std::vector<ViewSpec> explicit_views;  // overrides mu when non-empty
  double thr = 0.5;
  double floor_s = 0.2;
  bool invert_threshold = false;

  std::string translator_spec = "identity";  // "none" skips translation
  uint64_t seed = 0;
  int jobs = 1;

  std::string special_token_template = "<{lang}_{view}>";
  std::string special_lang;  // empty = no special tokens emitted
  bool prepend_special = false;
  bool tsv = false;
  double repair_overlap_s = 0.0;
  std::filesystem::path spell_lexicon_path;  // optional

  std::vector<ViewSpec> views() const {
    return explicit_views.empty() ? plan_views(mu) : explicit_views;
  }
};

inline std::string render_special_token(const std::string& tmpl,
                                        const std::string& lang,
                                        const std::string& view_tag) {
  std::string out = tmpl;
  auto replace_all = [&](const std::string& from, const std::string& to) {
    size_t pos = 0;
    while ((pos = out.find(from, pos)) != std::string::npos) {
      out.replace(pos, from.size(), to);
      pos += to.size();
    }
  };
  replace_all("{lang}", lang);
  replace_all("{view}", view_tag);
  return out;
}

// ── Per-document results ─────────────────────────────────────────────

struct DocViewResult {
  std::vector<AugmentedExample> examples;
  // reverse_clean output per kept segment, before post-editing; their
  // in-order concatenation reproduces the document transcript when the
  // segmentation covers it
  std::vector<std::string> pre_edit_texts;
  size_t empty_segments = 0;
  size_t dropped_units = 0;
};

struct DocResult {
  bool ok = false;
  std::string error;
  bool align_cache_hit = false;
  std::vector<DocViewResult> views;  // parallel to the view plan
};

namespace detail {

struct AlignedDoc {
  std::vector<CleanUnit> units;
  std::vector<WordSpan> words;
};

inline nlohmann::json aligned_doc_to_json(const AlignedDoc& ad) {
  nlohmann::json units = nlohmann::json::array();
  for (const CleanUnit& u : ad.units)
    units.push_back({{"original", u.original_text},
                     {"prefix", u.unvoiced_prefix},
                     {"suffix", u.unvoiced_suffix},
                     {"words", u.cleaned_words},
                     {"offset", u.doc_char_offset}});
  nlohmann::json words = nlohmann::json::array();
  for (const WordSpan& w : ad.words)
    words.push_back({{"unit", w.clean_unit_ref},
                     {"text", w.word_text},
                     {"start_frame", w.start_frame},
                     {"end_frame", w.end_frame},
                     {"score", w.score}});
  return {{"units", units}, {"word_spans", words}};
}

// Times are recomputed from frames so cached and fresh results are
// bit-identical.
inline AlignedDoc aligned_doc_from_json(const nlohmann::json& j,
                                        const Timeline& timeline) {
  AlignedDoc ad;
  for (const auto& ju : j.at("units")) {
    CleanUnit u;
    u.original_text = ju.at("original").get<std::string>();
    u.unvoiced_prefix = ju.at("prefix").get<std::string>();
    u.unvoiced_suffix = ju.at("suffix").get<std::string>();
    u.cleaned_words = ju.at("words").get<std::vector<std::string>>();
    u.doc_char_offset = ju.at("offset").get<size_t>();
    ad.units.push_back(std::move(u));
  }
  for (const auto& jw : j.at("word_spans")) {
    WordSpan w;
    w.clean_unit_ref = jw.at("unit").get<size_t>();
    w.word_text = jw.at("text").get<std::string>();
    w.start_frame = jw.at("start_frame").get<int64_t>();
    w.end_frame = jw.at("end_frame").get<int64_t>();
    w.score = jw.at("score").get<double>();
    w.start_s = timeline.time_of(w.start_frame);
    w.end_s = timeline.end_time_of(w.end_frame);
    ad.words.push_back(std::move(w));
  }
  return ad;
}

inline AlignCharSet charset_from_vocab(const EmissionMatrix& em) {
  AlignCharSet cs;
  for (const std::string& sym : em.vocab) {
    if (sym == kBlankSymbol || sym == kBoundarySymbol) continue;
    size_t i = 0;
    char32_t cp = utf8_next(sym, i);
    if (i == sym.size()) cs.chars.insert(cp);
  }
  return cs;
}

}  // namespace detail

// Forced alignment of one document, with caching. The cache key folds
// in the emission content and the transcript, so stale entries can
// never be served.
inline detail::AlignedDoc align_document(const Document& doc,
                                         const EmissionMatrix& em,
                                         const SpellLexicon* lexicon,
                                         const Cache& cache,
                                         bool* cache_hit) {
  const std::string transcript = doc_transcript(doc);
  if (transcript.empty())
    throw DataError("doc " + doc.id + ": empty transcript");

  uint64_t digest = fnv1a64("align-v1");
  digest = fnv1a64(transcript, digest);
  uint64_t em_digest = em.content_digest();
  digest = fnv1a64(&em_digest, sizeof(em_digest), digest);
  if (lexicon)
    for (const auto& [k, v] : *lexicon) {
      digest = fnv1a64(k, digest);
      for (const std::string& w : v) digest = fnv1a64(w, digest);
    }
  CacheKey key{doc.id, Stage::kAlign, digest};

  if (auto cached = cache.get(key)) {
    *cache_hit = true;
    return detail::aligned_doc_from_json(*cached, em.timeline);
  }
  *cache_hit = false;

  detail::AlignedDoc ad;
  AlignCharSet charset = detail::charset_from_vocab(em);
  ad.units = clean(transcript, charset, lexicon);
  if (ad.units.empty())
    throw StageError("doc " + doc.id + ": no voiced units to align");
  std::vector<int> seq = char_sequence_for_units(ad.units, em);
  AlignmentResult alignment = align_chars(em, seq);
  ad.words = chars_to_words(alignment.chars, ad.units, em);
  cache.put(key, detail::aligned_doc_to_json(ad));
  return ad;
}

// Runs every view of one document. Pure given its inputs; safe to call
// from parallel workers.
inline DocResult augment_document(
    const Document& doc, const FrameProbabilities& probs,
    const EmissionMatrix& em, const std::vector<ViewSpec>& views,
    const PipelineConfig& config, const TranslatorPort* translator,
    const SpellLexicon* lexicon, const Cache& cache) {
  DocResult result;
  try {
    detail::AlignedDoc ad =
        align_document(doc, em, lexicon, cache, &result.align_cache_hit);

    for (const ViewSpec& view : views) {
      SegmenterParams params;
      params.min_s = view.min_s;
      params.max_s = view.max_s;
      params.thr = config.thr;
      params.floor_s = config.floor_s;
      params.invert_threshold = config.invert_threshold;
      Segmentation seg = segment_with(view.algorithm, probs, params);

      SegmentAssignment assignment =
          assign_words_to_segments(ad.words, ad.units, seg);

      DocViewResult vr;
      vr.dropped_units = assignment.dropped_units;
      std::optional<std::string> prev_text;
      for (size_t s = 0; s < seg.segments.size(); ++s) {
        const std::vector<size_t>& unit_ids = assignment.unit_indices[s];
        if (unit_ids.empty()) {
          ++vr.empty_segments;
          continue;
        }
        std::vector<CleanUnit> segment_units;
        segment_units.reserve(unit_ids.size());
        for (size_t u : unit_ids) segment_units.push_back(ad.units[u]);
        std::string text = reverse_clean(segment_units);
        vr.pre_edit_texts.push_back(text);
        std::string edited = post_edit(text, prev_text);
        prev_text = text;

        AugmentedExample ex;
        ex.doc_id = doc.id;
        ex.view_tag = view.tag;
        ex.start_s = seg.segments[s].start_s;
        ex.end_s = seg.segments[s].end_s;
        ex.src_text = edited;
        const double d = ex.duration_s();
        ex.overflow =
            seg.segments[s].overflow || d < 0.4 - 1e-9 || d > 30.0 + 1e-9;
        if (!config.special_lang.empty())
          ex.special_token = render_special_token(
              config.special_token_template, config.special_lang, view.tag);
        vr.examples.push_back(std::move(ex));
      }

      if (translator && !vr.examples.empty()) {
        std::vector<std::string> srcs;
        srcs.reserve(vr.examples.size());
        for (const AugmentedExample& ex : vr.examples)
          srcs.push_back(ex.src_text);
        std::vector<std::string> tgts = translate_batch(*translator, srcs);
        for (size_t i = 0; i < vr.examples.size(); ++i)
          vr.examples[i].tgt_text = tgts[i];
      }
      result.views.push_back(std::move(vr));
    }
    result.ok = true;
  } catch (const std::exception& e) {
    result.ok = false;
    result.error = e.what();
    result.views.clear();
  }
  return result;
}

// ── Run-level orchestration ──────────────────────────────────────────

struct StageCounter {
  size_t hits = 0;
  size_t misses = 0;
};

struct AugmentReport {
  size_t documents = 0;
  size_t succeeded = 0;
  size_t failed = 0;
  StageCounter align_cache;
  size_t dropped_units = 0;
  size_t dropped_empty_segments = 0;
  std::map<std::string, ViewStats> per_view;
  std::map<std::string, std::string> view_files;
  std::vector<std::string> failures;

  nlohmann::json to_json() const {
    nlohmann::json views = nlohmann::json::object();
    for (const auto& [tag, stats] : per_view) {
      nlohmann::json v;
      v["count"] = stats.count;
      if (stats.mean_duration_s)
        v["mean_duration_s"] = *stats.mean_duration_s;
      else
        v["mean_duration_s"] = nullptr;
      auto it = view_files.find(tag);
      if (it != view_files.end()) v["file"] = it->second;
      views[tag] = v;
    }
    return {{"documents", documents},
            {"succeeded", succeeded},
            {"failed", failed},
            {"align_cache",
             {{"hits", align_cache.hits}, {"misses", align_cache.misses}}},
            {"dropped_units", dropped_units},
            {"dropped_empty_segments", dropped_empty_segments},
            {"views", views},
            {"failures", failures}};
  }
};

inline AugmentReport cmd_augment(const PipelineConfig& config) {
  namespace fs = std::filesystem;
  LoadCorpusOptions corpus_opts;
  corpus_opts.repair_overlap_s = config.repair_overlap_s;
  std::vector<Document> corpus =
      load_corpus(config.corpus_path, corpus_opts);
  std::vector<FrameProbabilities> all_probs =
      load_probabilities(config.probs_path);
  std::vector<EmissionMatrix> all_emissions =
      load_emissions(config.emissions_path);

  std::map<std::string, const FrameProbabilities*> probs_by_doc;
  for (const FrameProbabilities& p : all_probs) probs_by_doc[p.doc_id] = &p;
  std::map<std::string, const EmissionMatrix*> em_by_doc;
  for (const EmissionMatrix& e : all_emissions) em_by_doc[e.doc_id] = &e;

  const std::vector<ViewSpec> views = config.views();
  std::optional<TranslatorPort> translator;
  if (config.translator_spec != "none")
    translator = parse_translator_spec(config.translator_spec);
  std::optional<SpellLexicon> lexicon;
  if (!config.spell_lexicon_path.empty())
    lexicon = load_spell_lexicon(config.spell_lexicon_path);
  Cache cache(config.cache_dir);

  std::vector<DocResult> results(corpus.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    while (true) {
      size_t i = next.fetch_add(1);
      if (i >= corpus.size()) break;
      const Document& doc = corpus[i];
      auto pit = probs_by_doc.find(doc.id);
      auto eit = em_by_doc.find(doc.id);
      if (pit == probs_by_doc.end()) {
        results[i].ok = false;
        results[i].error = "no probabilities for doc " + doc.id;
        continue;
      }
      if (eit == em_by_doc.end()) {
        results[i].ok = false;
        results[i].error = "no emissions for doc " + doc.id;
        continue;
      }
      results[i] = augment_document(
          doc, *pit->second, *eit->second, views, config,
          translator ? &*translator : nullptr,
          lexicon ? &*lexicon : nullptr, cache);
    }
  };
  const int jobs = std::max(1, config.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  // merge in corpus order
  AugmentReport report;
  report.documents = corpus.size();
  std::vector<std::vector<AugmentedExample>> per_view(views.size());
  for (size_t i = 0; i < corpus.size(); ++i) {
    const DocResult& r = results[i];
    if (!r.ok) {
      ++report.failed;
      report.failures.push_back(corpus[i].id + ": " + r.error);
      log_warn("document " + corpus[i].id + " failed: " + r.error);
      continue;
    }
    ++report.succeeded;
    if (r.align_cache_hit)
      ++report.align_cache.hits;
    else
      ++report.align_cache.misses;
    for (size_t v = 0; v < views.size(); ++v) {
      const DocViewResult& vr = r.views[v];
      report.dropped_units += vr.dropped_units;
      report.dropped_empty_segments += vr.empty_segments;
      per_view[v].insert(per_view[v].end(), vr.examples.begin(),
                         vr.examples.end());
    }
  }

  fs::create_directories(config.out_dir);
  std::vector<AugmentedExample> all_examples;
  SaveViewOptions save_opts;
  save_opts.tsv = config.tsv;
  save_opts.prepend_special = config.prepend_special;
  for (size_t v = 0; v < views.size(); ++v) {
    fs::path file = config.out_dir / ("view_" + views[v].tag +
                                      (config.tsv ? ".tsv" : ".jsonl"));
    save_view(per_view[v], file, save_opts);
    report.view_files[views[v].tag] = file.string();
    all_examples.insert(all_examples.end(), per_view[v].begin(),
                        per_view[v].end());
  }
  report.per_view = view_stats(all_examples);
  for (const ViewSpec& v : views)
    report.per_view.try_emplace(v.tag);  // keep empty views visible
  return report;
}

// ── Statistics over emitted view files ───────────────────────────────

struct StatsReport {
  std::map<std::string, ViewStats> per_view;

  nlohmann::json to_json() const {
    nlohmann::json views = nlohmann::json::object();
    for (const auto& [tag, stats] : per_view) {
      nlohmann::json v;
      v["count"] = stats.count;
      if (stats.mean_duration_s)
        v["mean_duration_s"] = *stats.mean_duration_s;
      else
        v["mean_duration_s"] = nullptr;
      views[tag] = v;
    }
    return {{"views", views}};
  }

  std::string to_table() const {
    char buf[128];
    std::string out;
    std::snprintf(buf, sizeof(buf), "%-12s %10s %16s\n", "view", "count",
                  "mean_dur_s");
    out += buf;
    for (const auto& [tag, stats] : per_view) {
      if (stats.mean_duration_s)
        std::snprintf(buf, sizeof(buf), "%-12s %10zu %16.3f\n", tag.c_str(),
                      stats.count, *stats.mean_duration_s);
      else
        std::snprintf(buf, sizeof(buf), "%-12s %10zu %16s\n", tag.c_str(),
                      stats.count, "-");
      out += buf;
    }
    return out;
  }
};

// Gathers per-view statistics from view files (or every view_*.jsonl
// in a directory).
inline StatsReport emit_stats(const std::vector<std::filesystem::path>& files) {
  std::vector<AugmentedExample> all;
  for (const auto& f : files) {
    std::vector<AugmentedExample> ex = load_view(f);
    all.insert(all.end(), ex.begin(), ex.end());
  }
  StatsReport report;
  report.per_view = view_stats(all);
  return report;
}

inline StatsReport emit_stats_dir(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  if (fs::is_directory(dir)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("view_", 0) == 0 &&
          entry.path().extension() == ".jsonl")
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(dir);
  }
  return emit_stats(files);
}

}  // namespace segaug

#endif  // SEGAUG_PIPELINE_HPP_
