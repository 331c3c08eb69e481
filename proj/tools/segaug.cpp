// segaug.cpp
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
// Command-line front end. Exit codes: 0 success, 1 usage error,
// 2 data error, 3 stage failure.

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "segaug/aligner.hpp"
#include "segaug/analysis.hpp"
#include "segaug/bleu.hpp"
#include "segaug/corpus.hpp"
#include "segaug/emissions.hpp"
#include "segaug/error.hpp"
#include "segaug/frame_probs.hpp"
#include "segaug/log.hpp"
#include "segaug/pipeline.hpp"
#include "segaug/resegment.hpp"
#include "segaug/segmenter.hpp"
#include "segaug/textnorm.hpp"
#include "segaug/translate.hpp"

namespace {

using nlohmann::json;
using namespace segaug;

// "min,max" or "min,max,algo"
ViewSpec parse_view_spec(const std::string& text, int index) {
  std::vector<std::string> parts = split(text, ',');
  if (parts.size() < 2 || parts.size() > 3)
    throw UsageError("bad --view '" + text +
                     "' (expected min,max[,pdac|pstrm])");
  ViewSpec v;
  try {
    v.min_s = std::stod(parts[0]);
    v.max_s = std::stod(parts[1]);
  } catch (const std::exception&) {
    throw UsageError("bad --view numbers in '" + text + "'");
  }
  v.algorithm =
      parts.size() == 3 ? algorithm_from_name(parts[2]) : Algorithm::kPdac;
  v.tag = "v" + std::to_string(index + 1);
  if (!(v.min_s > 0) || !(v.min_s < v.max_s))
    throw UsageError("bad --view range in '" + text + "'");
  return v;
}

BleuSmoothing parse_smoothing(const std::string& text) {
  if (text == "none") return BleuSmoothing::none();
  if (text.rfind("addk:", 0) == 0) {
    try {
      return BleuSmoothing::add_k(std::stod(text.substr(5)));
    } catch (const std::exception&) {
    }
  }
  throw UsageError("bad --smoothing '" + text + "' (none | addk:K)");
}

std::vector<std::string> read_lines_of(const std::string& path) {
  std::vector<std::string> out;
  for_each_line(path, [&](const std::string& line, size_t) {
    out.push_back(line);
  });
  return out;
}

void emit_report(const json& j) { std::cout << j.dump(2) << "\n"; }

json bleu_to_json(const BleuResult& r) {
  return {{"score", r.score},
          {"precisions", r.precisions},
          {"brevity_penalty", r.brevity_penalty},
          {"hyp_len", r.hyp_len},
          {"ref_len", r.ref_len}};
}

// reference segments for resegmentation: view JSONL (tgt_text, then
// src_text) or a plain text file with one segment per line
std::vector<std::string> load_ref_segments(const std::string& path) {
  std::vector<std::string> out;
  if (path.size() > 6 && path.substr(path.size() - 6) == ".jsonl") {
    for (const AugmentedExample& ex : load_view(path))
      out.push_back(ex.tgt_text.value_or(ex.src_text));
  } else {
    out = read_lines_of(path);
  }
  return out;
}

struct CommonArgs {
  uint64_t seed = 0;
  int jobs = 1;
  std::string cache_dir;
  std::string log_level = "info";
};

int run(int argc, char** argv) {
  CLI::App app{"Multi-view re-segmentation pipeline for document-level "
               "speech translation corpora"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "plain-text key=value config file");

  CommonArgs common;
  app.add_option("--seed", common.seed, "random seed")->capture_default_str();
  app.add_option("--jobs", common.jobs, "parallel document workers")
      ->capture_default_str();
  app.add_option("--cache-dir", common.cache_dir, "stage cache directory");
  app.add_option("--log-level", common.log_level,
                 "debug | info | warn | error")
      ->capture_default_str();

  // ── augment ─────────────────────────────────────────────────────
  auto* augment = app.add_subcommand(
      "augment", "run the full pipeline and emit per-view datasets");
  PipelineConfig config;
  std::string aug_corpus, aug_probs, aug_emissions, aug_out;
  std::vector<std::string> aug_views;
  std::string aug_port = "identity";
  std::string aug_spell_lexicon;
  augment->add_option("--corpus", aug_corpus, "corpus manifest (JSONL)")
      ->required();
  augment->add_option("--probs", aug_probs,
                      "frame probabilities (JSONL, .segp, or directory)")
      ->required();
  augment->add_option("--emissions", aug_emissions,
                      "emission matrices (JSONL, .sege, or directory)")
      ->required();
  augment->add_option("--out-dir", aug_out, "output directory")->required();
  augment->add_option("--mu", config.mu, "number of planned views")
      ->capture_default_str();
  augment->add_option("--view", aug_views,
                      "explicit view min,max[,algo]; repeatable");
  augment->add_option("--thr", config.thr, "classification threshold")
      ->capture_default_str();
  augment->add_option("--floor", config.floor_s,
                      "absolute segment duration floor (s)")
      ->capture_default_str();
  augment->add_flag("--invert-thr", config.invert_threshold,
                    "treat frames above thr as split candidates");
  augment->add_option("--port", aug_port,
                      "translator: identity | none | lexicon:<file> | "
                      "command:<cmd>")
      ->capture_default_str();
  augment->add_option("--special-lang", config.special_lang,
                      "emit special tokens for this target language");
  augment->add_option("--special-template", config.special_token_template,
                      "special token template")
      ->capture_default_str();
  augment->add_flag("--prepend-special", config.prepend_special,
                    "prepend the special token to tgt_text at export");
  augment->add_flag("--tsv", config.tsv, "write TSV instead of JSONL");
  augment->add_option("--repair-overlap", config.repair_overlap_s,
                      "clamp manual-segment overlaps up to this many "
                      "seconds")
      ->capture_default_str();
  augment->add_option("--spell-lexicon", aug_spell_lexicon,
                      "number-spelling lexicon (token<TAB>words)");

  // ── segment ─────────────────────────────────────────────────────
  auto* segment = app.add_subcommand(
      "segment", "segment probability files into one view");
  std::string seg_probs, seg_out, seg_view = "0.4,30", seg_algo = "pdac";
  double seg_thr = 0.5, seg_floor = 0.2;
  bool seg_invert = false;
  segment->add_option("--probs", seg_probs, "frame probabilities")
      ->required();
  segment->add_option("--view", seg_view, "min,max range")
      ->capture_default_str();
  segment->add_option("--algo", seg_algo, "pdac | pstrm")
      ->capture_default_str();
  segment->add_option("--thr", seg_thr, "classification threshold")
      ->capture_default_str();
  segment->add_option("--floor", seg_floor, "duration floor (s)")
      ->capture_default_str();
  segment->add_flag("--invert-thr", seg_invert, "invert the comparison");
  segment->add_option("--out", seg_out, "segmentation JSONL")->required();

  // ── align ───────────────────────────────────────────────────────
  auto* align = app.add_subcommand(
      "align", "force-align transcripts and emit word spans");
  std::string al_corpus, al_emissions, al_out, al_spell_lexicon;
  align->add_option("--corpus", al_corpus, "corpus manifest")->required();
  align->add_option("--emissions", al_emissions, "emission matrices")
      ->required();
  align->add_option("--spell-lexicon", al_spell_lexicon,
                    "number-spelling lexicon");
  align->add_option("--out", al_out, "word spans JSONL")->required();

  // ── translate ───────────────────────────────────────────────────
  auto* translate = app.add_subcommand(
      "translate", "translate a text file line by line");
  std::string tr_in, tr_out, tr_port = "identity";
  size_t tr_batch = 64;
  double tr_timeout = 0.0;
  translate->add_option("--in", tr_in, "input sentences, one per line")
      ->required();
  translate->add_option("--out", tr_out, "output file")->required();
  translate->add_option("--port", tr_port, "translator spec")
      ->capture_default_str();
  translate->add_option("--batch-size", tr_batch, "sentences per batch")
      ->capture_default_str();
  translate->add_option("--timeout", tr_timeout,
                        "external command timeout (s), 0 = none")
      ->capture_default_str();

  // ── mtpairs ─────────────────────────────────────────────────────
  auto* mtpairs = app.add_subcommand(
      "mtpairs", "build length-matched concatenated MT training pairs");
  std::string mt_corpus, mt_out, mt_view = "3,10";
  mtpairs->add_option("--corpus", mt_corpus, "corpus manifest")->required();
  mtpairs->add_option("--view", mt_view, "min,max range")
      ->capture_default_str();
  mtpairs->add_option("--out", mt_out, "pairs JSONL")->required();

  // ── paraphrase ──────────────────────────────────────────────────
  auto* paraphrase = app.add_subcommand(
      "paraphrase", "re-translate the original source side");
  std::string pp_corpus, pp_out, pp_port = "identity", pp_tag = "para";
  paraphrase->add_option("--corpus", pp_corpus, "corpus manifest")
      ->required();
  paraphrase->add_option("--port", pp_port, "translator spec")
      ->capture_default_str();
  paraphrase->add_option("--tag", pp_tag, "view tag for the output")
      ->capture_default_str();
  paraphrase->add_option("--out", pp_out, "view JSONL")->required();

  // ── eval ────────────────────────────────────────────────────────
  auto* eval = app.add_subcommand("eval", "scoring utilities");
  eval->require_subcommand(1);

  auto* eval_bleu = eval->add_subcommand("bleu", "corpus BLEU of two files");
  std::string eb_hyp, eb_ref, eb_smoothing = "none";
  eval_bleu->add_option("--hyp", eb_hyp, "hypotheses, one per line")
      ->required();
  eval_bleu->add_option("--ref", eb_ref, "references, one per line")
      ->required();
  eval_bleu->add_option("--smoothing", eb_smoothing, "none | addk:K")
      ->capture_default_str();

  auto* eval_doc = eval->add_subcommand(
      "docbleu", "document-level BLEU of a view against its corpus");
  std::string ed_view, ed_corpus, ed_side = "tgt", ed_smoothing = "none";
  size_t ed_subset = 20;
  eval_doc->add_option("--view", ed_view, "view JSONL")->required();
  eval_doc->add_option("--corpus", ed_corpus, "corpus manifest")->required();
  eval_doc->add_option("--side", ed_side, "score tgt or src side")
      ->capture_default_str();
  eval_doc->add_option("--subset", ed_subset,
                       "seeded sample of this many documents (0 = all)")
      ->capture_default_str();
  eval_doc->add_option("--smoothing", ed_smoothing, "none | addk:K")
      ->capture_default_str();

  auto* eval_reseg = eval->add_subcommand(
      "resegment", "re-cut a hypothesis stream against references");
  std::string er_hyp, er_ref, er_out, er_smoothing = "none";
  bool er_icase = false;
  eval_reseg->add_option("--hyp", er_hyp, "hypothesis text file")
      ->required();
  eval_reseg->add_option("--ref", er_ref,
                         "reference segments (view JSONL or text)")
      ->required();
  eval_reseg->add_flag("--icase", er_icase, "case-insensitive matching");
  eval_reseg->add_option("--out", er_out, "re-cut hypothesis JSONL");
  eval_reseg->add_option("--smoothing", er_smoothing, "none | addk:K")
      ->capture_default_str();

  // ── analyze ─────────────────────────────────────────────────────
  auto* analyze = app.add_subcommand("analyze", "corpus analyses");
  analyze->require_subcommand(1);

  auto* an_overlap = analyze->add_subcommand(
      "overlap", "contextual overlap of a view vs the manual split");
  std::string ao_view, ao_corpus;
  double ao_eps = 0.2;
  an_overlap->add_option("--view", ao_view, "view JSONL")->required();
  an_overlap->add_option("--corpus", ao_corpus, "corpus manifest")
      ->required();
  an_overlap->add_option("--eps", ao_eps, "boundary tolerance (s)")
      ->capture_default_str();

  auto* an_pos = analyze->add_subcommand(
      "positions", "positional histogram of a token");
  std::string ap_view, ap_corpus, ap_token, ap_side = "tgt";
  an_pos->add_option("--view", ap_view, "view JSONL");
  an_pos->add_option("--corpus", ap_corpus,
                     "corpus manifest (uses manual segments)");
  an_pos->add_option("--token", ap_token, "token to count")->required();
  an_pos->add_option("--side", ap_side, "src | tgt")->capture_default_str();

  auto* an_buckets = analyze->add_subcommand(
      "buckets", "bucket examples by duration into view ranges");
  std::string ab_view;
  int ab_mu = 4;
  an_buckets->add_option("--view", ab_view, "view JSONL")->required();
  an_buckets->add_option("--mu", ab_mu, "number of bucket ranges")
      ->capture_default_str();

  // ── stats ───────────────────────────────────────────────────────
  auto* stats = app.add_subcommand(
      "stats", "per-view counts and mean durations");
  std::string st_dir;
  stats->add_option("--dir", st_dir, "directory of view_*.jsonl (or one file)")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // help requests exit 0; every other parse problem is a usage error
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (!set_log_level(common.log_level))
    throw UsageError("bad --log-level '" + common.log_level + "'");

  if (*augment) {
    config.corpus_path = aug_corpus;
    config.probs_path = aug_probs;
    config.emissions_path = aug_emissions;
    config.out_dir = aug_out;
    config.cache_dir = common.cache_dir;
    config.seed = common.seed;
    config.jobs = common.jobs;
    config.translator_spec = aug_port;
    config.spell_lexicon_path = aug_spell_lexicon;
    for (size_t i = 0; i < aug_views.size(); ++i)
      config.explicit_views.push_back(
          parse_view_spec(aug_views[i], static_cast<int>(i)));
    AugmentReport report = cmd_augment(config);
    json j = report.to_json();
    atomic_write_file(config.out_dir / "augment_report.json", j.dump(2));
    emit_report(j);
    return report.failed == 0 ? 0 : 3;
  }

  if (*segment) {
    ViewSpec view = parse_view_spec(seg_view, 0);
    SegmenterParams params;
    params.min_s = view.min_s;
    params.max_s = view.max_s;
    params.thr = seg_thr;
    params.floor_s = seg_floor;
    params.invert_threshold = seg_invert;
    Algorithm algo = algorithm_from_name(seg_algo);
    std::vector<FrameProbabilities> probs = load_probabilities(seg_probs);
    std::string out;
    size_t total = 0;
    for (const FrameProbabilities& fp : probs) {
      Segmentation seg_result = segment_with(algo, fp, params);
      for (const TimeSegment& s : seg_result.segments) {
        out += "{\"doc_id\":" + json(fp.doc_id).dump() +
               ",\"start_s\":" + format_seconds(s.start_s) +
               ",\"end_s\":" + format_seconds(s.end_s) +
               ",\"overflow\":" + (s.overflow ? "true" : "false") + "}\n";
        ++total;
      }
    }
    atomic_write_file(seg_out, out);
    emit_report({{"documents", probs.size()},
                 {"segments", total},
                 {"algorithm", seg_algo},
                 {"min_s", view.min_s},
                 {"max_s", view.max_s},
                 {"thr", seg_thr},
                 {"out", seg_out}});
    return 0;
  }

  if (*align) {
    std::vector<Document> corpus = load_corpus(al_corpus);
    std::vector<EmissionMatrix> emissions = load_emissions(al_emissions);
    std::map<std::string, const EmissionMatrix*> by_doc;
    for (const EmissionMatrix& em : emissions) by_doc[em.doc_id] = &em;
    std::optional<SpellLexicon> lexicon;
    if (!al_spell_lexicon.empty())
      lexicon = load_spell_lexicon(al_spell_lexicon);
    Cache cache(common.cache_dir);
    std::string out;
    size_t words_total = 0;
    json failures = json::array();
    for (const Document& doc : corpus) {
      auto it = by_doc.find(doc.id);
      if (it == by_doc.end()) {
        failures.push_back(doc.id + ": no emissions");
        continue;
      }
      try {
        bool hit = false;
        auto aligned = align_document(doc, *it->second,
                                      lexicon ? &*lexicon : nullptr, cache,
                                      &hit);
        for (const WordSpan& w : aligned.words) {
          out += "{\"doc_id\":" + json(doc.id).dump() +
                 ",\"unit\":" + std::to_string(w.clean_unit_ref) +
                 ",\"word\":" + json(w.word_text).dump() +
                 ",\"start_s\":" + format_seconds(w.start_s) +
                 ",\"end_s\":" + format_seconds(w.end_s) +
                 ",\"score\":" + std::to_string(w.score) + "}\n";
          ++words_total;
        }
      } catch (const std::exception& e) {
        failures.push_back(doc.id + ": " + e.what());
      }
    }
    atomic_write_file(al_out, out);
    emit_report({{"documents", corpus.size()},
                 {"words", words_total},
                 {"failures", failures},
                 {"out", al_out}});
    return failures.empty() ? 0 : 3;
  }

  if (*translate) {
    TranslatorPort port = parse_translator_spec(tr_port);
    port.batch_size = tr_batch;
    port.timeout_s = tr_timeout;
    std::vector<std::string> in = read_lines_of(tr_in);
    std::vector<std::string> out_lines = translate_batch(port, in);
    std::string out;
    for (const std::string& s : out_lines) {
      out += s;
      out += '\n';
    }
    atomic_write_file(tr_out, out);
    emit_report({{"sentences", in.size()}, {"out", tr_out}});
    return 0;
  }

  if (*mtpairs) {
    ViewSpec view = parse_view_spec(mt_view, 0);
    std::vector<Document> corpus = load_corpus(mt_corpus);
    std::string out;
    size_t total = 0;
    for (const Document& doc : corpus) {
      uint64_t doc_seed = fnv1a64(doc.id, common.seed ^ 0x9e3779b97f4a7c15ULL);
      for (const MtPair& pair : build_mt_pairs(doc, view, doc_seed)) {
        json j = {{"doc_id", pair.doc_id},
                  {"src", pair.src},
                  {"tgt", pair.tgt},
                  {"indices", pair.constituent_indices}};
        out += j.dump();
        out += '\n';
        ++total;
      }
    }
    atomic_write_file(mt_out, out);
    emit_report({{"documents", corpus.size()},
                 {"pairs", total},
                 {"out", mt_out}});
    return 0;
  }

  if (*paraphrase) {
    std::vector<Document> corpus = load_corpus(pp_corpus);
    TranslatorPort port = parse_translator_spec(pp_port);
    std::vector<AugmentedExample> examples =
        paraphrase_view(corpus, port, pp_tag);
    save_view(examples, pp_out);
    emit_report({{"documents", corpus.size()},
                 {"examples", examples.size()},
                 {"out", pp_out}});
    return 0;
  }

  if (*eval_bleu) {
    BleuResult r = corpus_bleu(read_lines_of(eb_hyp), read_lines_of(eb_ref),
                               parse_smoothing(eb_smoothing));
    emit_report(bleu_to_json(r));
    return 0;
  }

  if (*eval_doc) {
    std::vector<AugmentedExample> examples = load_view(ed_view);
    std::vector<Document> corpus = load_corpus(ed_corpus);
    std::map<std::string, std::vector<std::string>> hyps;
    for (const AugmentedExample& ex : examples) {
      if (ed_side == "src")
        hyps[ex.doc_id].push_back(ex.src_text);
      else
        hyps[ex.doc_id].push_back(ex.tgt_text.value_or(ex.src_text));
    }
    std::map<std::string, std::string> refs;
    for (const Document& doc : corpus) {
      if (ed_side == "src") {
        refs[doc.id] = doc_transcript(doc);
      } else if (doc.doc_translation) {
        refs[doc.id] = *doc.doc_translation;
      } else {
        std::vector<std::string> tgts;
        for (const ManualSegment& seg : doc.manual_segments)
          tgts.push_back(collapse_whitespace(seg.tgt_text));
        refs[doc.id] = join(tgts);
      }
    }
    std::optional<size_t> subset;
    if (ed_subset > 0) subset = ed_subset;
    BleuResult r = doc_level_bleu(hyps, refs, subset, common.seed,
                                  parse_smoothing(ed_smoothing));
    json j = bleu_to_json(r);
    j["documents_scored"] =
        subset ? std::min(*subset, hyps.size()) : hyps.size();
    emit_report(j);
    return 0;
  }

  if (*eval_reseg) {
    std::vector<std::string> hyp_words;
    for (const std::string& line : read_lines_of(er_hyp))
      for (const std::string& w : split_whitespace(line))
        hyp_words.push_back(w);
    std::vector<std::string> ref_texts = load_ref_segments(er_ref);
    std::vector<std::vector<std::string>> refs;
    for (const std::string& t : ref_texts)
      refs.push_back(split_whitespace(t));
    ResegmentOptions opts;
    opts.case_insensitive = er_icase;
    ResegmentResult r = mwer_resegment(hyp_words, refs, opts);

    std::vector<std::string> recut;
    std::string out;
    for (size_t j = 0; j + 1 < r.cuts.size(); ++j) {
      std::vector<std::string> piece(hyp_words.begin() + r.cuts[j],
                                     hyp_words.begin() + r.cuts[j + 1]);
      recut.push_back(join(piece));
      json line = {{"index", j}, {"text", recut.back()}};
      out += line.dump();
      out += '\n';
    }
    if (!er_out.empty()) atomic_write_file(er_out, out);
    BleuResult bleu =
        corpus_bleu(recut, ref_texts, parse_smoothing(er_smoothing));
    emit_report({{"cost", r.cost},
                 {"cuts", r.cuts},
                 {"bleu_after_realignment", bleu_to_json(bleu)}});
    return 0;
  }

  if (*an_overlap) {
    std::vector<AugmentedExample> examples = load_view(ao_view);
    std::vector<Document> corpus = load_corpus(ao_corpus);
    std::map<std::string, OverlapReport> by_view =
        overlap_report_by_view(examples, corpus, ao_eps);
    json j = json::object();
    for (const auto& [tag, report] : by_view) {
      j[tag] = {{"equal_pct", report.pct(report.equal)},
                {"isolated_pct", report.pct(report.isolated)},
                {"expanded_pct", report.pct(report.expanded)},
                {"mixed_pct", report.pct(report.mixed)},
                {"total", report.total()},
                {"gap_only", report.gap_only}};
    }
    emit_report({{"eps_s", ao_eps}, {"views", j}});
    return 0;
  }

  if (*an_pos) {
    std::vector<std::string> texts;
    if (!ap_view.empty()) {
      for (const AugmentedExample& ex : load_view(ap_view))
        texts.push_back(ap_side == "src" ? ex.src_text
                                         : ex.tgt_text.value_or(ex.src_text));
    } else if (!ap_corpus.empty()) {
      for (const Document& doc : load_corpus(ap_corpus))
        for (const ManualSegment& seg : doc.manual_segments)
          texts.push_back(ap_side == "src" ? seg.src_text : seg.tgt_text);
    } else {
      throw UsageError("analyze positions needs --view or --corpus");
    }
    json hist = json::object();
    for (const auto& [pos, count] : position_histogram(texts, ap_token))
      hist[std::to_string(pos)] = count;
    emit_report({{"token", ap_token},
                 {"texts", texts.size()},
                 {"histogram", hist}});
    return 0;
  }

  if (*an_buckets) {
    std::vector<AugmentedExample> examples = load_view(ab_view);
    std::vector<ViewSpec> views = plan_views(ab_mu);
    json j = json::object();
    for (const auto& [tag, idx] : duration_buckets(examples, views))
      j[tag] = idx.size();
    emit_report({{"examples", examples.size()}, {"buckets", j}});
    return 0;
  }

  if (*stats) {
    StatsReport report = emit_stats_dir(st_dir);
    emit_report(report.to_json());
    std::cerr << report.to_table();
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const segaug::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const segaug::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const segaug::StageError& e) {
    std::cerr << "stage error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
