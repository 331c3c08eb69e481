// translate_test.cpp
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

#include "segaug/translate.hpp"

#include <sys/stat.h>

#include "gtest/gtest.h"
#include "test_util.hpp"

namespace segaug {
namespace {

using testing::TempDir;
using testing::write_text;

// ── translate_batch ─────────────────────────────────────────────────

TEST(TranslateBatch, IdentityPassesThrough) {
  TranslatorPort port;
  EXPECT_EQ(translate_batch(port, {"hola"}), std::vector<std::string>{"hola"});
}

TEST(TranslateBatch, LexiconSubstitutesWordByWord) {
  TranslatorPort port;
  port.kind = TranslatorPort::Kind::kLexicon;
  port.lexicon = {{"hola", "hello"}};
  EXPECT_EQ(translate_batch(port, {"hola mundo"}),
            std::vector<std::string>{"hello mundo"});
}

std::string make_script(const TempDir& tmp, const std::string& name,
                        const std::string& body) {
  std::filesystem::path path = tmp.file(name);
  write_text(path, "#!/bin/sh\n" + body + "\n");
  chmod(path.c_str(), 0755);
  return path.string();
}

TEST(TranslateBatch, ExternalCommandTranslates) {
  TempDir tmp;
  std::string script =
      make_script(tmp, "upper.sh", "tr 'a-z' 'A-Z' < \"$1\" > \"$2\"");
  TranslatorPort port;
  port.kind = TranslatorPort::Kind::kExternal;
  port.command = script;
  EXPECT_EQ(translate_batch(port, {"uno", "dos"}),
            (std::vector<std::string>{"UNO", "DOS"}));
}

TEST(TranslateBatch, ExternalLineCountMismatchFails) {
  TempDir tmp;
  std::string script =
      make_script(tmp, "short.sh", "head -n 1 \"$1\" > \"$2\"");
  TranslatorPort port;
  port.kind = TranslatorPort::Kind::kExternal;
  port.command = script;
  EXPECT_THROW(translate_batch(port, {"uno", "dos"}), StageError);
}

TEST(TranslateBatch, ExternalNonzeroExitFails) {
  TempDir tmp;
  std::string script = make_script(tmp, "fail.sh", "exit 3");
  TranslatorPort port;
  port.kind = TranslatorPort::Kind::kExternal;
  port.command = script;
  EXPECT_THROW(translate_batch(port, {"uno"}), StageError);
}

TEST(TranslateBatch, ExternalTimeoutFails) {
  TempDir tmp;
  std::string script =
      make_script(tmp, "slow.sh", "sleep 5; cp \"$1\" \"$2\"");
  TranslatorPort port;
  port.kind = TranslatorPort::Kind::kExternal;
  port.command = script;
  port.timeout_s = 0.2;
  try {
    translate_batch(port, {"uno"});
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_NE(std::string(e.what()).find("timed out"), std::string::npos);
  }
}

TEST(TranslateBatch, ExternalBatchesPreserveOrder) {
  TempDir tmp;
  std::string script =
      make_script(tmp, "upper.sh", "tr 'a-z' 'A-Z' < \"$1\" > \"$2\"");
  TranslatorPort port;
  port.kind = TranslatorPort::Kind::kExternal;
  port.command = script;
  port.batch_size = 2;
  EXPECT_EQ(translate_batch(port, {"a", "b", "c", "d", "e"}),
            (std::vector<std::string>{"A", "B", "C", "D", "E"}));
}

TEST(ParseTranslatorSpec, Kinds) {
  EXPECT_EQ(parse_translator_spec("identity").kind,
            TranslatorPort::Kind::kIdentity);
  EXPECT_EQ(parse_translator_spec("command:mt.sh").kind,
            TranslatorPort::Kind::kExternal);
  EXPECT_THROW(parse_translator_spec("bogus"), UsageError);
  TempDir tmp;
  write_text(tmp.file("lex.tsv"), "hola\thello\n");
  TranslatorPort port =
      parse_translator_spec("lexicon:" + tmp.file("lex.tsv").string());
  EXPECT_EQ(port.kind, TranslatorPort::Kind::kLexicon);
  EXPECT_EQ(port.lexicon.at("hola"), "hello");
}

// ── build_mt_pairs ──────────────────────────────────────────────────

Document make_doc(std::vector<double> durations) {
  Document doc;
  doc.id = "d";
  double t = 0;
  for (size_t i = 0; i < durations.size(); ++i) {
    ManualSegment seg;
    seg.index = static_cast<int>(i);
    seg.start_s = t;
    t += durations[i];
    seg.end_s = t;
    seg.src_text = "s" + std::to_string(i);
    seg.tgt_text = "t" + std::to_string(i);
    doc.manual_segments.push_back(seg);
  }
  doc.duration_s = t;
  return doc;
}

ViewSpec view_of(double min_s, double max_s) {
  ViewSpec v;
  v.tag = "m";
  v.min_s = min_s;
  v.max_s = max_s;
  return v;
}

TEST(BuildMtPairs, AccumulatesUnderSampledTarget) {
  Document doc = make_doc({2, 3, 4});
  std::vector<MtPair> pairs =
      build_mt_pairs_with_sampler(doc, view_of(3, 10), [] { return 7.0; });
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[0].constituent_indices, (std::vector<int>{0, 1}));
  EXPECT_EQ(pairs[0].src, "s0 s1");
  EXPECT_EQ(pairs[0].tgt, "t0 t1");
  EXPECT_EQ(pairs[1].constituent_indices, std::vector<int>{2});
}

TEST(BuildMtPairs, TargetAboveDocDurationGivesSinglePair) {
  Document doc = make_doc({2, 3, 4});
  std::vector<MtPair> pairs =
      build_mt_pairs_with_sampler(doc, view_of(100, 200), [] { return 150.0; });
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].constituent_indices, (std::vector<int>{0, 1, 2}));
}

TEST(BuildMtPairs, SingleSegmentDoc) {
  Document doc = make_doc({5});
  std::vector<MtPair> pairs = build_mt_pairs(doc, view_of(3, 10), 1);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].src, "s0");
}

TEST(BuildMtPairs, MaxBoundsStopAccumulation) {
  // 5+5 < L=11 but appending would exceed max 8
  Document doc = make_doc({5, 5});
  std::vector<MtPair> pairs =
      build_mt_pairs_with_sampler(doc, view_of(3, 8), [] { return 11.0; });
  ASSERT_EQ(pairs.size(), 2u);
}

TEST(BuildMtPairs, DeterministicBySeedAndPartition) {
  Document doc = make_doc({1, 2, 3, 2, 1, 4, 2, 3});
  std::vector<MtPair> a = build_mt_pairs(doc, view_of(3, 10), 42);
  std::vector<MtPair> b = build_mt_pairs(doc, view_of(3, 10), 42);
  ASSERT_EQ(a.size(), b.size());
  std::vector<int> covered;
  std::vector<std::string> srcs;
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].constituent_indices, b[i].constituent_indices);
    for (int idx : a[i].constituent_indices) covered.push_back(idx);
    srcs.push_back(a[i].src);
  }
  // indices partition 0..m-1 and sources reassemble the transcript
  std::vector<int> expect_indices;
  for (int i = 0; i < 8; ++i) expect_indices.push_back(i);
  EXPECT_EQ(covered, expect_indices);
  EXPECT_EQ(join(srcs), doc_transcript(doc));
}

TEST(BuildMtPairs, RejectsEmptyDocument) {
  Document doc;
  doc.id = "d";
  EXPECT_THROW(build_mt_pairs(doc, view_of(3, 10), 1), DataError);
}

// ── doc_level_bleu ──────────────────────────────────────────────────

TEST(DocLevelBleu, RegroupingScoresHundred) {
  std::map<std::string, std::string> refs = {
      {"d1", "the cat sat on the mat today"},
      {"d2", "all good things come in time"}};
  std::map<std::string, std::vector<std::string>> hyps = {
      {"d1", {"the cat", "sat on the", "mat today"}},
      {"d2", {"all good things come in time"}}};
  BleuResult r = doc_level_bleu(hyps, refs);
  EXPECT_DOUBLE_EQ(r.score, 100.0);
}

TEST(DocLevelBleu, MissingReferenceIsAnError) {
  std::map<std::string, std::vector<std::string>> hyps = {{"d1", {"x"}}};
  EXPECT_THROW(doc_level_bleu(hyps, {}), DataError);
  EXPECT_THROW(doc_level_bleu({}, {}), DataError);
}

TEST(DocLevelBleu, SubsetSamplingIsDeterministic) {
  std::map<std::string, std::string> refs;
  std::map<std::string, std::vector<std::string>> hyps;
  for (int i = 0; i < 10; ++i) {
    std::string id = "d" + std::to_string(i);
    std::string text = "sentence number " + std::to_string(i) + " here";
    refs[id] = text;
    hyps[id] = {text};
  }
  // one imperfect doc: subset choice changes whether it is scored
  hyps["d3"] = {"sentence number three roughly here"};
  BleuResult a = doc_level_bleu(hyps, refs, 4, 7, BleuSmoothing::add_k(1));
  BleuResult b = doc_level_bleu(hyps, refs, 4, 7, BleuSmoothing::add_k(1));
  EXPECT_DOUBLE_EQ(a.score, b.score);
  BleuResult full = doc_level_bleu(hyps, refs, std::nullopt, 0,
                                   BleuSmoothing::add_k(1));
  EXPECT_LT(full.score, 100.0);
}

// ── paraphrase_view ─────────────────────────────────────────────────

TEST(ParaphraseView, IdentityKeepsSourceText) {
  Document doc = make_doc({2, 3});
  TranslatorPort port;
  std::vector<AugmentedExample> out = paraphrase_view({doc}, port);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].tgt_text, out[0].src_text);
  EXPECT_DOUBLE_EQ(out[0].start_s, doc.manual_segments[0].start_s);
  EXPECT_DOUBLE_EQ(out[1].end_s, doc.manual_segments[1].end_s);
  EXPECT_EQ(out[0].view_tag, "para");
}

TEST(ParaphraseView, LexiconSubstitutesTargetsOnly) {
  Document doc = make_doc({2, 3});
  TranslatorPort port;
  port.kind = TranslatorPort::Kind::kLexicon;
  port.lexicon = {{"s0", "z0"}};
  std::vector<AugmentedExample> out = paraphrase_view({doc}, port);
  EXPECT_EQ(out[0].src_text, "s0");
  EXPECT_EQ(out[0].tgt_text, "z0");
  EXPECT_EQ(out[1].tgt_text, "s1");  // unknown words pass through
}

TEST(ParaphraseView, CountsMatchManualSegments) {
  std::vector<Document> corpus = {make_doc({2, 3, 4}), make_doc({1, 2})};
  TranslatorPort port;
  std::vector<AugmentedExample> out = paraphrase_view(corpus, port);
  EXPECT_EQ(out.size(), 5u);
}

}  // namespace
}  // namespace segaug
