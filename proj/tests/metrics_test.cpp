// metrics_test.cpp
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

#include <functional>
#include <limits>
#include <random>

#include "gtest/gtest.h"
#include "oracles.hpp"
#include "segaug/analysis.hpp"
#include "segaug/bleu.hpp"
#include "segaug/resegment.hpp"
#include "segaug/segmenter.hpp"
#include "segaug/util.hpp"

namespace segaug {
namespace {

// ── tokenizer ───────────────────────────────────────────────────────

TEST(Tokenizer, SeparatesPunctuation) {
  EXPECT_EQ(tokenize_for_bleu("Hello, world!"),
            (std::vector<std::string>{"Hello", ",", "world", "!"}));
}

TEST(Tokenizer, KeepsIntraWordApostrophe) {
  EXPECT_EQ(tokenize_for_bleu("don't"), std::vector<std::string>{"don't"});
  EXPECT_EQ(tokenize_for_bleu("well-known"),
            std::vector<std::string>{"well-known"});
}

TEST(Tokenizer, EmptyInput) {
  EXPECT_TRUE(tokenize_for_bleu("").empty());
}

TEST(Tokenizer, EdgePunctuationDetaches) {
  EXPECT_EQ(tokenize_for_bleu("'tis so."),
            (std::vector<std::string>{"'", "tis", "so", "."}));
  EXPECT_EQ(tokenize_for_bleu("¿Qué tal?"),
            (std::vector<std::string>{"¿", "Qué", "tal", "?"}));
}

TEST(Tokenizer, CollapsesWhitespace) {
  EXPECT_EQ(tokenize_for_bleu("  a \t b  "),
            (std::vector<std::string>{"a", "b"}));
}

// ── corpus_bleu ─────────────────────────────────────────────────────

TEST(CorpusBleu, IdentityScoresHundred) {
  std::vector<std::string> text = {"the cat sat on the mat",
                                   "a stitch, in time!"};
  BleuResult r = corpus_bleu(text, text);
  EXPECT_DOUBLE_EQ(r.score, 100.0);
  EXPECT_DOUBLE_EQ(r.brevity_penalty, 1.0);
}

TEST(CorpusBleu, ZeroFourGramPrecisionScoresZeroUnsmoothed) {
  BleuResult r = corpus_bleu({"a b c d"}, {"a b c e"});
  EXPECT_DOUBLE_EQ(r.score, 0.0);
  EXPECT_DOUBLE_EQ(r.precisions[0], 3.0 / 4.0);
  EXPECT_DOUBLE_EQ(r.precisions[1], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.precisions[2], 1.0 / 2.0);
  EXPECT_DOUBLE_EQ(r.precisions[3], 0.0);
}

TEST(CorpusBleu, AddKSmoothedHandValue) {
  // precisions (3/4, 2/3, 1/2, 1/(1+1)), BP = 1:
  //   100 * (3/4 * 2/3 * 1/2 * 1/2)^(1/4) = 100 * 0.125^0.25
  BleuResult r = corpus_bleu({"a b c d"}, {"a b c e"},
                             BleuSmoothing::add_k(1.0));
  EXPECT_NEAR(r.score, 59.46035575013605, 1e-6);
  EXPECT_DOUBLE_EQ(r.precisions[3], 0.5);
}

TEST(CorpusBleu, BrevityPenaltyAppliesWhenShort) {
  BleuResult r = corpus_bleu({"a b"}, {"a b c d"});
  EXPECT_DOUBLE_EQ(r.brevity_penalty, std::exp(1.0 - 4.0 / 2.0));
}

TEST(CorpusBleu, RejectsBadInput) {
  EXPECT_THROW(corpus_bleu({"a"}, {"a", "b"}), DataError);
  EXPECT_THROW(corpus_bleu({}, {}), DataError);
}

TEST(CorpusBleu, PermutationInvariantWhenPairedTogether) {
  std::vector<std::string> hyps = {"a b c d", "x y z w", "p q r s"};
  std::vector<std::string> refs = {"a b c e", "x y z v", "p q r t"};
  BleuResult base = corpus_bleu(hyps, refs, BleuSmoothing::add_k(1.0));
  std::vector<std::string> hyps2 = {hyps[2], hyps[0], hyps[1]};
  std::vector<std::string> refs2 = {refs[2], refs[0], refs[1]};
  BleuResult perm = corpus_bleu(hyps2, refs2, BleuSmoothing::add_k(1.0));
  EXPECT_DOUBLE_EQ(base.score, perm.score);
}

// ── levenshtein ─────────────────────────────────────────────────────

TEST(Levenshtein, Basics) {
  std::vector<std::string> x = {"a", "b"};
  EXPECT_EQ(levenshtein(x, x), 0);
  std::vector<std::string> y = {"a", "c"};
  EXPECT_EQ(levenshtein(x, y), 1);
  std::vector<std::string> empty;
  EXPECT_EQ(levenshtein(empty, x), 2);
  EXPECT_EQ(levenshtein(x, empty), 2);
}

// ── mwer_resegment ──────────────────────────────────────────────────

using Refs = std::vector<std::vector<std::string>>;

TEST(MwerResegment, ExactMatchRecoversCuts) {
  ResegmentResult r = mwer_resegment({"a", "b", "c", "d"},
                                     Refs{{"a", "b"}, {"c", "d"}});
  EXPECT_EQ(r.cuts, (std::vector<size_t>{0, 2, 4}));
  EXPECT_EQ(r.cost, 0);
}

TEST(MwerResegment, OneSubstitution) {
  ResegmentResult r = mwer_resegment({"a", "x", "c", "d"},
                                     Refs{{"a", "b"}, {"c", "d"}});
  EXPECT_EQ(r.cuts, (std::vector<size_t>{0, 2, 4}));
  EXPECT_EQ(r.cost, 1);
}

TEST(MwerResegment, EmptyHypothesisDeletesEverything) {
  ResegmentResult r = mwer_resegment({}, Refs{{"a", "b"}, {"c"}, {"d"}});
  EXPECT_EQ(r.cuts, (std::vector<size_t>{0, 0, 0, 0}));
  EXPECT_EQ(r.cost, 4);
}

TEST(MwerResegment, CaseInsensitiveFlag) {
  Refs refs{{"Hello"}, {"World"}};
  ResegmentResult strict = mwer_resegment({"hello", "world"}, refs);
  EXPECT_EQ(strict.cost, 2);
  ResegmentOptions opts;
  opts.case_insensitive = true;
  ResegmentResult loose = mwer_resegment({"hello", "world"}, refs, opts);
  EXPECT_EQ(loose.cost, 0);
  EXPECT_EQ(loose.cuts, (std::vector<size_t>{0, 1, 2}));
}

TEST(MwerResegment, RejectsEmptyReferences) {
  EXPECT_THROW(mwer_resegment({"a"}, {}), DataError);
}

TEST(MwerResegment, MatchesBruteForceOnRandomCases) {
  std::mt19937_64 eng(77);
  const char* vocabulary[] = {"a", "b", "c", "d"};
  for (int iter = 0; iter < 300; ++iter) {
    size_t n = uniform_index(eng, 11);
    size_t m = 1 + uniform_index(eng, 4);
    std::vector<std::string> hyp;
    for (size_t i = 0; i < n; ++i)
      hyp.push_back(vocabulary[uniform_index(eng, 4)]);
    Refs refs(m);
    for (auto& seg : refs) {
      size_t len = 1 + uniform_index(eng, 4);
      for (size_t i = 0; i < len; ++i)
        seg.push_back(vocabulary[uniform_index(eng, 4)]);
    }
    ResegmentResult got = mwer_resegment(hyp, refs);
    std::vector<size_t> want_cuts;
    int64_t want_cost = 0;
    testing::mwer_brute_cuts(hyp, refs, &want_cuts, &want_cost);
    EXPECT_EQ(got.cost, want_cost) << "iter " << iter;
    EXPECT_EQ(got.cuts, want_cuts) << "iter " << iter;
  }
}

TEST(MwerResegment, SelfAlignmentRecoversReferenceCuts) {
  std::mt19937_64 eng(13);
  const char* vocabulary[] = {"u", "v", "w", "x", "y", "z"};
  for (int iter = 0; iter < 100; ++iter) {
    size_t m = 1 + uniform_index(eng, 4);
    Refs refs(m);
    std::vector<std::string> hyp;
    std::vector<size_t> expected_cuts = {0};
    for (auto& seg : refs) {
      size_t len = 1 + uniform_index(eng, 5);
      for (size_t i = 0; i < len; ++i) {
        seg.push_back(vocabulary[uniform_index(eng, 6)]);
        hyp.push_back(seg.back());
      }
      expected_cuts.push_back(hyp.size());
    }
    ResegmentResult r = mwer_resegment(hyp, refs);
    EXPECT_EQ(r.cost, 0) << "iter " << iter;
    // cost zero forces every piece to equal its reference exactly, so
    // the original cut points are the unique optimum
    EXPECT_EQ(r.cuts, expected_cuts) << "iter " << iter;
  }
}

// ── categorize_overlap ──────────────────────────────────────────────

const std::vector<std::pair<double, double>> kManual = {{0, 5}, {5, 10}};

TEST(Overlap, IsolatedSubset) {
  EXPECT_EQ(categorize_overlap(1, 4, kManual, 0.2),
            OverlapCategory::kIsolated);
}

TEST(Overlap, ExpandedSuperset) {
  // (0,10) covers (0,5) fully and is not equal to either segment
  EXPECT_EQ(categorize_overlap(0, 10, kManual, 0.2),
            OverlapCategory::kExpanded);
  EXPECT_EQ(categorize_overlap(-0.1, 10.4, kManual, 0.2),
            OverlapCategory::kExpanded);
}

TEST(Overlap, EqualWithinTolerance) {
  EXPECT_EQ(categorize_overlap(5.1, 9.9, kManual, 0.2),
            OverlapCategory::kEqual);
}

TEST(Overlap, MixedStraddler) {
  EXPECT_EQ(categorize_overlap(3, 7, kManual, 0.2), OverlapCategory::kMixed);
}

TEST(Overlap, NoOverlapCountsAsMixedWithGapFlag) {
  bool gap = false;
  EXPECT_EQ(categorize_overlap(20, 22, kManual, 0.2, &gap),
            OverlapCategory::kMixed);
  EXPECT_TRUE(gap);
}

TEST(Overlap, PriorityEqualBeatsIsolated) {
  // same boundaries as (0,5): equal wins although it is also a subset
  EXPECT_EQ(categorize_overlap(0.05, 5.05, kManual, 0.2),
            OverlapCategory::kEqual);
}

TEST(Overlap, InvariantToUniformShift) {
  std::mt19937_64 eng(5);
  for (int iter = 0; iter < 200; ++iter) {
    double s = uniform_double(eng, -2, 12);
    double e = s + uniform_double(eng, 0.3, 8);
    double shift = uniform_double(eng, -100, 100);
    std::vector<std::pair<double, double>> shifted;
    for (auto [a, b] : kManual) shifted.push_back({a + shift, b + shift});
    EXPECT_EQ(categorize_overlap(s, e, kManual, 0.2),
              categorize_overlap(s + shift, e + shift, shifted, 0.2));
  }
}

TEST(OverlapReportTest, PercentagesSumToHundred) {
  OverlapReport report;
  std::mt19937_64 eng(3);
  for (int i = 0; i < 997; ++i) {
    double s = uniform_double(eng, -2, 12);
    double e = s + uniform_double(eng, 0.3, 8);
    bool gap = false;
    report.add(categorize_overlap(s, e, kManual, 0.2, &gap), gap);
  }
  double sum = report.pct(report.equal) + report.pct(report.isolated) +
               report.pct(report.expanded) + report.pct(report.mixed);
  EXPECT_NEAR(sum, 100.0, 0.01);
  EXPECT_EQ(report.total(), 997u);
}

// ── position histogram / buckets / view stats ───────────────────────

TEST(PositionHistogram, CountsByAbsolutePosition) {
  std::map<size_t, size_t> hist = position_histogram({"a b", "b a"}, "b");
  EXPECT_EQ(hist.size(), 2u);
  EXPECT_EQ(hist[1], 1u);
  EXPECT_EQ(hist[0], 1u);
}

TEST(PositionHistogram, AbsentTokenGivesEmptyMap) {
  EXPECT_TRUE(position_histogram({"a b", "c d"}, "z").empty());
}

TEST(PositionHistogram, ResplittingSpreadsPositions) {
  // one long text vs the same words split into two: the token lands on
  // more distinct positions in the re-split view
  std::vector<std::string> original = {"x q x q x q"};
  std::vector<std::string> resplit = {"x q x", "q x q"};
  EXPECT_GE(position_histogram(resplit, "q").size(),
            position_histogram(original, "q").size());
}

AugmentedExample ex_of(double dur, const std::string& tag = "v") {
  AugmentedExample ex;
  ex.doc_id = "d";
  ex.view_tag = tag;
  ex.start_s = 0;
  ex.end_s = dur;
  ex.src_text = "x";
  ex.overflow = dur < 0.4 || dur > 30.0;
  return ex;
}

TEST(DurationBuckets, PaperRanges) {
  std::vector<ViewSpec> views = plan_views(4);
  std::vector<AugmentedExample> examples = {ex_of(2.5), ex_of(35.0),
                                            ex_of(3.0), ex_of(0.1)};
  auto buckets = duration_buckets(examples, views);
  EXPECT_EQ(buckets["s"], (std::vector<size_t>{0, 3}));
  EXPECT_EQ(buckets["m"], std::vector<size_t>{2});  // exactly 3.0 is "m"
  EXPECT_TRUE(buckets["l"].empty());
  EXPECT_EQ(buckets["xl"], std::vector<size_t>{1});  // beyond 30 s
}

TEST(DurationBuckets, EmptyInput) {
  auto buckets = duration_buckets({}, plan_views(4));
  EXPECT_EQ(buckets.size(), 4u);
  for (const auto& [tag, v] : buckets) EXPECT_TRUE(v.empty());
}

TEST(ViewStatsTest, CountsAndMeans) {
  std::vector<AugmentedExample> examples = {ex_of(3.0, "m"), ex_of(5.0, "m")};
  auto stats = view_stats(examples);
  EXPECT_EQ(stats["m"].count, 2u);
  ASSERT_TRUE(stats["m"].mean_duration_s.has_value());
  EXPECT_DOUBLE_EQ(*stats["m"].mean_duration_s, 4.0);
}

TEST(ViewStatsTest, EmptyInput) {
  auto stats = view_stats({});
  EXPECT_TRUE(stats.empty());
}

}  // namespace
}  // namespace segaug
