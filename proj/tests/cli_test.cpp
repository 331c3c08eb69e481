// cli_test.cpp
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
// Drives the built command-line binaries end to end.

#include <sys/wait.h>

#include <cstdio>
#include <string>

#include <json.hpp>

#include "gtest/gtest.h"
#include "segaug/corpus.hpp"
#include "segaug/emissions.hpp"
#include "segaug/frame_probs.hpp"
#include "segaug/testing/synthetic.hpp"
#include "test_util.hpp"

#ifndef SEGAUG_CLI
#error "SEGAUG_CLI must point at the segaug binary"
#endif

namespace segaug {
namespace {

using nlohmann::json;
using testing::TempDir;
using testing::write_text;

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  std::string cmd = std::string(SEGAUG_CLI) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  EXPECT_NE(pipe, nullptr);
  RunResult r;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) r.out.append(buf, n);
  int rc = pclose(pipe);
  r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::vector<testing::SyntheticDoc> corpus =
        testing::make_synthetic_corpus(2, 2025);
    std::vector<Document> ds;
    std::vector<FrameProbabilities> ps;
    std::vector<EmissionMatrix> es;
    for (const auto& sd : corpus) {
      ds.push_back(sd.doc);
      ps.push_back(sd.probs);
      es.push_back(sd.emissions);
    }
    save_corpus(ds, tmp_.file("corpus.jsonl"));
    save_probabilities_jsonl(ps, tmp_.file("probs.jsonl"));
    save_emissions_jsonl(es, tmp_.file("emissions.jsonl"));
  }

  std::string path(const std::string& name) const {
    return tmp_.file(name).string();
  }

  TempDir tmp_;
};

TEST_F(CliTest, SegmentSubcommandWritesSegmentationJsonl) {
  RunResult r = run_cli("segment --probs " + path("probs.jsonl") +
                        " --view 3,10 --algo pdac --out " + path("seg.jsonl"));
  ASSERT_EQ(r.exit_code, 0) << r.out;
  json report = json::parse(r.out);
  EXPECT_EQ(report["documents"], 2);
  EXPECT_GT(report["segments"].get<int>(), 0);
  size_t lines = 0;
  for_each_line(tmp_.file("seg.jsonl"), [&](const std::string& line, size_t) {
    json j = json::parse(line);
    EXPECT_TRUE(j.contains("doc_id"));
    EXPECT_LT(j["start_s"].get<double>(), j["end_s"].get<double>());
    ++lines;
  });
  EXPECT_EQ(lines, report["segments"].get<size_t>());
}

TEST_F(CliTest, AugmentProducesViewFilesAndReport) {
  RunResult r = run_cli("augment --corpus " + path("corpus.jsonl") +
                        " --probs " + path("probs.jsonl") + " --emissions " +
                        path("emissions.jsonl") + " --out-dir " +
                        path("out") + " --cache-dir " + path("cache") +
                        " --jobs 2");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  json report = json::parse(r.out);
  EXPECT_EQ(report["succeeded"], 2);
  for (const char* tag : {"s", "m", "l", "xl"})
    EXPECT_TRUE(
        std::filesystem::exists(tmp_.file("out") / ("view_" +
                                                    std::string(tag) +
                                                    ".jsonl")));
  EXPECT_TRUE(
      std::filesystem::exists(tmp_.file("out") / "augment_report.json"));

  // warm rerun reports full cache hits
  RunResult warm = run_cli("augment --corpus " + path("corpus.jsonl") +
                           " --probs " + path("probs.jsonl") +
                           " --emissions " + path("emissions.jsonl") +
                           " --out-dir " + path("out2") + " --cache-dir " +
                           path("cache"));
  ASSERT_EQ(warm.exit_code, 0);
  json warm_report = json::parse(warm.out);
  EXPECT_EQ(warm_report["align_cache"]["hits"], 2);
  EXPECT_EQ(warm_report["align_cache"]["misses"], 0);
}

TEST_F(CliTest, EvalResegmentComposesCutsAndBleu) {
  // hand-built three-segment case with one substitution
  write_text(tmp_.file("hyp.txt"), "the cat sat on a mat all done now\n");
  write_text(tmp_.file("ref.txt"), "the cat sat\non the mat\nall done now\n");
  RunResult r = run_cli("eval resegment --hyp " + path("hyp.txt") +
                        " --ref " + path("ref.txt") + " --out " +
                        path("recut.jsonl") + " --smoothing addk:1");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  json report = json::parse(r.out);
  EXPECT_EQ(report["cost"], 1);
  EXPECT_EQ(report["cuts"], (json::array({0, 3, 6, 9})));
  double score = report["bleu_after_realignment"]["score"].get<double>();
  EXPECT_GT(score, 0.0);
  EXPECT_LT(score, 100.0);
}

TEST_F(CliTest, EvalResegmentAcceptsViewJsonlReferences) {
  write_text(tmp_.file("hyp.txt"), "a b c d\n");
  AugmentedExample ex1, ex2;
  ex1.doc_id = ex2.doc_id = "d";
  ex1.view_tag = ex2.view_tag = "m";
  ex1.start_s = 0;
  ex1.end_s = 1;
  ex1.src_text = "x";
  ex1.tgt_text = "a b";
  ex2.start_s = 1;
  ex2.end_s = 2;
  ex2.src_text = "y";
  ex2.tgt_text = "c d";
  save_view({ex1, ex2}, tmp_.file("ref.jsonl"));
  RunResult r = run_cli("eval resegment --hyp " + path("hyp.txt") +
                        " --ref " + path("ref.jsonl"));
  ASSERT_EQ(r.exit_code, 0) << r.out;
  json report = json::parse(r.out);
  EXPECT_EQ(report["cost"], 0);
  EXPECT_EQ(report["cuts"], (json::array({0, 2, 4})));
}

TEST_F(CliTest, AnalyzeOverlapEmitsPercentagesThatSum) {
  run_cli("augment --corpus " + path("corpus.jsonl") + " --probs " +
          path("probs.jsonl") + " --emissions " + path("emissions.jsonl") +
          " --out-dir " + path("out"));
  RunResult r = run_cli("analyze overlap --view " +
                        (tmp_.file("out") / "view_m.jsonl").string() +
                        " --corpus " + path("corpus.jsonl"));
  ASSERT_EQ(r.exit_code, 0) << r.out;
  json report = json::parse(r.out);
  ASSERT_TRUE(report["views"].contains("m"));
  const json& m = report["views"]["m"];
  double sum = m["equal_pct"].get<double>() + m["isolated_pct"].get<double>() +
               m["expanded_pct"].get<double>() + m["mixed_pct"].get<double>();
  EXPECT_NEAR(sum, 100.0, 0.01);
}

TEST_F(CliTest, ExitCodesDistinguishErrorKinds) {
  EXPECT_EQ(run_cli("segment --algo pdac").exit_code, 1);  // missing args
  EXPECT_EQ(run_cli("no-such-command").exit_code, 1);
  write_text(tmp_.file("bad.jsonl"), "this is not json\n");
  EXPECT_EQ(run_cli("stats --dir " + path("bad.jsonl")).exit_code, 2);
}

TEST_F(CliTest, ConfigFileSuppliesGlobalOptions) {
  write_text(tmp_.file("run.cfg"), "jobs=2\nseed=9\n");
  RunResult r = run_cli("--config " + path("run.cfg") + " augment --corpus " +
                        path("corpus.jsonl") + " --probs " +
                        path("probs.jsonl") + " --emissions " +
                        path("emissions.jsonl") + " --out-dir " +
                        path("outcfg"));
  EXPECT_EQ(r.exit_code, 0) << r.out;
}

TEST_F(CliTest, TranslateSubcommandIdentity) {
  write_text(tmp_.file("in.txt"), "uno\ndos\n");
  RunResult r = run_cli("translate --in " + path("in.txt") + " --out " +
                        path("out.txt") + " --port identity");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(testing::read_text(tmp_.file("out.txt")), "uno\ndos\n");
}

TEST_F(CliTest, ParaphraseEmitsViewFile) {
  RunResult r = run_cli("paraphrase --corpus " + path("corpus.jsonl") +
                        " --port identity --out " + path("para.jsonl"));
  ASSERT_EQ(r.exit_code, 0) << r.out;
  std::vector<AugmentedExample> out = load_view(tmp_.file("para.jsonl"));
  ASSERT_FALSE(out.empty());
  EXPECT_EQ(out[0].view_tag, "para");
  EXPECT_EQ(*out[0].tgt_text, out[0].src_text);
}

TEST_F(CliTest, DemoToolFeedsBinaryDirectoriesIntoAugment) {
  RunResult gen = RunResult{};
  {
    std::string cmd = std::string(SEGAUG_DEMO) + " " + path("demo") +
                      " --docs 1 --sentences 4 --seed 3 2>/dev/null";
    gen.exit_code = WEXITSTATUS(std::system(cmd.c_str()));
  }
  ASSERT_EQ(gen.exit_code, 0);
  ASSERT_TRUE(std::filesystem::exists(tmp_.file("demo") / "probs" /
                                      "doc1.segp"));
  RunResult r = run_cli("augment --corpus " +
                        (tmp_.file("demo") / "corpus.jsonl").string() +
                        " --probs " + (tmp_.file("demo") / "probs").string() +
                        " --emissions " +
                        (tmp_.file("demo") / "emissions").string() +
                        " --out-dir " + path("demo_out"));
  ASSERT_EQ(r.exit_code, 0) << r.out;
  json report = json::parse(r.out);
  EXPECT_EQ(report["succeeded"], 1);
}

}  // namespace
}  // namespace segaug
