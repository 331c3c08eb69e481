// make_demo_data.cpp
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
// Writes a small synthetic corpus (manifest, frame probabilities,
// emission matrices) so the pipeline can be exercised without any
// model inference. Probabilities and emissions go to binary per-doc
// files by default; pass --jsonl for the JSON Lines variants.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "segaug/corpus.hpp"
#include "segaug/emissions.hpp"
#include "segaug/frame_probs.hpp"
#include "segaug/testing/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"generate synthetic demo data for the pipeline"};
  std::string out_dir = "demo";
  int docs = 3;
  int sentences = 8;
  uint64_t seed = 1;
  bool jsonl = false;
  app.add_option("out_dir", out_dir, "output directory")
      ->capture_default_str();
  app.add_option("--docs", docs, "number of documents")
      ->capture_default_str();
  app.add_option("--sentences", sentences, "sentences per document")
      ->capture_default_str();
  app.add_option("--seed", seed, "generator seed")->capture_default_str();
  app.add_flag("--jsonl", jsonl, "write JSONL instead of binary files");
  CLI11_PARSE(app, argc, argv);

  namespace fs = std::filesystem;
  using namespace segaug;

  testing::SyntheticOptions opts;
  opts.sentences = sentences;
  std::vector<testing::SyntheticDoc> corpus =
      testing::make_synthetic_corpus(static_cast<size_t>(docs), seed, opts);

  fs::create_directories(out_dir);
  std::vector<Document> ds;
  for (const auto& sd : corpus) ds.push_back(sd.doc);
  save_corpus(ds, fs::path(out_dir) / "corpus.jsonl");

  if (jsonl) {
    std::vector<FrameProbabilities> ps;
    std::vector<EmissionMatrix> es;
    for (const auto& sd : corpus) {
      ps.push_back(sd.probs);
      es.push_back(sd.emissions);
    }
    save_probabilities_jsonl(ps, fs::path(out_dir) / "probs.jsonl");
    save_emissions_jsonl(es, fs::path(out_dir) / "emissions.jsonl");
  } else {
    fs::create_directories(fs::path(out_dir) / "probs");
    fs::create_directories(fs::path(out_dir) / "emissions");
    for (const auto& sd : corpus) {
      save_probabilities_binary(
          sd.probs, fs::path(out_dir) / "probs" / (sd.doc.id + ".segp"));
      save_emissions_binary(
          sd.emissions,
          fs::path(out_dir) / "emissions" / (sd.doc.id + ".sege"));
    }
  }
  std::printf("wrote %d documents to %s\n", docs, out_dir.c_str());
  return 0;
}
