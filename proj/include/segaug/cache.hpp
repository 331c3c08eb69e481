// cache.hpp
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
// Content-addressed stage cache. Entries are JSON files named by a
// digest over every parameter that influences the stage's output, so
// identical work is recognized across runs and across views. Writes
// go through a temp file and rename; concurrent writers race benignly
// (first writer wins, both wrote identical content).

#ifndef SEGAUG_CACHE_HPP_
#define SEGAUG_CACHE_HPP_

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "segaug/io.hpp"
#include "segaug/log.hpp"
#include "segaug/util.hpp"

namespace segaug {

enum class Stage { kSegment, kAlign, kTranslate };

inline std::string stage_name(Stage s) {
  switch (s) {
    case Stage::kSegment: return "segment";
    case Stage::kAlign: return "align";
    case Stage::kTranslate: return "translate";
  }
  return "?";
}

struct CacheKey {
  std::string doc_id;
  Stage stage = Stage::kAlign;
  uint64_t digest = 0;  // over all stage-relevant parameters

  std::string filename() const {
    std::string safe;
    for (char c : doc_id) {
      bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
      safe.push_back(ok ? c : '_');
    }
    return stage_name(stage) + "_" + safe + "_" + hex64(digest) + ".json";
  }
};

class Cache {
 public:
  Cache() = default;
  explicit Cache(std::filesystem::path dir) : dir_(std::move(dir)) {
    enabled_ = !dir_.empty();
    if (enabled_) std::filesystem::create_directories(dir_);
  }

  bool enabled() const { return enabled_; }

  std::optional<nlohmann::json> get(const CacheKey& key) const {
    if (!enabled_) return std::nullopt;
    std::filesystem::path path = dir_ / key.filename();
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return std::nullopt;
    try {
      return nlohmann::json::parse(read_file(path));
    } catch (const std::exception& e) {
      log_warn("discarding unreadable cache entry " + path.string() + ": " +
               e.what());
      return std::nullopt;
    }
  }

  void put(const CacheKey& key, const nlohmann::json& value) const {
    if (!enabled_) return;
    atomic_write_file(dir_ / key.filename(), value.dump());
  }

 private:
  std::filesystem::path dir_;
  bool enabled_ = false;
};

}  // namespace segaug

#endif  // SEGAUG_CACHE_HPP_
