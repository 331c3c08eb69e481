// io.hpp
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
// File helpers: whole-file and line-oriented reads, crash-safe writes
// (temp file then rename), and little-endian binary primitives.

#ifndef SEGAUG_IO_HPP_
#define SEGAUG_IO_HPP_

#include <unistd.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "segaug/error.hpp"
#include "segaug/util.hpp"

namespace segaug {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Calls fn(line, line_number) for every line; line numbers are 1-based.
// Blank lines are skipped.
inline void for_each_line(
    const std::filesystem::path& path,
    const std::function<void(const std::string&, size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    bool blank = true;
    for (char c : line)
      if (!is_ascii_space(c)) {
        blank = false;
        break;
      }
    if (blank) continue;
    fn(line, lineno);
  }
}

// Writes content to a sibling temp file, then renames it into place.
// Readers never observe a partial file.
inline void atomic_write_file(const std::filesystem::path& path,
                              const std::string& content) {
  namespace fs = std::filesystem;
  fs::path dir = path.parent_path();
  if (!dir.empty()) fs::create_directories(dir);
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StageError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw StageError("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw StageError("rename failed for " + path.string() + ": " +
                     ec.message());
  }
}

// ── Little-endian binary primitives ──────────────────────────────────
// The host is assumed little-endian (x86/aarch64); values are memcpy'd.

class BinaryWriter {
 public:
  void raw(const void* data, size_t len) {
    const char* p = static_cast<const char*>(data);
    buf_.insert(buf_.end(), p, p + len);
  }
  void u32(uint32_t v) { raw(&v, sizeof v); }
  void u64(uint64_t v) { raw(&v, sizeof v); }
  void f32(float v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void str(const std::string& s) {
    u32(static_cast<uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  const std::string& data() const { return buf_; }

 private:
  std::string buf_;
};

class BinaryReader {
 public:
  BinaryReader(std::string data, std::string name)
      : buf_(std::move(data)), name_(std::move(name)) {}

  void raw(void* out, size_t len) {
    if (pos_ + len > buf_.size())
      throw DataError(name_ + ": truncated binary file");
    std::memcpy(out, buf_.data() + pos_, len);
    pos_ += len;
  }
  uint32_t u32() {
    uint32_t v;
    raw(&v, sizeof v);
    return v;
  }
  uint64_t u64() {
    uint64_t v;
    raw(&v, sizeof v);
    return v;
  }
  float f32() {
    float v;
    raw(&v, sizeof v);
    return v;
  }
  double f64() {
    double v;
    raw(&v, sizeof v);
    return v;
  }
  std::string str() {
    uint32_t n = u32();
    if (pos_ + n > buf_.size())
      throw DataError(name_ + ": truncated binary file");
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool at_end() const { return pos_ == buf_.size(); }
  const std::string& name() const { return name_; }

 private:
  std::string buf_;
  std::string name_;
  size_t pos_ = 0;
};

}  // namespace segaug

#endif  // SEGAUG_IO_HPP_
