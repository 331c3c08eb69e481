// log.hpp
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

#ifndef SEGAUG_LOG_HPP_
#define SEGAUG_LOG_HPP_

#include <atomic>
#include <cstdio>
#include <mutex>
#include <string>

namespace segaug {

enum class LogLevel { kDebug = 0, kInfo = 1, kWarn = 2, kError = 3 };

namespace detail {
inline std::atomic<int>& log_level_ref() {
  static std::atomic<int> level{static_cast<int>(LogLevel::kInfo)};
  return level;
}
inline std::mutex& log_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

inline void set_log_level(LogLevel level) {
  detail::log_level_ref().store(static_cast<int>(level));
}

inline bool set_log_level(const std::string& name) {
  if (name == "debug") set_log_level(LogLevel::kDebug);
  else if (name == "info") set_log_level(LogLevel::kInfo);
  else if (name == "warn") set_log_level(LogLevel::kWarn);
  else if (name == "error") set_log_level(LogLevel::kError);
  else return false;
  return true;
}

inline void log_msg(LogLevel level, const std::string& msg) {
  if (static_cast<int>(level) < detail::log_level_ref().load()) return;
  static const char* names[] = {"DEBUG", "INFO", "WARN", "ERROR"};
  std::lock_guard<std::mutex> lock(detail::log_mutex());
  std::fprintf(stderr, "[%s] %s\n", names[static_cast<int>(level)],
               msg.c_str());
}

inline void log_debug(const std::string& msg) {
  log_msg(LogLevel::kDebug, msg);
}
inline void log_info(const std::string& msg) { log_msg(LogLevel::kInfo, msg); }
inline void log_warn(const std::string& msg) { log_msg(LogLevel::kWarn, msg); }
inline void log_error(const std::string& msg) {
  log_msg(LogLevel::kError, msg);
}

}  // namespace segaug

#endif  // SEGAUG_LOG_HPP_
