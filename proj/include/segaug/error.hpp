// error.hpp
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

#ifndef SEGAUG_ERROR_HPP_
#define SEGAUG_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace segaug {

// Bad command-line/parameter usage. CLI exit code 1.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent input data (parse errors, invariant
// violations). CLI exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// A processing stage failed (infeasible alignment, external command
// failure, I/O trouble mid-pipeline). CLI exit code 3.
class StageError : public std::runtime_error {
 public:
  explicit StageError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace segaug

#endif  // SEGAUG_ERROR_HPP_
