// Copyright 2026 The memelens Authors.
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

#ifndef MEMELENS_ERRORS_H_
#define MEMELENS_ERRORS_H_

#include <stdexcept>
#include <string>

namespace memelens {

// Input data that fails to parse or violates a data contract. The CLI maps
// this family to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string &path, size_t line, const std::string &what)
      : DataError(path + ":" + std::to_string(line) + ": " + what),
        line_(line) {}

  size_t line() const { return line_; }

 private:
  size_t line_;
};

class ValidationError : public DataError {
 public:
  using DataError::DataError;
};

class InsufficientDataError : public DataError {
 public:
  using DataError::DataError;
};

// Model files that are missing, corrupt, or incompatible with the inputs.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Training diverged or could not start.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConflictError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace memelens

#endif  // MEMELENS_ERRORS_H_
