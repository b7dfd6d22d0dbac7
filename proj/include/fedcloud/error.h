/*
 * Copyright 2026 The fedcloud Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef FEDCLOUD_ERROR_H_
#define FEDCLOUD_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fedcloud {

// Root of every error the library throws. Callers that only care about
// "config vs runtime" (the CLI exit-code contract) use IsConfigError().
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters or configuration (bad key size, unknown mode, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A value violates a documented domain invariant (negative bandwidth, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. line() is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what
                        : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Ciphertexts or keys that belong to different key pairs were combined.
class KeyMismatchError : public Error {
 public:
  using Error::Error;
};

// Vector lengths, block specs or codecs do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Weighted averaging with a zero weight sum.
class DegenerateWeightsError : public Error {
 public:
  using Error::Error;
};

// Sync weights requested for platforms without fresh network samples.
class StalenessError : public Error {
 public:
  using Error::Error;
};

// An analysis was invoked outside the regime where it is exact.
class UnsupportedTaskError : public Error {
 public:
  using Error::Error;
};

inline bool IsConfigError(const std::exception& e) {
  return dynamic_cast<const ConfigError*>(&e) != nullptr ||
         dynamic_cast<const ValidationError*>(&e) != nullptr ||
         dynamic_cast<const ParseError*>(&e) != nullptr;
}

}  // namespace fedcloud

#endif  // FEDCLOUD_ERROR_H_
