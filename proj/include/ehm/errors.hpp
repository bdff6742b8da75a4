// Copyright 2026 The EHM Authors
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

#ifndef EHM_ERRORS_HPP_
#define EHM_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace ehm {

// Process exit codes, also carried by every library error.
enum class ErrorCode : int {
  kOk = 0,
  kUsage = 2,
  kIo = 3,
  kValidation = 4,
  kDivergence = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::kIo, what) {}
};

// Malformed configuration or data text.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what)
      : Error(ErrorCode::kValidation, "parse error: " + what) {}
};

// A name that does not resolve (segment, joint, geometry, parameter path).
class ReferenceError : public Error {
 public:
  explicit ReferenceError(const std::string& what)
      : Error(ErrorCode::kValidation, "reference error: " + what) {}
};

// A physically meaningless value (negative mass, zero-length axis, ...).
class UnitError : public Error {
 public:
  explicit UnitError(const std::string& what)
      : Error(ErrorCode::kValidation, "unit error: " + what) {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorCode::kUsage, what) {}
};

class DivergenceError : public Error {
 public:
  DivergenceError(double time, const std::string& what)
      : Error(ErrorCode::kDivergence,
              "simulation diverged at t=" + std::to_string(time) + " s: " +
                  what),
        time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

}  // namespace ehm

#endif  // EHM_ERRORS_HPP_
