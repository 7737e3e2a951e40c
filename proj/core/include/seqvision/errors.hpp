// Copyright 2026 The Seqvision Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SEQVISION_ERRORS_HPP_
#define SEQVISION_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace seqvision {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller violated an operation precondition (id out of range, shape
// mismatch, label outside the palette, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Configuration that fails validation before any work starts.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input file (manifest line, corpus, image header).
class FormatError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class NetworkError : public Error {
 public:
  using Error::Error;
};

enum class CheckpointErrorKind { kBadMagic, kTruncated, kMalformed, kLayoutMismatch, kIo };

class CheckpointError : public Error {
 public:
  CheckpointError(CheckpointErrorKind kind, const std::string& what)
      : Error(what), kind_(kind) {}
  CheckpointErrorKind kind() const { return kind_; }

 private:
  CheckpointErrorKind kind_;
};

}  // namespace seqvision

#endif  // SEQVISION_ERRORS_HPP_
