// Copyright 2026 The debcse Authors.
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

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace debcse {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller violated a documented precondition (bad argument, bad config).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Input data could not be used: unreadable file, malformed record, etc.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Embedding file rejected by the reader.
class FormatError : public DataError {
 public:
  enum class Kind { kIo, kBadMagic, kVersionMismatch, kTruncated, kTrailingData, kNonFinite, kZeroNorm };

  FormatError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// A numeric quantity became NaN or infinite during training.
class NonFiniteError : public Error {
 public:
  NonFiniteError(std::string parameter, const std::string& what)
      : Error(what), parameter_(std::move(parameter)) {}

  const std::string& parameter() const noexcept { return parameter_; }

 private:
  std::string parameter_;
};

}  // namespace debcse
