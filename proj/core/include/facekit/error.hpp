// Copyright 2026 The FaceKit Authors
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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace facekit {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A tensor or parameter dimension does not satisfy an operation's contract.
class ShapeError : public Error {
 public:
  ShapeError(std::string dimension, const std::string& message)
      : Error(message + " [dimension: " + dimension + "]"),
        dimension_(std::move(dimension)) {}

  const std::string& dimension() const noexcept { return dimension_; }

 private:
  std::string dimension_;
};

/// Numeric input outside an operation's domain (zero scale, degenerate box, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Geometric configuration that admits no unique solution.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// Malformed text or binary content. Line/column are 1-based; 0 means unknown.
class FormatError : public Error {
 public:
  FormatError(const std::string& message, std::size_t line = 0, std::size_t column = 0)
      : Error(decorate(message, line, column)), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string decorate(const std::string& message, std::size_t line,
                              std::size_t column) {
    if (line == 0) return message;
    std::string out = message + " (line " + std::to_string(line);
    if (column != 0) out += ", column " + std::to_string(column);
    return out + ")";
  }

  std::size_t line_;
  std::size_t column_;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace facekit
