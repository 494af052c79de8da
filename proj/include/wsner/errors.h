// Copyright 2026 The wsner Authors.
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

#ifndef WSNER_ERRORS_H_
#define WSNER_ERRORS_H_

#include <stdexcept>
#include <string>

namespace wsner {

// Base class for all errors raised by the toolkit. Data errors (bad input
// files, inconsistent datasets) derive from it; the command line tool maps
// them to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input line. Carries the file name (may be empty) and the 1-based
// line number.
class ParseError : public Error {
 public:
  ParseError(const std::string &file, int line, const std::string &what)
      : Error(Format(file, line, what)), file_(file), line_(line) {}

  const std::string &file() const { return file_; }
  int line() const { return line_; }

 private:
  static std::string Format(const std::string &file, int line,
                            const std::string &what) {
    std::string where = file.empty() ? "<input>" : file;
    return where + ":" + std::to_string(line) + ": " + what;
  }

  std::string file_;
  int line_;
};

// Label or type not declared in the tag set.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss or parameters during training.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Gold and predicted datasets do not line up.
class AlignmentError : public Error {
 public:
  AlignmentError(int sentence, const std::string &what)
      : Error("sentence " + std::to_string(sentence) + ": " + what),
        sentence_(sentence) {}
  int sentence() const { return sentence_; }

 private:
  int sentence_;
};

// Confusion matrix cannot be estimated from the given pairs.
class EstimationError : public Error {
 public:
  using Error::Error;
};

// Network request failed after all retries.
class TransportError : public Error {
 public:
  TransportError(const std::string &what, int attempts)
      : Error(what + " (after " + std::to_string(attempts) + " attempts)"),
        attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_;
};

// Response body could not be decoded. Keeps a snippet of the offending text.
class DecodeError : public Error {
 public:
  DecodeError(const std::string &what, const std::string &snippet)
      : Error(what + ": " + snippet), snippet_(snippet) {}
  const std::string &snippet() const { return snippet_; }

 private:
  std::string snippet_;
};

}  // namespace wsner

#endif  // WSNER_ERRORS_H_
