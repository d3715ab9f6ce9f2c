// Copyright 2026 The anonpoll Authors
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

#ifndef ANONPOLL_ERROR_H_
#define ANONPOLL_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace anonpoll {

enum class ErrorCode {
  kInvalidPreferences,
  kInvalidArgument,
  kTooFewParties,
  kOddN,
  kBadWeights,
  kInvalidList,
  kRankDeficient,
  kEmptyBlock,
  kLengthMismatch,
  kAlphaNotPositive,
  kZeroProbabilityParty,
  kEmptySensitiveSet,
  kZeroVariance,
  kTooLarge,
  kUsageError,
  kFileFormatError,
};

// Stable name used in machine-readable error reports, e.g. "RankDeficient".
std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Raised when a stacked design matrix does not have full column rank.
// Carries the numerical rank and a unit vector d with A d ~ 0, i.e. a
// direction of preference space the design cannot see.
class RankDeficientError : public Error {
 public:
  RankDeficientError(const std::string& message, int rank,
                     Eigen::VectorXd direction)
      : Error(ErrorCode::kRankDeficient, message),
        rank_(rank),
        direction_(std::move(direction)) {}

  int rank() const { return rank_; }
  const Eigen::VectorXd& direction() const { return direction_; }

 private:
  int rank_;
  Eigen::VectorXd direction_;
};

class FileFormatError : public Error {
 public:
  FileFormatError(const std::string& message, int line, int column)
      : Error(ErrorCode::kFileFormatError,
              message + " (line " + std::to_string(line) + ", column " +
                  std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace anonpoll

#endif  // ANONPOLL_ERROR_H_
