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

#include "anonpoll/error.hpp"

namespace anonpoll {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidPreferences:
      return "InvalidPreferences";
    case ErrorCode::kInvalidArgument:
      return "InvalidArgument";
    case ErrorCode::kTooFewParties:
      return "TooFewParties";
    case ErrorCode::kOddN:
      return "OddN";
    case ErrorCode::kBadWeights:
      return "BadWeights";
    case ErrorCode::kInvalidList:
      return "InvalidList";
    case ErrorCode::kRankDeficient:
      return "RankDeficient";
    case ErrorCode::kEmptyBlock:
      return "EmptyBlock";
    case ErrorCode::kLengthMismatch:
      return "LengthMismatch";
    case ErrorCode::kAlphaNotPositive:
      return "AlphaNotPositive";
    case ErrorCode::kZeroProbabilityParty:
      return "ZeroProbabilityParty";
    case ErrorCode::kEmptySensitiveSet:
      return "EmptySensitiveSet";
    case ErrorCode::kZeroVariance:
      return "ZeroVariance";
    case ErrorCode::kTooLarge:
      return "TooLarge";
    case ErrorCode::kUsageError:
      return "UsageError";
    case ErrorCode::kFileFormatError:
      return "FileFormatError";
  }
  return "Unknown";
}

}  // namespace anonpoll
