// Copyright 2026 The Neuromorphic Federated Learning Authors
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

#ifndef NFL_ERROR_H_
#define NFL_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace nfl {

// Every failure the library reports carries one of these codes so callers
// (and tests) can distinguish rejection reasons without parsing messages.
enum class ErrorCode {
  kInvalidArgument,
  kNonFinite,
  kShapeMismatch,
  kBadMagic,
  kBadVersion,
  kOddWeight,
  kUnexpectedEnd,
  kIo,
  kNonMonotonicTimestamp,
  kOutOfBounds,
  kInsufficientSamples,
  kUnboundReference,
  kBadChecksum,
  kBadMessageType,
  kBadPayload,
  kMissingClient,
  kDuplicateClient,
  kRoundMismatch,
  kTransport,
  kTimeout,
  kAborted,
  kEmptyTestSet,
  kConfig,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nfl

#endif  // NFL_ERROR_H_
