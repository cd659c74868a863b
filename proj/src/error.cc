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

#include "nfl/error.h"

namespace nfl {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kNonFinite: return "non-finite input";
    case ErrorCode::kShapeMismatch: return "shape mismatch";
    case ErrorCode::kBadMagic: return "bad magic";
    case ErrorCode::kBadVersion: return "bad version";
    case ErrorCode::kOddWeight: return "odd weight";
    case ErrorCode::kUnexpectedEnd: return "unexpected end";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kNonMonotonicTimestamp: return "non-monotonic timestamp";
    case ErrorCode::kOutOfBounds: return "out of bounds";
    case ErrorCode::kInsufficientSamples: return "insufficient samples";
    case ErrorCode::kUnboundReference: return "unbound reference";
    case ErrorCode::kBadChecksum: return "bad checksum";
    case ErrorCode::kBadMessageType: return "bad message type";
    case ErrorCode::kBadPayload: return "bad payload";
    case ErrorCode::kMissingClient: return "missing client";
    case ErrorCode::kDuplicateClient: return "duplicate client";
    case ErrorCode::kRoundMismatch: return "round mismatch";
    case ErrorCode::kTransport: return "transport failure";
    case ErrorCode::kTimeout: return "timeout";
    case ErrorCode::kAborted: return "aborted";
    case ErrorCode::kEmptyTestSet: return "empty test set";
    case ErrorCode::kConfig: return "config error";
  }
  return "unknown";
}

}  // namespace nfl
