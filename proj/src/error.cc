// Copyright 2026 The annotkit Authors.
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

#include "annotkit/error.h"

namespace annotkit {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidCanvas: return "invalid-canvas";
    case ErrorCode::kCorruptMask: return "corrupt-mask";
    case ErrorCode::kCanvasMismatch: return "canvas-mismatch";
    case ErrorCode::kOutOfBounds: return "out-of-bounds";
    case ErrorCode::kEmptyMask: return "empty-mask";
    case ErrorCode::kNumericalDegenerate: return "numerical-degenerate";
    case ErrorCode::kNoCandidates: return "no-op-click";
    case ErrorCode::kUnknownSegment: return "unknown-segment";
    case ErrorCode::kUnknownLabel: return "unknown-label";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kInvalidPolygon: return "invalid-polygon";
    case ErrorCode::kEmptyInput: return "empty-input";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kSchema: return "schema";
    case ErrorCode::kVersion: return "version";
    case ErrorCode::kNotFound: return "not-found";
    case ErrorCode::kConflict: return "conflict";
  }
  return "unknown";
}

}  // namespace annotkit
