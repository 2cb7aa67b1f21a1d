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

#ifndef ANNOTKIT_RENDERING_H_
#define ANNOTKIT_RENDERING_H_

#include <cstdint>
#include <string>

#include "annotkit/mask.h"

namespace annotkit {

// A flattened annotation: every pixel carries the id of the segment that owns
// it and that segment's catalog label index, or LabelMap::kUnlabeled in both.
struct Rendering {
  LabelMap segments;
  LabelMap labels;

  bool operator==(const Rendering&) const = default;
};

// 64-bit FNV-1a over the canvas and both maps. Stable across runs and hosts.
uint64_t RenderHash(const Rendering& rendering);
std::string HashToHex(uint64_t hash);

}  // namespace annotkit

#endif  // ANNOTKIT_RENDERING_H_
