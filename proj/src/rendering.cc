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

#include "annotkit/rendering.h"

#include <cstdio>

namespace annotkit {
namespace {

constexpr uint64_t kFnvOffset = 14695981039346656037ull;
constexpr uint64_t kFnvPrime = 1099511628211ull;

void HashWord(uint64_t& h, uint32_t word) {
  for (int shift = 0; shift < 32; shift += 8) {
    h ^= (word >> shift) & 0xffu;
    h *= kFnvPrime;
  }
}

}  // namespace

uint64_t RenderHash(const Rendering& rendering) {
  uint64_t h = kFnvOffset;
  HashWord(h, static_cast<uint32_t>(rendering.segments.canvas.width));
  HashWord(h, static_cast<uint32_t>(rendering.segments.canvas.height));
  for (int32_t v : rendering.segments.values) {
    HashWord(h, static_cast<uint32_t>(v));
  }
  for (int32_t v : rendering.labels.values) {
    HashWord(h, static_cast<uint32_t>(v));
  }
  return h;
}

std::string HashToHex(uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace annotkit
