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

#ifndef ANNOTKIT_STRONG_ID_H_
#define ANNOTKIT_STRONG_ID_H_

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>

namespace annotkit {

// Integer identifier that does not convert implicitly to or from other ids.
template <typename Tag>
class StrongId {
 public:
  constexpr StrongId() = default;
  constexpr explicit StrongId(int32_t value) : value_(value) {}

  constexpr int32_t value() const { return value_; }

  constexpr auto operator<=>(const StrongId&) const = default;

  friend std::ostream& operator<<(std::ostream& os, StrongId id) {
    return os << id.value_;
  }

 private:
  int32_t value_ = 0;
};

using SegmentId = StrongId<struct SegmentIdTag>;
using LabelIndex = StrongId<struct LabelIndexTag>;

}  // namespace annotkit

template <typename Tag>
struct std::hash<annotkit::StrongId<Tag>> {
  size_t operator()(annotkit::StrongId<Tag> id) const noexcept {
    return std::hash<int32_t>()(id.value());
  }
};

#endif  // ANNOTKIT_STRONG_ID_H_
