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

#ifndef ANNOTKIT_LABEL_H_
#define ANNOTKIT_LABEL_H_

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "annotkit/strong_id.h"

namespace annotkit {

enum class LabelKind { kThing, kStuff };

std::string_view LabelKindName(LabelKind kind);
LabelKind ParseLabelKind(std::string_view name);

struct Label {
  std::string id;
  LabelKind kind = LabelKind::kThing;

  bool operator==(const Label&) const = default;
};

// The fixed, predefined set of classes of one dataset. Labels are referred to
// by their position in the catalog.
class LabelCatalog {
 public:
  LabelCatalog() = default;
  // Throws kSchema on duplicate or empty ids.
  explicit LabelCatalog(std::vector<Label> labels);

  size_t size() const { return labels_.size(); }
  const std::vector<Label>& labels() const { return labels_; }

  bool contains(LabelIndex index) const {
    return index.value() >= 0 &&
           static_cast<size_t>(index.value()) < labels_.size();
  }
  // Throws kUnknownLabel for indices outside the catalog.
  const Label& at(LabelIndex index) const;
  bool is_thing(LabelIndex index) const {
    return at(index).kind == LabelKind::kThing;
  }

  std::optional<LabelIndex> Find(std::string_view id) const;
  // Throws kUnknownLabel when `id` is not in the catalog.
  LabelIndex Require(std::string_view id) const;

  bool operator==(const LabelCatalog& other) const {
    return labels_ == other.labels_;
  }

 private:
  std::vector<Label> labels_;
  std::unordered_map<std::string, int32_t> by_id_;
};

}  // namespace annotkit

#endif  // ANNOTKIT_LABEL_H_
