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

#include "annotkit/label.h"

#include "annotkit/error.h"

namespace annotkit {

std::string_view LabelKindName(LabelKind kind) {
  return kind == LabelKind::kThing ? "thing" : "stuff";
}

LabelKind ParseLabelKind(std::string_view name) {
  if (name == "thing") return LabelKind::kThing;
  if (name == "stuff") return LabelKind::kStuff;
  throw Error(ErrorCode::kSchema,
              "label kind must be thing or stuff, got '" + std::string(name) +
                  "'");
}

LabelCatalog::LabelCatalog(std::vector<Label> labels)
    : labels_(std::move(labels)) {
  for (size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i].id.empty()) {
      throw Error(ErrorCode::kSchema, "empty label id in catalog");
    }
    if (!by_id_.emplace(labels_[i].id, static_cast<int32_t>(i)).second) {
      throw Error(ErrorCode::kSchema,
                  "duplicate label '" + labels_[i].id + "' in catalog");
    }
  }
}

const Label& LabelCatalog::at(LabelIndex index) const {
  if (!contains(index)) {
    throw Error(ErrorCode::kUnknownLabel,
                "label index " + std::to_string(index.value()) +
                    " not in catalog");
  }
  return labels_[static_cast<size_t>(index.value())];
}

std::optional<LabelIndex> LabelCatalog::Find(std::string_view id) const {
  const auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) return std::nullopt;
  return LabelIndex(it->second);
}

LabelIndex LabelCatalog::Require(std::string_view id) const {
  if (auto found = Find(id)) return *found;
  throw Error(ErrorCode::kUnknownLabel,
              "label '" + std::string(id) + "' not in catalog");
}

}  // namespace annotkit
