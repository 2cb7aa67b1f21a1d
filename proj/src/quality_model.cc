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


#include "annotkit/quality_model.h"

#include <algorithm>
#include <map>
#include <utility>

#include "annotkit/error.h"

namespace annotkit {

QualityModel::QualityModel(const SessionContext& context,
                           const GroundTruthImage& gt)
    : context_(context), gt_(gt), num_targets_(gt.targets().size()) {
  if (!(context.proposals().canvas() == gt.canvas())) {
    throw Error(ErrorCode::kCanvasMismatch,
                "proposals and ground truth are on different canvases");
  }
  Reset({});
}

void QualityModel::Reset(const ActiveSet& active) {
  const ProposalSet& proposals = context_.proposals();
  const auto& tmap = gt_.target_map().values;
  rows_.clear();
  for (const ActiveEntry& e : active) {
    rows_.push_back({e.segment_id, e.label, *proposals.PositionOf(e.segment_id), 0});
  }
  inter_.assign(rows_.size() * num_targets_, 0);
  owner_.assign(static_cast<size_t>(gt_.canvas().area()), -1);
  for (size_t d = 0; d < rows_.size(); ++d) {
    const int32_t depth = static_cast<int32_t>(d);
    ForEachForegroundRun(MaskAt(d), [&](int64_t start, int64_t len) {
      for (int64_t p = start; p < start + len; ++p) {
        if (owner_[p] != -1) continue;
        owner_[p] = depth;
        ++rows_[d].area;
        if (tmap[p] != LabelMap::kUnlabeled) {
          ++inter_[d * num_targets_ + static_cast<size_t>(tmap[p])];
        }
      }
    });
  }
  Tables t{rows_, inter_};
  score_ = ScorePanoptic(BuildTable(t));
}

Mask QualityModel::VisibleMask(size_t depth) const {
  Bitmap bits(gt_.canvas());
  const auto raw = bits.mutable_bits();
  const int32_t d = static_cast<int32_t>(depth);
  for (size_t p = 0; p < owner_.size(); ++p) raw[p] = owner_[p] == d;
  return Encode(bits);
}

const Mask& QualityModel::MaskAt(size_t depth) const {
  return context_.proposals().segments()[rows_[depth].position].mask;
}

const std::vector<uint8_t>& QualityModel::Coverage(size_t position) const {
  auto it = coverage_.find(position);
  if (it == coverage_.end()) {
    std::vector<uint8_t> bits(owner_.size(), 0);
    ForEachForegroundRun(context_.proposals().segments()[position].mask,
                         [&](int64_t start, int64_t len) {
                           std::fill_n(bits.begin() + start, len, uint8_t{1});
                         });
    it = coverage_.emplace(position, std::move(bits)).first;
  }
  return it->second;
}

QualityModel::Tables QualityModel::Copy() const { return Tables{rows_, inter_}; }

void QualityModel::MovePixel(Tables& t, int64_t pixel, int32_t from,
                             int32_t to) const {
  const int32_t target = gt_.target_map().values[static_cast<size_t>(pixel)];
  if (from >= 0) {
    --t.rows[static_cast<size_t>(from)].area;
    if (target != LabelMap::kUnlabeled) {
      --t.inter[static_cast<size_t>(from) * num_targets_ +
                static_cast<size_t>(target)];
    }
  }
  if (to >= 0) {
    ++t.rows[static_cast<size_t>(to)].area;
    if (target != LabelMap::kUnlabeled) {
      ++t.inter[static_cast<size_t>(to) * num_targets_ +
                static_cast<size_t>(target)];
    }
  }
}

// Mirrors BuildContingency: visible things ordered by segment id, then one
// unit per stuff label ordered by label.
Contingency QualityModel::BuildTable(const Tables& t) const {
  const LabelCatalog& catalog = context_.catalog();
  Contingency table;
  for (const GtTarget& target : gt_.targets()) {
    table.target_labels.push_back(target.label);
    table.target_areas.push_back(target.mask.area());
  }
  std::map<std::pair<int, int32_t>, std::vector<size_t>> units;
  for (size_t r = 0; r < t.rows.size(); ++r) {
    if (t.rows[r].area == 0) continue;
    const bool thing = catalog.is_thing(t.rows[r].label);
    units[thing ? std::pair{0, t.rows[r].id.value()}
                : std::pair{1, t.rows[r].label.value()}]
        .push_back(r);
  }
  table.units.reserve(units.size());
  table.intersections.assign(units.size() * num_targets_, 0);
  size_t u = 0;
  for (const auto& [key, members] : units) {
    Contingency::Unit unit{t.rows[members.front()].label, key.first == 0, 0};
    for (size_t r : members) {
      unit.area += t.rows[r].area;
      for (size_t k = 0; k < num_targets_; ++k) {
        table.intersections[u * num_targets_ + k] +=
            t.inter[r * num_targets_ + k];
      }
    }
    table.units.push_back(unit);
    ++u;
  }
  return table;
}

double QualityModel::Score(const Tables& t) const {
  return ScorePanoptic(BuildTable(t)).pq;
}

double QualityModel::TrialAdd(size_t position) const {
  const Segment& segment = context_.proposals().segments()[position];
  Tables t = Copy();
  const int32_t added = static_cast<int32_t>(t.rows.size());
  t.rows.push_back({segment.id, segment.label, position, 0});
  t.inter.resize(t.inter.size() + num_targets_, 0);
  ForEachForegroundRun(segment.mask, [&](int64_t start, int64_t len) {
    for (int64_t p = start; p < start + len; ++p) {
      MovePixel(t, p, owner_[static_cast<size_t>(p)], added);
    }
  });
  return Score(t);
}

double QualityModel::TrialRemove(size_t depth) const {
  Tables t = Copy();
  const int32_t d = static_cast<int32_t>(depth);
  std::vector<const std::vector<uint8_t>*> behind;
  for (size_t k = depth + 1; k < rows_.size(); ++k) {
    behind.push_back(&Coverage(rows_[k].position));
  }
  ForEachForegroundRun(MaskAt(depth), [&](int64_t start, int64_t len) {
    for (int64_t p = start; p < start + len; ++p) {
      if (owner_[static_cast<size_t>(p)] != d) continue;
      int32_t next = -1;
      for (size_t k = 0; k < behind.size(); ++k) {
        if ((*behind[k])[static_cast<size_t>(p)]) {
          next = static_cast<int32_t>(depth + 1 + k);
          break;
        }
      }
      MovePixel(t, p, d, next);
    }
  });
  return Score(t);
}

double QualityModel::TrialChangeLabel(size_t depth, LabelIndex label) const {
  Tables t = Copy();
  t.rows[depth].label = label;
  return Score(t);
}

double QualityModel::TrialChangeDepth(size_t depth, int32_t shift) const {
  const int64_t target = static_cast<int64_t>(depth) + shift;
  if (shift == 0 || target < 0 ||
      target >= static_cast<int64_t>(rows_.size())) {
    throw Error(ErrorCode::kInvalidArgument, "depth shift leaves the stack");
  }
  Tables t = Copy();
  const int32_t d = static_cast<int32_t>(depth);
  if (shift < 0) {
    // The segment takes every pixel owned by the segments it jumps over.
    ForEachForegroundRun(MaskAt(depth), [&](int64_t start, int64_t len) {
      for (int64_t p = start; p < start + len; ++p) {
        const int32_t o = owner_[static_cast<size_t>(p)];
        if (o >= target && o < d) MovePixel(t, p, o, d);
      }
    });
  } else {
    // Its own pixels go to the first jumped-over segment covering them.
    std::vector<const std::vector<uint8_t>*> jumped;
    for (int64_t k = d + 1; k <= target; ++k) {
      jumped.push_back(&Coverage(rows_[static_cast<size_t>(k)].position));
    }
    ForEachForegroundRun(MaskAt(depth), [&](int64_t start, int64_t len) {
      for (int64_t p = start; p < start + len; ++p) {
        if (owner_[static_cast<size_t>(p)] != d) continue;
        for (size_t k = 0; k < jumped.size(); ++k) {
          if ((*jumped[k])[static_cast<size_t>(p)]) {
            MovePixel(t, p, d, static_cast<int32_t>(depth + 1 + k));
            break;
          }
        }
      }
    });
  }
  return Score(t);
}

}  // namespace annotkit
