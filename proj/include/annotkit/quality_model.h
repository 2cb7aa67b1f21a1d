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


#ifndef ANNOTKIT_QUALITY_MODEL_H_
#define ANNOTKIT_QUALITY_MODEL_H_

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "annotkit/engine.h"
#include "annotkit/metrics.h"

namespace annotkit {

// Panoptic quality of an active set, with cheap "what if" queries for single
// edits. Trial results are bit-identical to rendering the edited state and
// scoring it with Evaluate().
//
// The model tracks which active segment owns each pixel plus per-segment
// visible areas and target intersections. A trial only touches the pixels of
// the edited segment.
class QualityModel {
 public:
  // Both references must outlive the model.
  QualityModel(const SessionContext& context, const GroundTruthImage& gt);

  // Rebuilds all state for `active`.
  void Reset(const ActiveSet& active);

  const PanopticScore& score() const { return score_; }
  double pq() const { return score_.pq; }
  size_t depth_count() const { return rows_.size(); }

  int64_t VisibleArea(size_t depth) const { return rows_[depth].area; }
  int64_t VisibleIntersection(size_t depth, size_t target) const {
    return inter_[depth * num_targets_ + target];
  }
  // Pixels where the segment at `depth` is the front-most one.
  Mask VisibleMask(size_t depth) const;
  // Whether a target is matched in the current state.
  bool IsMatched(size_t target) const { return score_.match[target] >= 0; }

  // PQ after inserting proposal `position` in front of everything.
  double TrialAdd(size_t position) const;
  double TrialRemove(size_t depth) const;
  double TrialChangeLabel(size_t depth, LabelIndex label) const;
  // `shift` must keep the segment inside the stack.
  double TrialChangeDepth(size_t depth, int32_t shift) const;

 private:
  struct Row {
    SegmentId id;
    LabelIndex label;
    size_t position;  // in the proposal set
    int64_t area = 0;
  };

  // Scratch copy of the per-row tables, one extra row for trial adds.
  struct Tables {
    std::vector<Row> rows;
    std::vector<int64_t> inter;
  };

  const Mask& MaskAt(size_t depth) const;
  const std::vector<uint8_t>& Coverage(size_t position) const;
  Tables Copy() const;
  void MovePixel(Tables& t, int64_t pixel, int32_t from, int32_t to) const;
  double Score(const Tables& t) const;
  Contingency BuildTable(const Tables& t) const;

  const SessionContext& context_;
  const GroundTruthImage& gt_;
  size_t num_targets_;
  std::vector<Row> rows_;
  std::vector<int64_t> inter_;  // rows x targets
  std::vector<int32_t> owner_;  // depth per pixel, -1 when uncovered
  PanopticScore score_;
  mutable std::unordered_map<size_t, std::vector<uint8_t>> coverage_;
};

}  // namespace annotkit

#endif  // ANNOTKIT_QUALITY_MODEL_H_
