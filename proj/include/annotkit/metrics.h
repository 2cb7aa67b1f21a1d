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

#ifndef ANNOTKIT_METRICS_H_
#define ANNOTKIT_METRICS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "annotkit/label.h"
#include "annotkit/mask.h"
#include "annotkit/rendering.h"
#include "annotkit/trace.h"

namespace annotkit {

struct GtSegment {
  Mask mask;
  LabelIndex label;
};

// A unit of evaluation: one thing instance, or all pixels of one stuff class.
struct GtTarget {
  Mask mask;
  LabelIndex label;
  bool thing = true;
};

// Reference annotation of one image. Segments may not overlap.
class GroundTruthImage {
 public:
  // Stuff regions of the same class are merged. Throws kCanvasMismatch,
  // kUnknownLabel, kEmptyMask, or kInvalidArgument for overlapping segments.
  static GroundTruthImage Create(Canvas canvas, std::vector<GtSegment> segments,
                                 const LabelCatalog& catalog);

  const Canvas& canvas() const { return canvas_; }
  // The segments as given, in input order.
  const std::vector<GtSegment>& segments() const { return segments_; }
  // Thing instances in input order, then merged stuff classes by label index.
  const std::vector<GtTarget>& targets() const { return targets_; }
  // Target index per pixel.
  const LabelMap& target_map() const { return target_map_; }

 private:
  GroundTruthImage() = default;

  Canvas canvas_;
  std::vector<GtSegment> segments_;
  std::vector<GtTarget> targets_;
  LabelMap target_map_;
};

// Pixel intersections between prediction units and ground-truth targets.
// A prediction unit is one visible thing segment, or the union of all pixels
// carrying one stuff label.
struct Contingency {
  struct Unit {
    LabelIndex label;
    bool thing = true;
    int64_t area = 0;
  };

  std::vector<Unit> units;
  std::vector<LabelIndex> target_labels;
  std::vector<int64_t> target_areas;
  std::vector<int64_t> intersections;  // row-major units x targets

  int64_t intersection(size_t unit, size_t target) const {
    return intersections[unit * target_areas.size() + target];
  }
  double iou(size_t unit, size_t target) const;
};

Contingency BuildContingency(const Rendering& annotation,
                             const GroundTruthImage& gt,
                             const LabelCatalog& catalog);

struct PanopticScore {
  double pq = 0.0;
  double sq = 0.0;
  double rq = 0.0;
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t fn = 0;
  // Matched unit per target, -1 when unmatched.
  std::vector<int32_t> match;
};

// Same-label matches with IoU > 0.5. Ratios are 0 when undefined.
PanopticScore ScorePanoptic(const Contingency& table);

struct ClassQuality {
  LabelIndex label;
  int64_t targets = 0;
  int64_t recalled = 0;
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t fn = 0;
  double iou_sum = 0.0;
};

struct QualityReport {
  double recall = 0.0;
  int64_t recalled = 0;
  int64_t targets = 0;
  double panoptic_quality = 0.0;
  double segmentation_quality = 0.0;
  double recognition_quality = 0.0;
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t fn = 0;
  std::vector<ClassQuality> per_class;  // by label index
};

inline constexpr double kMatchIou = 0.5;

// Recall and panoptic quality of `annotation` against `gt`. Thing targets are
// matched one-to-one to same-label segments by descending IoU; a stuff target
// is recalled when the union of its label's pixels clears `threshold`.
QualityReport Evaluate(const Rendering& annotation, const GroundTruthImage& gt,
                       const LabelCatalog& catalog,
                       double threshold = kMatchIou);

QualityReport RecallAtIou(const Rendering& annotation,
                          const GroundTruthImage& gt,
                          const LabelCatalog& catalog,
                          double threshold = kMatchIou);
QualityReport PanopticQuality(const Rendering& annotation,
                              const GroundTruthImage& gt,
                              const LabelCatalog& catalog);

// Fraction of pixels with equal values; unlabeled counts as a label.
double PixelAgreement(const LabelMap& a, const LabelMap& b);

// Micro-actions to draw a polygon with `vertices` corners. Throws
// kInvalidPolygon below 3.
int64_t LabelmePolygonCost(int64_t vertices);

struct CurvePoint {
  int64_t budget = 0;
  double mean_recall = 0.0;
  double mean_pq = 0.0;
  size_t n_images = 0;
};

struct CostCurve {
  std::vector<CurvePoint> points;
};

// Mean quality over traces of the last step affordable within each budget.
// Throws kEmptyInput without traces and kInvalidArgument unless budgets are
// strictly increasing.
CostCurve AggregateCurve(std::span<const ActionTrace> traces,
                         std::span<const int64_t> budgets);

// Header "budget,mean_recall,mean_pq,n_images", six fractional digits.
std::string CostCurveCsv(const CostCurve& curve);

}  // namespace annotkit

#endif  // ANNOTKIT_METRICS_H_
