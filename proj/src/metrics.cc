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

#include "annotkit/metrics.h"

#include <algorithm>
#include <cstdio>
#include <map>
#include <tuple>
#include <utility>

#include "annotkit/error.h"

namespace annotkit {
namespace {

double RatioOrZero(double num, double den) { return den > 0 ? num / den : 0.0; }

}  // namespace

GroundTruthImage GroundTruthImage::Create(Canvas canvas,
                                          std::vector<GtSegment> segments,
                                          const LabelCatalog& catalog) {
  canvas.Validate();
  GroundTruthImage gt;
  gt.canvas_ = canvas;
  gt.target_map_ = LabelMap(canvas);

  std::map<LabelIndex, Mask> stuff;
  for (size_t i = 0; i < segments.size(); ++i) {
    const GtSegment& s = segments[i];
    if (!(s.mask.canvas() == canvas)) {
      throw Error(ErrorCode::kCanvasMismatch,
                  "ground-truth segment " + std::to_string(i) +
                      " is on a different canvas");
    }
    if (s.mask.empty()) {
      throw Error(ErrorCode::kEmptyMask,
                  "ground-truth segment " + std::to_string(i) + " is empty");
    }
    if (catalog.is_thing(s.label)) {
      gt.targets_.push_back({s.mask, s.label, true});
    } else {
      auto [it, inserted] = stuff.emplace(s.label, s.mask);
      if (!inserted) {
        if (IntersectionArea(it->second, s.mask) > 0) {
          throw Error(ErrorCode::kInvalidArgument,
                      "ground-truth segment " + std::to_string(i) +
                          " overlaps another segment");
        }
        it->second = Union(it->second, s.mask);
      }
    }
  }
  for (auto& [label, mask] : stuff) {
    gt.targets_.push_back({std::move(mask), label, false});
  }

  for (size_t t = 0; t < gt.targets_.size(); ++t) {
    bool overlap = false;
    ForEachForegroundRun(gt.targets_[t].mask, [&](int64_t start, int64_t len) {
      for (int64_t k = start; k < start + len; ++k) {
        int32_t& slot = gt.target_map_.values[static_cast<size_t>(k)];
        overlap |= slot != LabelMap::kUnlabeled;
        slot = static_cast<int32_t>(t);
      }
    });
    if (overlap) {
      throw Error(ErrorCode::kInvalidArgument,
                  "ground-truth segments overlap (target " + std::to_string(t) +
                      ")");
    }
  }
  gt.segments_ = std::move(segments);
  return gt;
}

double Contingency::iou(size_t unit, size_t target) const {
  const int64_t inter = intersection(unit, target);
  const int64_t uni = units[unit].area + target_areas[target] - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

Contingency BuildContingency(const Rendering& annotation,
                             const GroundTruthImage& gt,
                             const LabelCatalog& catalog) {
  const Canvas& canvas = gt.canvas();
  if (!(annotation.segments.canvas == canvas) ||
      !(annotation.labels.canvas == canvas)) {
    throw Error(ErrorCode::kCanvasMismatch,
                "annotation and ground truth are on different canvases");
  }
  const auto& seg = annotation.segments.values;
  const auto& lab = annotation.labels.values;
  const auto& tmap = gt.target_map().values;

  // Things keyed by segment id come first, then stuff keyed by label.
  using Key = std::pair<int, int32_t>;
  std::map<Key, size_t> keys;
  auto key_of = [&](size_t p) -> Key {
    const LabelIndex label(lab[p]);
    return catalog.is_thing(label) ? Key{0, seg[p]} : Key{1, lab[p]};
  };

  Contingency table;
  for (const GtTarget& t : gt.targets()) {
    table.target_labels.push_back(t.label);
    table.target_areas.push_back(t.mask.area());
  }
  const size_t num_targets = table.target_areas.size();

  for (size_t p = 0; p < seg.size(); ++p) {
    if (seg[p] == LabelMap::kUnlabeled) continue;
    keys.emplace(key_of(p), 0);
  }
  table.units.reserve(keys.size());
  for (auto& [key, index] : keys) {
    index = table.units.size();
    table.units.push_back({LabelIndex(key.second), key.first == 0, 0});
  }
  table.intersections.assign(table.units.size() * num_targets, 0);

  Key last_key{-1, 0};
  size_t last_unit = 0;
  for (size_t p = 0; p < seg.size(); ++p) {
    if (seg[p] == LabelMap::kUnlabeled) continue;
    const Key key = key_of(p);
    if (key != last_key) {
      last_key = key;
      last_unit = keys.at(key);
      table.units[last_unit].label = LabelIndex(lab[p]);
    }
    ++table.units[last_unit].area;
    if (tmap[p] != LabelMap::kUnlabeled) {
      ++table.intersections[last_unit * num_targets +
                            static_cast<size_t>(tmap[p])];
    }
  }
  return table;
}

PanopticScore ScorePanoptic(const Contingency& table) {
  const size_t num_targets = table.target_areas.size();
  PanopticScore score;
  score.match.assign(num_targets, -1);
  double iou_sum = 0.0;
  for (size_t t = 0; t < num_targets; ++t) {
    for (size_t u = 0; u < table.units.size(); ++u) {
      if (table.units[u].label != table.target_labels[t]) continue;
      if (table.intersection(u, t) == 0) continue;
      const double iou = table.iou(u, t);
      if (iou > kMatchIou) {
        score.match[t] = static_cast<int32_t>(u);
        iou_sum += iou;
        ++score.tp;
        break;
      }
    }
  }
  score.fn = static_cast<int64_t>(num_targets) - score.tp;
  score.fp = static_cast<int64_t>(table.units.size()) - score.tp;
  const double denom = static_cast<double>(score.tp) +
                       0.5 * static_cast<double>(score.fp) +
                       0.5 * static_cast<double>(score.fn);
  score.pq = RatioOrZero(iou_sum, denom);
  score.sq = RatioOrZero(iou_sum, static_cast<double>(score.tp));
  score.rq = RatioOrZero(static_cast<double>(score.tp), denom);
  return score;
}

QualityReport Evaluate(const Rendering& annotation, const GroundTruthImage& gt,
                       const LabelCatalog& catalog, double threshold) {
  const Contingency table = BuildContingency(annotation, gt, catalog);
  const size_t num_targets = table.target_areas.size();
  const auto& targets = gt.targets();

  // Recall: greedy one-to-one for things, merged-region test for stuff.
  std::vector<uint8_t> recalled(num_targets, 0);
  std::vector<std::tuple<double, size_t, size_t>> pairs;
  for (size_t t = 0; t < num_targets; ++t) {
    for (size_t u = 0; u < table.units.size(); ++u) {
      if (table.units[u].label != table.target_labels[t]) continue;
      if (table.intersection(u, t) == 0) continue;
      const double iou = table.iou(u, t);
      if (!(iou > threshold)) continue;
      if (targets[t].thing) {
        pairs.emplace_back(iou, t, u);
      } else {
        recalled[t] = 1;
      }
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    return std::make_pair(std::get<1>(a), std::get<2>(a)) <
           std::make_pair(std::get<1>(b), std::get<2>(b));
  });
  std::vector<uint8_t> unit_used(table.units.size(), 0);
  for (const auto& [iou, t, u] : pairs) {
    if (recalled[t] || unit_used[u]) continue;
    recalled[t] = 1;
    unit_used[u] = 1;
  }

  const PanopticScore pq = ScorePanoptic(table);

  QualityReport report;
  report.targets = static_cast<int64_t>(num_targets);
  for (uint8_t r : recalled) report.recalled += r;
  report.recall = RatioOrZero(static_cast<double>(report.recalled),
                              static_cast<double>(report.targets));
  report.panoptic_quality = pq.pq;
  report.segmentation_quality = pq.sq;
  report.recognition_quality = pq.rq;
  report.tp = pq.tp;
  report.fp = pq.fp;
  report.fn = pq.fn;

  std::map<LabelIndex, ClassQuality> classes;
  auto cls = [&](LabelIndex label) -> ClassQuality& {
    auto [it, inserted] = classes.emplace(label, ClassQuality{});
    it->second.label = label;
    return it->second;
  };
  std::vector<uint8_t> unit_matched(table.units.size(), 0);
  for (size_t t = 0; t < num_targets; ++t) {
    ClassQuality& c = cls(table.target_labels[t]);
    ++c.targets;
    c.recalled += recalled[t];
    if (pq.match[t] >= 0) {
      ++c.tp;
      c.iou_sum += table.iou(static_cast<size_t>(pq.match[t]), t);
      unit_matched[static_cast<size_t>(pq.match[t])] = 1;
    } else {
      ++c.fn;
    }
  }
  for (size_t u = 0; u < table.units.size(); ++u) {
    if (!unit_matched[u]) ++cls(table.units[u].label).fp;
  }
  for (auto& [label, c] : classes) report.per_class.push_back(c);
  return report;
}

QualityReport RecallAtIou(const Rendering& annotation,
                          const GroundTruthImage& gt,
                          const LabelCatalog& catalog, double threshold) {
  return Evaluate(annotation, gt, catalog, threshold);
}

QualityReport PanopticQuality(const Rendering& annotation,
                              const GroundTruthImage& gt,
                              const LabelCatalog& catalog) {
  return Evaluate(annotation, gt, catalog, kMatchIou);
}

double PixelAgreement(const LabelMap& a, const LabelMap& b) {
  if (!(a.canvas == b.canvas) || a.values.size() != b.values.size()) {
    throw Error(ErrorCode::kCanvasMismatch,
                "label maps are on different canvases");
  }
  if (a.values.empty()) return 0.0;
  int64_t equal = 0;
  for (size_t i = 0; i < a.values.size(); ++i) {
    equal += a.values[i] == b.values[i];
  }
  return static_cast<double>(equal) / static_cast<double>(a.values.size());
}

int64_t LabelmePolygonCost(int64_t vertices) {
  if (vertices < 3) {
    throw Error(ErrorCode::kInvalidPolygon,
                "a polygon needs at least 3 vertices, got " +
                    std::to_string(vertices));
  }
  return vertices + 2;
}

CostCurve AggregateCurve(std::span<const ActionTrace> traces,
                         std::span<const int64_t> budgets) {
  if (traces.empty()) throw Error(ErrorCode::kEmptyInput, "no traces");
  for (size_t i = 1; i < budgets.size(); ++i) {
    if (budgets[i] <= budgets[i - 1]) {
      throw Error(ErrorCode::kInvalidArgument,
                  "budgets must be strictly increasing");
    }
  }
  CostCurve curve;
  for (int64_t budget : budgets) {
    double recall = 0.0;
    double pq = 0.0;
    for (const ActionTrace& trace : traces) {
      double r = trace.initial_recall;
      double q = trace.initial_pq;
      for (const TraceStep& step : trace.steps) {
        if (step.cumulative_cost > budget) break;
        r = step.recall;
        q = step.pq;
      }
      recall += r;
      pq += q;
    }
    const auto n = static_cast<double>(traces.size());
    curve.points.push_back({budget, recall / n, pq / n, traces.size()});
  }
  return curve;
}

std::string CostCurveCsv(const CostCurve& curve) {
  std::string out = "budget,mean_recall,mean_pq,n_images\n";
  char line[128];
  for (const CurvePoint& p : curve.points) {
    std::snprintf(line, sizeof(line), "%lld,%.6f,%.6f,%zu\n",
                  static_cast<long long>(p.budget), p.mean_recall, p.mean_pq,
                  p.n_images);
    out += line;
  }
  return out;
}

std::string_view TerminalReasonName(TerminalReason reason) {
  return reason == TerminalReason::kNoImprovement ? "no-improvement"
                                                  : "budget-exhausted";
}

}  // namespace annotkit
