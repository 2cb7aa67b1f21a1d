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

#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <random>

#include "annotkit/error.h"
#include "test_util.h"

namespace annotkit {
namespace {

using ::annotkit::testing::BoxMask;
using ::annotkit::testing::kCat;
using ::annotkit::testing::kDog;
using ::annotkit::testing::kGrass;
using ::annotkit::testing::kSky;
using ::annotkit::testing::TestCatalog;

struct Layer {
  Mask mask;
  int32_t id;
  LabelIndex label;
};

Rendering RenderLayers(Canvas canvas, const std::vector<Layer>& layers) {
  std::vector<RasterLayer> ids, labels;
  for (const Layer& l : layers) {
    ids.push_back({l.mask, l.id});
    labels.push_back({l.mask, l.label.value()});
  }
  return Rendering{Rasterize(ids, canvas), Rasterize(labels, canvas)};
}

Rendering RenderGt(const GroundTruthImage& gt) {
  std::vector<Layer> layers;
  int32_t id = 0;
  for (const GtSegment& s : gt.segments()) layers.push_back({s.mask, id++, s.label});
  return RenderLayers(gt.canvas(), layers);
}

class MetricsTest : public ::testing::Test {
 protected:
  std::shared_ptr<const LabelCatalog> catalog_ = TestCatalog();
};

TEST_F(MetricsTest, GroundTruthMergesStuffAndValidates) {
  const Canvas c{10, 4};
  const auto gt = GroundTruthImage::Create(
      c,
      {{BoxMask(c, 0, 0, 3, 4), kGrass},
       {BoxMask(c, 3, 0, 5, 2), kCat},
       {BoxMask(c, 7, 0, 10, 4), kGrass},
       {BoxMask(c, 5, 0, 7, 4), kSky}},
      *catalog_);
  ASSERT_EQ(gt.targets().size(), 3u);
  EXPECT_TRUE(gt.targets()[0].thing);
  EXPECT_EQ(gt.targets()[1].label, kGrass);
  EXPECT_EQ(gt.targets()[1].mask.area(), 24);
  EXPECT_EQ(gt.targets()[2].label, kSky);
  EXPECT_EQ(gt.target_map().at(8, 2), 1);
  EXPECT_EQ(gt.target_map().at(4, 3), LabelMap::kUnlabeled);

  EXPECT_THROW(GroundTruthImage::Create(c,
                                        {{BoxMask(c, 0, 0, 3, 4), kCat},
                                         {BoxMask(c, 2, 0, 5, 4), kDog}},
                                        *catalog_),
               Error);
  EXPECT_THROW(GroundTruthImage::Create(c, {{BoxMask(c, 0, 0, 3, 4), LabelIndex(77)}},
                                        *catalog_),
               Error);
}

TEST_F(MetricsTest, PerfectAnnotationScoresOne) {
  const Canvas c{12, 8};
  // The cats sit inside the grass, so the grass segment has two holes.
  const Mask grass = Difference(Difference(BoxMask(c, 0, 4, 12, 8), BoxMask(c, 2, 5, 5, 7)),
                                BoxMask(c, 6, 5, 9, 7));
  const auto disjoint = GroundTruthImage::Create(
      c,
      {{BoxMask(c, 0, 0, 12, 4), kSky},
       {grass, kGrass},
       {BoxMask(c, 2, 5, 5, 7), kCat},
       {BoxMask(c, 6, 5, 9, 7), kCat}},
      *catalog_);
  const QualityReport report = Evaluate(RenderGt(disjoint), disjoint, *catalog_);
  EXPECT_EQ(report.recall, 1.0);
  EXPECT_EQ(report.panoptic_quality, 1.0);
  EXPECT_EQ(report.segmentation_quality, 1.0);
  EXPECT_EQ(report.recognition_quality, 1.0);
  EXPECT_EQ(report.targets, 4);
  EXPECT_EQ(report.tp, 4);
}

TEST_F(MetricsTest, OverlappingGroundTruthIsRejected) {
  const Canvas c{12, 8};
  EXPECT_THROW(GroundTruthImage::Create(c,
                                        {{BoxMask(c, 0, 4, 12, 8), kGrass},
                                         {BoxMask(c, 2, 5, 5, 7), kCat}},
                                        *catalog_),
               Error);
}

TEST_F(MetricsTest, EmptyAnnotationScoresZero) {
  const Canvas c{6, 6};
  const auto gt = GroundTruthImage::Create(c, {{BoxMask(c, 0, 0, 3, 3), kCat}}, *catalog_);
  const QualityReport report = Evaluate(RenderLayers(c, {}), gt, *catalog_);
  EXPECT_EQ(report.recall, 0.0);
  EXPECT_EQ(report.panoptic_quality, 0.0);
  EXPECT_EQ(report.fn, 1);
  EXPECT_EQ(report.fp, 0);
}

TEST_F(MetricsTest, OneSegmentOverTwoCatsRecallsOne) {
  const Canvas c{40, 1};
  const Mask cat_a = BoxMask(c, 0, 0, 11, 1);
  const Mask cat_b = BoxMask(c, 11, 0, 31, 1);
  const Mask blob = BoxMask(c, 0, 0, 20, 1);
  ASSERT_NEAR(Iou(blob, cat_a), 0.55, 1e-12);
  ASSERT_NEAR(Iou(blob, cat_b), 9.0 / 31.0, 1e-12);
  const auto gt = GroundTruthImage::Create(c, {{cat_a, kCat}, {cat_b, kCat}}, *catalog_);
  const QualityReport report =
      RecallAtIou(RenderLayers(c, {{blob, 1, kCat}}), gt, *catalog_);
  EXPECT_EQ(report.recalled, 1);
  EXPECT_EQ(report.recall, 0.5);
}

TEST_F(MetricsTest, PanopticHandCases) {
  const Canvas c{20, 1};
  const auto gt = GroundTruthImage::Create(c, {{BoxMask(c, 0, 0, 8, 1), kCat}}, *catalog_);
  const Mask pred = BoxMask(c, 0, 0, 10, 1);
  ASSERT_NEAR(Iou(pred, gt.targets()[0].mask), 0.8, 1e-12);

  const QualityReport right =
      PanopticQuality(RenderLayers(c, {{pred, 3, kCat}}), gt, *catalog_);
  EXPECT_NEAR(right.panoptic_quality, 0.8, 1e-9);
  EXPECT_NEAR(right.segmentation_quality, 0.8, 1e-9);
  EXPECT_NEAR(right.recognition_quality, 1.0, 1e-9);

  const QualityReport wrong =
      PanopticQuality(RenderLayers(c, {{pred, 3, kDog}}), gt, *catalog_);
  EXPECT_NEAR(wrong.panoptic_quality, 0.0, 1e-9);
  EXPECT_EQ(wrong.fp, 1);
  EXPECT_EQ(wrong.fn, 1);
}

TEST_F(MetricsTest, StuffIsMergedOnBothSides) {
  const Canvas c{10, 2};
  const auto gt = GroundTruthImage::Create(
      c, {{BoxMask(c, 0, 0, 4, 2), kGrass}, {BoxMask(c, 6, 0, 10, 2), kGrass}}, *catalog_);
  ASSERT_EQ(gt.targets().size(), 1u);
  // Two grass segments, neither alone above 0.5, together exact.
  const Rendering split = RenderLayers(
      c, {{BoxMask(c, 0, 0, 4, 2), 1, kGrass}, {BoxMask(c, 6, 0, 10, 2), 2, kGrass}});
  const QualityReport report = Evaluate(split, gt, *catalog_);
  EXPECT_EQ(report.recall, 1.0);
  EXPECT_EQ(report.panoptic_quality, 1.0);
}

TEST_F(MetricsTest, CanvasMismatch) {
  const auto gt = GroundTruthImage::Create({4, 4}, {}, *catalog_);
  try {
    Evaluate(RenderLayers({5, 4}, {}), gt, *catalog_);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCanvasMismatch);
  }
  EXPECT_THROW(PixelAgreement(LabelMap({2, 2}), LabelMap({2, 3})), Error);
}

// Random instances: up to 4 disjoint GT things and up to 4 predictions.
struct RandomInstance {
  GroundTruthImage gt;
  Rendering annotation;
};

RandomInstance MakeRandomInstance(std::mt19937_64& rng, const LabelCatalog& catalog) {
  const Canvas c{16, 16};
  auto random_box = [&] {
    int x0 = static_cast<int>(rng() % 16), x1 = static_cast<int>(rng() % 16);
    int y0 = static_cast<int>(rng() % 16), y1 = static_cast<int>(rng() % 16);
    if (x0 > x1) std::swap(x0, x1);
    if (y0 > y1) std::swap(y0, y1);
    return BoxMask(c, x0, y0, x1 + 1, y1 + 1);
  };
  const LabelIndex labels[] = {kCat, kDog};
  std::vector<GtSegment> segments;
  Mask taken = Mask::Empty(c);
  const int n_gt = 1 + static_cast<int>(rng() % 4);
  for (int i = 0; i < n_gt; ++i) {
    Mask m = Difference(random_box(), taken);
    if (m.empty()) continue;
    taken = Union(taken, m);
    segments.push_back({m, labels[rng() % 2]});
  }
  std::vector<Layer> layers;
  const int n_pred = 1 + static_cast<int>(rng() % 4);
  for (int i = 0; i < n_pred; ++i) {
    // Half of the predictions are jittered copies of ground truth.
    Mask m = random_box();
    if (!segments.empty() && rng() % 2) {
      m = Union(segments[rng() % segments.size()].mask,
                BoxMask(c, 0, 0, 1 + static_cast<int>(rng() % 3), 1));
    }
    layers.push_back({m, i, labels[rng() % 2]});
  }
  return {GroundTruthImage::Create(c, std::move(segments), catalog),
          RenderLayers(c, layers)};
}

// Maximum cardinality same-label matching with IoU > 0.5, by enumeration.
int64_t ExhaustiveMatching(const RandomInstance& inst, const LabelCatalog& catalog) {
  const auto& targets = inst.gt.targets();
  // Visible prediction masks recovered pixel by pixel.
  std::map<int32_t, std::pair<Bitmap, LabelIndex>> preds;
  const Canvas c = inst.gt.canvas();
  for (int y = 0; y < c.height; ++y) {
    for (int x = 0; x < c.width; ++x) {
      const int32_t id = inst.annotation.segments.at(x, y);
      if (id == LabelMap::kUnlabeled) continue;
      auto [it, _] = preds.try_emplace(id, Bitmap(c), LabelIndex(inst.annotation.labels.at(x, y)));
      it->second.first.set(x, y);
    }
  }
  std::vector<std::pair<Mask, LabelIndex>> pred_list;
  for (auto& [id, p] : preds) pred_list.emplace_back(Encode(p.first), p.second);
  (void)catalog;

  int64_t best = 0;
  std::vector<uint8_t> used(pred_list.size(), 0);
  std::function<void(size_t, int64_t)> search = [&](size_t t, int64_t count) {
    if (t == targets.size()) {
      best = std::max(best, count);
      return;
    }
    search(t + 1, count);
    for (size_t u = 0; u < pred_list.size(); ++u) {
      if (used[u] || pred_list[u].second != targets[t].label) continue;
      if (!(Iou(pred_list[u].first, targets[t].mask) > 0.5)) continue;
      used[u] = 1;
      search(t + 1, count + 1);
      used[u] = 0;
    }
  };
  search(0, 0);
  return best;
}

TEST_F(MetricsTest, GreedyMatchingEqualsExhaustive) {
  std::mt19937_64 rng(2024);
  int nontrivial = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const RandomInstance inst = MakeRandomInstance(rng, *catalog_);
    const QualityReport report = Evaluate(inst.annotation, inst.gt, *catalog_);
    const int64_t expected = ExhaustiveMatching(inst, *catalog_);
    ASSERT_EQ(report.recalled, expected) << "trial " << trial;
    ASSERT_EQ(report.tp, expected);
    nontrivial += expected > 0;
    ASSERT_NEAR(report.panoptic_quality,
                report.segmentation_quality * report.recognition_quality, 1e-9);
    for (double r : {report.recall, report.panoptic_quality,
                     report.segmentation_quality, report.recognition_quality}) {
      ASSERT_GE(r, 0.0);
      ASSERT_LE(r, 1.0);
    }
  }
  EXPECT_GT(nontrivial, 100);
}

TEST(PixelAgreementTest, Examples) {
  LabelMap a({4, 2});
  a.values = {0, 0, 0, 0, 1, 1, 1, 1};
  EXPECT_EQ(PixelAgreement(a, a), 1.0);
  LabelMap b({4, 2});
  b.values = {1, 1, 1, 1, 0, 0, 0, 0};
  EXPECT_EQ(PixelAgreement(a, b), 0.0);
  LabelMap c({4, 2});  // all unlabeled
  c.values[0] = 0;
  EXPECT_EQ(PixelAgreement(a, c), 1.0 / 8.0);
}

TEST(PixelAgreementTest, SymmetricAndHamming) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    LabelMap a({9, 7}), b({9, 7});
    int64_t differ = 0;
    for (size_t i = 0; i < a.values.size(); ++i) {
      a.values[i] = static_cast<int32_t>(rng() % 4) - 1;
      b.values[i] = static_cast<int32_t>(rng() % 4) - 1;
      differ += a.values[i] != b.values[i];
    }
    ASSERT_EQ(PixelAgreement(a, b), PixelAgreement(b, a));
    ASSERT_NEAR(PixelAgreement(a, b), 1.0 - differ / 63.0, 1e-12);
  }
}

TEST(LabelmeCostTest, VerticesPlusTwo) {
  EXPECT_EQ(LabelmePolygonCost(3), 5);
  EXPECT_EQ(LabelmePolygonCost(10), 12);
  try {
    LabelmePolygonCost(2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidPolygon);
  }
}

ActionTrace MakeTrace(double r0, std::vector<std::pair<int64_t, double>> steps) {
  ActionTrace trace;
  trace.initial_recall = r0;
  trace.initial_pq = r0 / 2;
  for (const auto& [cum, r] : steps) {
    TraceStep s;
    s.cumulative_cost = cum;
    s.recall = r;
    s.pq = r / 2;
    trace.steps.push_back(s);
  }
  return trace;
}

TEST(AggregateCurveTest, Examples) {
  const std::vector<ActionTrace> one{MakeTrace(0.4, {{2, 0.5}, {5, 0.7}})};
  const std::vector<int64_t> budgets{0, 1, 2, 4, 5, 100};
  const CostCurve curve = AggregateCurve(one, budgets);
  ASSERT_EQ(curve.points.size(), 6u);
  EXPECT_EQ(curve.points[0].mean_recall, 0.4);
  EXPECT_EQ(curve.points[1].mean_recall, 0.4);
  EXPECT_EQ(curve.points[2].mean_recall, 0.5);
  EXPECT_EQ(curve.points[3].mean_recall, 0.5);
  EXPECT_EQ(curve.points[5].mean_recall, 0.7);
  EXPECT_EQ(curve.points[5].mean_pq, 0.35);

  const std::vector<ActionTrace> two{MakeTrace(0.0, {{3, 0.2}}),
                                     MakeTrace(0.0, {{1, 0.6}})};
  const std::vector<int64_t> b3{3};
  const CostCurve mean = AggregateCurve(two, b3);
  EXPECT_NEAR(mean.points[0].mean_recall, 0.4, 1e-15);
  EXPECT_EQ(mean.points[0].n_images, 2u);
}

TEST(AggregateCurveTest, Errors) {
  const std::vector<int64_t> budgets{1, 2};
  try {
    AggregateCurve({}, budgets);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyInput);
  }
  const std::vector<ActionTrace> one{MakeTrace(0.1, {})};
  const std::vector<int64_t> bad{2, 2};
  EXPECT_THROW(AggregateCurve(one, bad), Error);
}

TEST(AggregateCurveTest, MonotoneWhenTracesAre) {
  std::mt19937_64 rng(17);
  std::vector<ActionTrace> traces;
  for (int i = 0; i < 20; ++i) {
    double r = 0.1 * static_cast<double>(rng() % 5);
    int64_t cum = 0;
    std::vector<std::pair<int64_t, double>> steps;
    for (int k = 0; k < 10; ++k) {
      cum += 1 + static_cast<int64_t>(rng() % 5);
      r = std::min(1.0, r + 0.01 * static_cast<double>(rng() % 10));
      steps.emplace_back(cum, r);
    }
    traces.push_back(MakeTrace(0.0, steps));
  }
  std::vector<int64_t> budgets;
  for (int64_t b = 0; b <= 60; b += 3) budgets.push_back(b);
  const CostCurve curve = AggregateCurve(traces, budgets);
  for (size_t i = 1; i < curve.points.size(); ++i) {
    ASSERT_GE(curve.points[i].mean_recall, curve.points[i - 1].mean_recall);
  }
}

TEST(AggregateCurveTest, CsvFormat) {
  CostCurve curve;
  curve.points.push_back({0, 0.4, 0.25, 3});
  curve.points.push_back({10, 2.0 / 3.0, 0.5, 3});
  EXPECT_EQ(CostCurveCsv(curve),
            "budget,mean_recall,mean_pq,n_images\n"
            "0,0.400000,0.250000,3\n"
            "10,0.666667,0.500000,3\n");
}

}  // namespace
}  // namespace annotkit
