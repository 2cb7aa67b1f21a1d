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

#include "annotkit/mask.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "annotkit/error.h"

namespace annotkit {
namespace {

Bitmap RandomBitmap(std::mt19937_64& rng, int max_side) {
  std::uniform_int_distribution<int> side(1, max_side);
  const Canvas canvas{side(rng), side(rng)};
  // Mix densities so that empty, full and blocky masks all show up.
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double density = unit(rng);
  const double stickiness = unit(rng);
  Bitmap bitmap(canvas);
  bool prev = unit(rng) < density;
  for (auto& bit : bitmap.mutable_bits()) {
    const bool value = unit(rng) < stickiness ? prev : unit(rng) < density;
    bit = value ? 1 : 0;
    prev = value;
  }
  return bitmap;
}

Bitmap RandomOnCanvas(std::mt19937_64& rng, Canvas canvas) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double density = unit(rng);
  Bitmap bitmap(canvas);
  for (auto& bit : bitmap.mutable_bits()) bit = unit(rng) < density ? 1 : 0;
  return bitmap;
}

Bitmap FromRows(Canvas canvas, const std::vector<std::string>& rows) {
  Bitmap bitmap(canvas);
  for (int y = 0; y < canvas.height; ++y) {
    for (int x = 0; x < canvas.width; ++x) {
      bitmap.set(x, y, rows[y][x] == '#');
    }
  }
  return bitmap;
}

TEST(EncodeTest, HandExamples) {
  EXPECT_EQ(Encode(Bitmap(Canvas{2, 2})).runs(),
            (std::vector<uint32_t>{4}));
  Bitmap full(Canvas{2, 2}, {1, 1, 1, 1});
  EXPECT_EQ(Encode(full).runs(), (std::vector<uint32_t>{0, 4}));
  Bitmap strip(Canvas{3, 1}, {0, 1, 1});
  EXPECT_EQ(Encode(strip).runs(), (std::vector<uint32_t>{1, 2}));
}

TEST(EncodeTest, ZeroSizedCanvasIsRejected) {
  try {
    Bitmap bitmap(Canvas{0, 3});
    FAIL() << "expected invalid-canvas";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidCanvas);
  }
}

TEST(DecodeTest, HandExamples) {
  EXPECT_EQ(Decode(Mask::FromRuns({2, 2}, {4})), Bitmap(Canvas{2, 2}));
  EXPECT_EQ(Decode(Mask::FromRuns({2, 2}, {0, 4})),
            Bitmap(Canvas{2, 2}, {1, 1, 1, 1}));
  EXPECT_EQ(Decode(Mask::FromRuns({3, 1}, {1, 2})),
            Bitmap(Canvas{3, 1}, {0, 1, 1}));
}

TEST(DecodeTest, CorruptRunsAreRejected) {
  for (const auto& runs : std::vector<std::vector<uint32_t>>{
           {3}, {1, 2, 2}, {1, 0, 3}, {}}) {
    try {
      Mask::FromRuns({2, 2}, runs);
      FAIL() << "expected corrupt-mask";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kCorruptMask);
    }
  }
}

TEST(EncodeTest, RoundTripOnRandomBitmaps) {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 500; ++trial) {
    const Bitmap bitmap = RandomBitmap(rng, 64);
    const Mask mask = Encode(bitmap);
    ASSERT_EQ(Decode(mask), bitmap) << "trial " << trial;
    int64_t sum = 0;
    for (size_t i = 0; i < mask.runs().size(); ++i) {
      if (i > 0) {
        ASSERT_GT(mask.runs()[i], 0u);
      }
      sum += mask.runs()[i];
    }
    ASSERT_EQ(sum, bitmap.canvas().area());
    ASSERT_EQ(Mask::Parse(mask.ToString()), mask);
  }
}

TEST(MaskTextTest, InterchangeForm) {
  const Mask mask = Mask::Parse("4x4:2,3,11");
  EXPECT_EQ(mask.canvas(), (Canvas{4, 4}));
  EXPECT_EQ(mask.area(), 3);
  EXPECT_EQ(mask.ToString(), "4x4:2,3,11");
  for (const char* bad : {"4x4:2,3", "4x4", "4x4:2, 3,11", "x4:16", "4x4:",
                          "4x4:2,0,14", "-1x4:4"}) {
    EXPECT_THROW(Mask::Parse(bad), Error) << bad;
  }
  EXPECT_THROW(Mask::Parse("0x4:0"), Error);
}

TEST(IouTest, HandExamples) {
  const Canvas c{4, 4};
  const Mask left = Encode(FromRows(c, {"##..", "##..", "##..", "##.."}));
  const Mask right = Encode(FromRows(c, {"..##", "..##", "..##", "..##"}));
  const Mask top = Encode(FromRows(c, {"####", "####", "....", "...."}));
  EXPECT_DOUBLE_EQ(Iou(left, left), 1.0);
  EXPECT_DOUBLE_EQ(Iou(left, right), 0.0);
  EXPECT_DOUBLE_EQ(Iou(left, top), 4.0 / 12.0);
  EXPECT_DOUBLE_EQ(Iou(Mask::Empty(c), Mask::Empty(c)), 0.0);
}

TEST(IouTest, CanvasMismatch) {
  try {
    Iou(Mask::Full({2, 2}), Mask::Full({2, 3}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCanvasMismatch);
  }
}

TEST(IouTest, MatchesPixelCountingOracle) {
  std::mt19937_64 rng(99);
  const Canvas c{32, 32};
  for (int trial = 0; trial < 200; ++trial) {
    const Bitmap a = RandomOnCanvas(rng, c);
    const Bitmap b = RandomOnCanvas(rng, c);
    int64_t inter = 0, uni = 0;
    for (size_t i = 0; i < a.bits().size(); ++i) {
      inter += a.bits()[i] && b.bits()[i];
      uni += a.bits()[i] || b.bits()[i];
    }
    const double expected =
        uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
    const Mask ma = Encode(a);
    const Mask mb = Encode(b);
    ASSERT_EQ(Iou(ma, mb), expected);
    ASSERT_EQ(Iou(mb, ma), Iou(ma, mb));
    if (!ma.empty()) {
      ASSERT_EQ(Iou(ma, ma), 1.0);
    }
    ASSERT_EQ(IntersectionArea(ma, mb), inter);
    ASSERT_EQ(Union(ma, mb).area(), uni);
    ASSERT_EQ(Intersection(ma, mb).area(), inter);
    ASSERT_EQ(Difference(ma, mb).area(), ma.area() - inter);
  }
}

TEST(SetOpsTest, MatchPixelwiseOracle) {
  std::mt19937_64 rng(5);
  const Canvas c{13, 7};
  for (int trial = 0; trial < 100; ++trial) {
    const Bitmap a = RandomOnCanvas(rng, c);
    const Bitmap b = RandomOnCanvas(rng, c);
    Bitmap u(c), n(c), d(c);
    for (int y = 0; y < c.height; ++y) {
      for (int x = 0; x < c.width; ++x) {
        u.set(x, y, a.at(x, y) || b.at(x, y));
        n.set(x, y, a.at(x, y) && b.at(x, y));
        d.set(x, y, a.at(x, y) && !b.at(x, y));
      }
    }
    ASSERT_EQ(Union(Encode(a), Encode(b)), Encode(u));
    ASSERT_EQ(Intersection(Encode(a), Encode(b)), Encode(n));
    ASSERT_EQ(Difference(Encode(a), Encode(b)), Encode(d));
  }
}

TEST(ContainsTest, HandExamples) {
  const Mask strip = Mask::FromRuns({3, 1}, {1, 2});
  EXPECT_FALSE(Contains(strip, {0, 0}));
  EXPECT_TRUE(Contains(strip, {1, 0}));
  EXPECT_TRUE(Contains(strip, {2.9, 0.99}));
  EXPECT_TRUE(Contains(Mask::Full({5, 5}), {4.5, 0.1}));
  EXPECT_FALSE(Contains(Mask::Empty({5, 5}), {2, 2}));
}

TEST(ContainsTest, OutOfBounds) {
  const Mask m = Mask::Full({3, 3});
  for (const Point p : {Point{-0.01, 0}, Point{3, 0}, Point{0, 3.0},
                        Point{std::nan(""), 1}}) {
    try {
      Contains(m, p);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kOutOfBounds);
    }
  }
}

TEST(MomentsTest, HandExamples) {
  Bitmap single(Canvas{5, 5});
  single.set(2, 3);
  const SpatialMoments s = Moments(Encode(single));
  EXPECT_DOUBLE_EQ(s.center.x, 2.0);
  EXPECT_DOUBLE_EQ(s.center.y, 3.0);
  EXPECT_DOUBLE_EQ(s.covariance[0], 0.25);
  EXPECT_DOUBLE_EQ(s.covariance[1], 0.0);
  EXPECT_DOUBLE_EQ(s.covariance[3], 0.25);
  EXPECT_EQ(s.area, 1);

  const SpatialMoments full = Moments(Mask::Full({3, 3}));
  EXPECT_DOUBLE_EQ(full.center.x, 1.0);
  EXPECT_DOUBLE_EQ(full.center.y, 1.0);
  EXPECT_NEAR(full.covariance[0], 2.0 / 3.0 + 0.25, 1e-12);
  EXPECT_NEAR(full.covariance[3], 2.0 / 3.0 + 0.25, 1e-12);
  EXPECT_NEAR(full.covariance[1], 0.0, 1e-12);
  EXPECT_EQ(full.area, 9);

  const SpatialMoments strip = Moments(Mask::Full({5, 1}));
  EXPECT_DOUBLE_EQ(strip.center.x, 2.0);
  EXPECT_NEAR(strip.covariance[0], 2.25, 1e-12);
  EXPECT_NEAR(strip.covariance[3], 0.25, 1e-12);
}

TEST(MomentsTest, EmptyMaskIsRejected) {
  try {
    Moments(Mask::Empty({4, 4}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyMask);
  }
}

TEST(MomentsTest, MatchBruteForceSums) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const Bitmap bitmap = RandomBitmap(rng, 48);
    const Mask mask = Encode(bitmap);
    if (mask.empty()) continue;
    double n = 0, mx = 0, my = 0;
    for (int y = 0; y < bitmap.canvas().height; ++y) {
      for (int x = 0; x < bitmap.canvas().width; ++x) {
        if (!bitmap.at(x, y)) continue;
        n += 1;
        mx += x;
        my += y;
      }
    }
    mx /= n;
    my /= n;
    double cxx = 0, cyy = 0, cxy = 0;
    for (int y = 0; y < bitmap.canvas().height; ++y) {
      for (int x = 0; x < bitmap.canvas().width; ++x) {
        if (!bitmap.at(x, y)) continue;
        cxx += (x - mx) * (x - mx);
        cyy += (y - my) * (y - my);
        cxy += (x - mx) * (y - my);
      }
    }
    const SpatialMoments m = Moments(mask);
    ASSERT_EQ(m.area, static_cast<int64_t>(n));
    ASSERT_NEAR(m.center.x, mx, 1e-9);
    ASSERT_NEAR(m.center.y, my, 1e-9);
    ASSERT_NEAR(m.covariance[0] - kCovarianceRegularization, cxx / n, 1e-9);
    ASSERT_NEAR(m.covariance[3] - kCovarianceRegularization, cyy / n, 1e-9);
    ASSERT_NEAR(m.covariance[1], cxy / n, 1e-9);
    ASSERT_EQ(m.covariance[1], m.covariance[2]);
  }
}

TEST(MahalanobisTest, HandExamples) {
  SpatialMoments m;
  m.center = {3, 4};
  m.covariance = {4, 0, 0, 1};
  EXPECT_DOUBLE_EQ(Mahalanobis({3, 4}, m), 0.0);
  EXPECT_NEAR(Mahalanobis({5, 5}, m), std::sqrt(2.0), 1e-12);
  m.covariance = {9, 0, 0, 9};
  EXPECT_NEAR(Mahalanobis({6, 8}, m), 5.0 / 3.0, 1e-12);
}

TEST(MahalanobisTest, IdentityCovarianceIsEuclidean) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coord(-50, 50);
  SpatialMoments m;
  m.covariance = {1, 0, 0, 1};
  for (int i = 0; i < 100; ++i) {
    m.center = {coord(rng), coord(rng)};
    const Point p{coord(rng), coord(rng)};
    ASSERT_NEAR(Mahalanobis(p, m),
                std::hypot(p.x - m.center.x, p.y - m.center.y), 1e-9);
  }
}

TEST(MahalanobisTest, SingularCovarianceIsDegenerate) {
  SpatialMoments m;
  m.covariance = {1, 1, 1, 1};
  try {
    Mahalanobis({0, 0}, m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNumericalDegenerate);
  }
}

TEST(RasterizeTest, HandExamples) {
  const Canvas c{4, 4};
  const Mask full = Mask::Full(c);
  const Mask left = Encode(FromRows(c, {"##..", "##..", "##..", "##.."}));

  std::vector<RasterLayer> one{{full, 7}};
  EXPECT_EQ(Rasterize(one, c).values, std::vector<int32_t>(16, 7));

  std::vector<RasterLayer> twins{{full, 1}, {full, 2}};
  EXPECT_EQ(Rasterize(twins, c).values, std::vector<int32_t>(16, 1));

  std::vector<RasterLayer> stack{{left, 10}, {full, 20}};
  const LabelMap map = Rasterize(stack, c);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) EXPECT_EQ(map.at(x, y), x < 2 ? 10 : 20);
  }

  EXPECT_EQ(Rasterize({}, c).values,
            std::vector<int32_t>(16, LabelMap::kUnlabeled));
  const Mask small = Mask::Full({2, 2});
  std::vector<RasterLayer> wrong{{small, 1}};
  EXPECT_THROW(Rasterize(wrong, c), Error);
}

TEST(RasterizeTest, FrontMostOwnerOnRandomStacks) {
  std::mt19937_64 rng(11);
  const Canvas c{16, 12};
  for (int trial = 0; trial < 100; ++trial) {
    const int depth = 1 + static_cast<int>(rng() % 5);
    std::vector<Mask> masks;
    std::vector<Bitmap> bitmaps;
    for (int k = 0; k < depth; ++k) {
      bitmaps.push_back(RandomOnCanvas(rng, c));
      masks.push_back(Encode(bitmaps.back()));
    }
    std::vector<RasterLayer> layers;
    for (int k = 0; k < depth; ++k) layers.push_back({masks[k], 100 + k});
    const LabelMap map = Rasterize(layers, c);
    for (int y = 0; y < c.height; ++y) {
      for (int x = 0; x < c.width; ++x) {
        int32_t expected = LabelMap::kUnlabeled;
        for (int k = 0; k < depth; ++k) {
          if (bitmaps[k].at(x, y)) {
            expected = 100 + k;
            break;
          }
        }
        ASSERT_EQ(map.at(x, y), expected);
      }
    }
  }
}

TEST(PixelHelpersTest, NthSetPixelWalksRuns) {
  const Mask m = Mask::Parse("4x4:2,3,5,2,4");
  const auto indices = SetPixelIndices(m);
  ASSERT_EQ(indices, (std::vector<uint32_t>{2, 3, 4, 10, 11}));
  for (int64_t k = 0; k < m.area(); ++k) {
    EXPECT_EQ(NthSetPixel(m, k), indices[k]);
  }
  EXPECT_THROW(NthSetPixel(m, 5), Error);
}

}  // namespace
}  // namespace annotkit
