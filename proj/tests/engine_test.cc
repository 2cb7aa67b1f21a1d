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

#include "annotkit/engine.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "annotkit/error.h"
#include "test_util.h"

namespace annotkit {
namespace {

using ::annotkit::testing::BoxMask;
using ::annotkit::testing::kCat;
using ::annotkit::testing::kDog;
using ::annotkit::testing::kGrass;
using ::annotkit::testing::kPerson;
using ::annotkit::testing::kSky;
using ::annotkit::testing::MakeContext;
using ::annotkit::testing::MakeSegment;
using ::annotkit::testing::MaskFromRows;

constexpr Canvas kSmall{4, 4};

SessionConfig EmptyInit() {
  SessionConfig config;
  config.init_mode = InitMode::kEmpty;
  return config;
}

std::vector<SegmentId> Ids(const ActiveSet& active) {
  std::vector<SegmentId> out;
  for (const auto& e : active) out.push_back(e.segment_id);
  return out;
}

template <typename Fn>
ErrorCode CodeOf(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kIo;
}

TEST(ProposalSetTest, RejectsInvalidSegments) {
  const Mask full = Mask::Full(kSmall);
  EXPECT_EQ(CodeOf([&] {
              ProposalSet(kSmall, {MakeSegment(1, full, kCat, 0.5),
                                   MakeSegment(1, full, kDog, 0.4)});
            }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([&] {
              ProposalSet(kSmall, {MakeSegment(1, Mask::Empty(kSmall), kCat, .5)});
            }),
            ErrorCode::kEmptyMask);
  EXPECT_EQ(CodeOf([&] {
              ProposalSet(kSmall, {MakeSegment(1, full, kCat, 1.5)});
            }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([&] {
              ProposalSet(kSmall, {MakeSegment(1, Mask::Full({2, 2}), kCat, .5)});
            }),
            ErrorCode::kCanvasMismatch);
  EXPECT_EQ(CodeOf([&] {
              MakeContext(kSmall, {MakeSegment(1, full, LabelIndex(42), .5)});
            }),
            ErrorCode::kUnknownLabel);
}

TEST(SessionConfigTest, SettingNames) {
  SessionConfig config;
  EXPECT_EQ(config.SettingName(), "init-auto");
  config.nms_threshold = 0.5;
  EXPECT_EQ(config.SettingName(), "init-auto+nms0.5");
  config.ordering = Ordering::kByDistance;
  config.top_n = 4;
  EXPECT_EQ(config.SettingName(), "init-auto+nms0.5+sortdistance-top4");
  config.ordering = Ordering::kByScore;
  config.init_mode = InitMode::kEmpty;
  config.nms_threshold.reset();
  EXPECT_EQ(config.SettingName(), "init-empty+sortscore-top4");
  config.top_n.reset();
  config.ordering = Ordering::kByDistance;
  EXPECT_EQ(config.SettingName(), "init-empty+sortdistance");

  config.nms_threshold = 1.0;
  EXPECT_THROW(config.Validate(), Error);
  config.nms_threshold = 0.5;
  config.top_n = 0;
  EXPECT_THROW(config.Validate(), Error);
}

TEST(NewSessionTest, EmptyInit) {
  auto ctx = MakeContext(kSmall, {MakeSegment(1, Mask::Full(kSmall), kCat, .9)});
  AnnotationSession session(ctx, EmptyInit());
  EXPECT_TRUE(session.active().empty());
  EXPECT_EQ(session.ledger().total(), 0);
}

TEST(NewSessionTest, AutoInitWithOneSegment) {
  auto ctx = MakeContext(kSmall, {MakeSegment(7, Mask::Full(kSmall), kDog, .3)});
  AnnotationSession session(ctx, SessionConfig{});
  EXPECT_EQ(session.active(), (ActiveSet{{SegmentId(7), kDog}}));
  EXPECT_EQ(session.ledger().total(), 0);
}

TEST(NewSessionTest, AutoInitKeepsOnlyTopOfFullCanvasStack) {
  const Mask full = Mask::Full(kSmall);
  auto ctx = MakeContext(kSmall, {MakeSegment(1, full, kCat, .8),
                                  MakeSegment(2, full, kDog, .9),
                                  MakeSegment(3, full, kSky, .7)});
  AnnotationSession session(ctx, SessionConfig{});
  EXPECT_EQ(Ids(session.active()), (std::vector<SegmentId>{SegmentId(2)}));
}

TEST(NewSessionTest, EmptyProposalSetWithAutoInit) {
  auto ctx = MakeContext(kSmall, {});
  AnnotationSession session(ctx, SessionConfig{});
  EXPECT_TRUE(session.active().empty());
}

TEST(AutoInitializeTest, HandExamples) {
  const Canvas c{6, 2};
  const Mask left = MaskFromRows({"###...", "###..."});
  const Mask right = MaskFromRows({"...###", "...###"});
  const Mask center = MaskFromRows({".####.", ".####."});
  const Mask dot = MaskFromRows({"......", ".#...."});

  EXPECT_EQ(Ids(AutoInitialize(ProposalSet(
                c, {MakeSegment(1, left, kCat, .9), MakeSegment(2, right, kDog, .5)}))),
            (std::vector<SegmentId>{SegmentId(1), SegmentId(2)}));
  EXPECT_EQ(Ids(AutoInitialize(ProposalSet(
                c, {MakeSegment(1, left, kCat, .9), MakeSegment(2, dot, kDog, .8)}))),
            (std::vector<SegmentId>{SegmentId(1)}));
  EXPECT_EQ(Ids(AutoInitialize(ProposalSet(
                c, {MakeSegment(3, center, kPerson, .7), MakeSegment(1, left, kCat, .9),
                    MakeSegment(2, right, kDog, .8)}))),
            (std::vector<SegmentId>{SegmentId(1), SegmentId(2)}));
}

TEST(AutoInitializeTest, EqualScoresBreakTiesByLowerId) {
  const Mask full = Mask::Full(kSmall);
  EXPECT_EQ(Ids(AutoInitialize(ProposalSet(
                kSmall, {MakeSegment(9, full, kCat, .5), MakeSegment(4, full, kDog, .5)}))),
            (std::vector<SegmentId>{SegmentId(4)}));
}

std::vector<Segment> RandomProposals(std::mt19937_64& rng, Canvas c, int n) {
  std::uniform_int_distribution<int> xs(0, c.width - 1);
  std::uniform_int_distribution<int> ys(0, c.height - 1);
  std::uniform_real_distribution<double> score(0.0, 1.0);
  std::vector<Segment> out;
  for (int i = 0; i < n; ++i) {
    int x0 = xs(rng), x1 = xs(rng), y0 = ys(rng), y1 = ys(rng);
    if (x0 > x1) std::swap(x0, x1);
    if (y0 > y1) std::swap(y0, y1);
    out.push_back(MakeSegment(100 + i, BoxMask(c, x0, y0, x1 + 1, y1 + 1),
                              LabelIndex(static_cast<int32_t>(rng() % 5)),
                              std::round(score(rng) * 20) / 20));
  }
  return out;
}

TEST(AutoInitializeTest, ReplayCoverageProperty) {
  std::mt19937_64 rng(21);
  const Canvas c{20, 15};
  for (int trial = 0; trial < 50; ++trial) {
    const ProposalSet proposals(c, RandomProposals(rng, c, 12));
    const ActiveSet active = AutoInitialize(proposals);
    std::set<SegmentId> appended;
    for (const auto& e : active) appended.insert(e.segment_id);
    ASSERT_EQ(appended.size(), active.size());

    std::vector<const Segment*> order;
    for (const auto& s : proposals.segments()) order.push_back(&s);
    std::sort(order.begin(), order.end(), [](auto* a, auto* b) {
      return a->score != b->score ? a->score > b->score : a->id < b->id;
    });
    Bitmap covered(c);
    size_t next_active = 0;
    for (const Segment* s : order) {
      const Bitmap bits = Decode(s->mask);
      bool uncovered = false;
      for (size_t i = 0; i < bits.bits().size(); ++i) {
        uncovered |= bits.bits()[i] && !covered.bits()[i];
      }
      if (uncovered) {
        ASSERT_LT(next_active, active.size());
        ASSERT_EQ(active[next_active++].segment_id, s->id);
        for (size_t i = 0; i < bits.bits().size(); ++i) {
          if (bits.bits()[i]) covered.mutable_bits()[i] = 1;
        }
      } else {
        ASSERT_EQ(appended.count(s->id), 0u);
      }
    }
    ASSERT_EQ(next_active, active.size());
  }
}

TEST(CandidatesAtTest, NoProposalAtPoint) {
  auto ctx = MakeContext(kSmall, {MakeSegment(1, BoxMask(kSmall, 0, 0, 2, 2), kCat, .9)});
  AnnotationSession session(ctx, EmptyInit());
  EXPECT_TRUE(session.CandidatesAt({3, 3}).segments.empty());
}

TEST(CandidatesAtTest, NmsSuppressesExactDuplicate) {
  const Mask box = BoxMask(kSmall, 0, 0, 3, 3);
  auto ctx = MakeContext(kSmall, {MakeSegment(1, box, kCat, .8),
                                  MakeSegment(2, box, kDog, .9)});
  SessionConfig config = EmptyInit();
  EXPECT_EQ(AnnotationSession(ctx, config).CandidatesAt({1, 1}).segments.size(), 2u);
  config.nms_threshold = 0.5;
  EXPECT_EQ(AnnotationSession(ctx, config).CandidatesAt({1, 1}).segments,
            (std::vector<SegmentId>{SegmentId(2)}));
}

TEST(CandidatesAtTest, NmsTieKeepsLowerId) {
  const Mask box = BoxMask(kSmall, 0, 0, 3, 3);
  auto ctx = MakeContext(kSmall, {MakeSegment(8, box, kCat, .5),
                                  MakeSegment(3, box, kDog, .5)});
  SessionConfig config = EmptyInit();
  config.nms_threshold = 0.5;
  EXPECT_EQ(AnnotationSession(ctx, config).CandidatesAt({1, 1}).segments,
            (std::vector<SegmentId>{SegmentId(3)}));
}

TEST(CandidatesAtTest, ScoreVersusDistanceOrdering) {
  const Canvas c{32, 32};
  const Mask huge = Mask::Full(c);
  const Mask small = BoxMask(c, 10, 10, 15, 15);
  const Point click{12, 12};
  // Brute-force check that the constructed scene has the intended geometry.
  auto brute_distance = [&](const Mask& m) {
    const Bitmap b = Decode(m);
    double n = 0, mx = 0, my = 0;
    for (int y = 0; y < c.height; ++y)
      for (int x = 0; x < c.width; ++x)
        if (b.at(x, y)) n += 1, mx += x, my += y;
    mx /= n;
    my /= n;
    double sxx = 0, syy = 0, sxy = 0;
    for (int y = 0; y < c.height; ++y)
      for (int x = 0; x < c.width; ++x)
        if (b.at(x, y)) {
          sxx += (x - mx) * (x - mx);
          syy += (y - my) * (y - my);
          sxy += (x - mx) * (y - my);
        }
    const double a = sxx / n + 0.25, d = syy / n + 0.25, o = sxy / n;
    const double dx = click.x - mx, dy = click.y - my;
    return std::sqrt((d * dx * dx - 2 * o * dx * dy + a * dy * dy) / (a * d - o * o));
  };
  ASSERT_LT(brute_distance(small), brute_distance(huge));

  auto ctx = MakeContext(c, {MakeSegment(1, huge, kGrass, .95),
                             MakeSegment(2, small, kDog, .5)});
  SessionConfig config = EmptyInit();
  EXPECT_EQ(AnnotationSession(ctx, config).CandidatesAt(click).segments,
            (std::vector<SegmentId>{SegmentId(1), SegmentId(2)}));
  config.ordering = Ordering::kByDistance;
  EXPECT_EQ(AnnotationSession(ctx, config).CandidatesAt(click).segments,
            (std::vector<SegmentId>{SegmentId(2), SegmentId(1)}));
  config.top_n = 1;
  EXPECT_EQ(AnnotationSession(ctx, config).CandidatesAt(click).segments,
            (std::vector<SegmentId>{SegmentId(2)}));
}

TEST(CandidatesAtTest, OffCanvasPoint) {
  auto ctx = MakeContext(kSmall, {});
  AnnotationSession session(ctx, EmptyInit());
  EXPECT_EQ(CodeOf([&] { session.CandidatesAt({4, 0}); }), ErrorCode::kOutOfBounds);
  EXPECT_EQ(CodeOf([&] { session.CandidatesAt({0, -1}); }), ErrorCode::kOutOfBounds);
}

TEST(CandidatesAtTest, PropertiesOnRandomProposalSets) {
  std::mt19937_64 rng(8);
  const Canvas c{24, 24};
  for (int trial = 0; trial < 60; ++trial) {
    auto ctx = MakeContext(c, RandomProposals(rng, c, 25));
    SessionConfig config;
    config.init_mode = trial % 2 ? InitMode::kAuto : InitMode::kEmpty;
    if (trial % 3) config.nms_threshold = 0.2 + 0.3 * (trial % 3);
    config.ordering = trial % 4 < 2 ? Ordering::kByScore : Ordering::kByDistance;
    if (trial % 5 == 0) config.top_n = 3;
    AnnotationSession session(ctx, config);
    const Point p{static_cast<double>(rng() % 24) + 0.5,
                  static_cast<double>(rng() % 24) + 0.5};
    const auto candidates = session.CandidatesAt(p).segments;
    if (config.top_n) {
      ASSERT_LE(candidates.size(), static_cast<size_t>(*config.top_n));
    }
    const auto& proposals = ctx->proposals();
    for (size_t i = 0; i < candidates.size(); ++i) {
      const Segment& s = proposals.at(candidates[i]);
      ASSERT_TRUE(Contains(s.mask, p));
      ASSERT_FALSE(session.IsActive(s.id));
      for (size_t j = 0; j < i; ++j) {
        const Segment& prev = proposals.at(candidates[j]);
        if (config.nms_threshold) {
          ASSERT_LE(Iou(s.mask, prev.mask), *config.nms_threshold);
        }
        if (j + 1 == i) {
          if (config.ordering == Ordering::kByScore) {
            ASSERT_LE(s.score, prev.score);
          } else {
            ASSERT_GE(Mahalanobis(p, Moments(s.mask)),
                      Mahalanobis(p, Moments(prev.mask)));
          }
        }
      }
    }
  }
}

class EditTest : public ::testing::Test {
 protected:
  // Four nested boxes around (1, 1) with descending scores, plus a box on
  // the right half.
  EditTest()
      : ctx_(MakeContext(kSmall, {MakeSegment(1, BoxMask(kSmall, 0, 0, 4, 4), kGrass, .9),
                                  MakeSegment(2, BoxMask(kSmall, 0, 0, 3, 4), kCat, .8),
                                  MakeSegment(3, BoxMask(kSmall, 0, 0, 2, 4), kDog, .7),
                                  MakeSegment(4, BoxMask(kSmall, 0, 0, 2, 2), kCat, .6),
                                  MakeSegment(5, BoxMask(kSmall, 3, 0, 4, 4), kSky, .5)})),
        session_(ctx_, EmptyInit()) {}

  std::shared_ptr<const SessionContext> ctx_;
  AnnotationSession session_;
};

TEST_F(EditTest, AddCostsTwoPlusScrolls) {
  EXPECT_EQ(session_.ApplyAdd({1, 1}, 0), 2);
  EXPECT_EQ(session_.active(), (ActiveSet{{SegmentId(1), kGrass}}));
  EXPECT_EQ(session_.ApplyAdd({1, 1}, 2), 4);
  EXPECT_EQ(Ids(session_.active()),
            (std::vector<SegmentId>{SegmentId(4), SegmentId(1)}));
  EXPECT_EQ(session_.ledger().total(), 6);
  EXPECT_EQ(session_.ledger().count(ActionKind::kAdd, MicroAction::kScroll), 2);
  EXPECT_EQ(session_.ledger().actions(ActionKind::kAdd), 2);
}

TEST_F(EditTest, AddAtIndexThreeCostsFive) {
  EXPECT_EQ(session_.ApplyAdd({1, 1}, 3), 5);
  EXPECT_EQ(session_.active().front().segment_id, SegmentId(4));
  EXPECT_EQ(session_.active().front().label, kCat);
}

TEST_F(EditTest, AddWithoutCandidatesChargesTheClick) {
  session_.ApplyAdd({3, 3}, 0);  // segment 1 covers everything
  session_.ApplyAdd({3, 3}, 0);  // then segment 5
  const auto before = session_.active();
  EXPECT_EQ(CodeOf([&] { session_.ApplyAdd({3, 3}, 0); }), ErrorCode::kNoCandidates);
  EXPECT_EQ(session_.active(), before);
  EXPECT_EQ(session_.ledger().total(), 5);
  EXPECT_TRUE(session_.log().back().failed);
}

TEST_F(EditTest, AddIndexOutOfRangeIsFree) {
  EXPECT_EQ(CodeOf([&] { session_.ApplyAdd({3, 3}, 2); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(session_.ledger().total(), 0);
  EXPECT_TRUE(session_.log().empty());
}

TEST_F(EditTest, RemoveKeepsRelativeOrder) {
  session_.ApplyAdd({1, 1}, 0);
  EXPECT_EQ(session_.ApplyRemove(SegmentId(1)), 1);
  EXPECT_TRUE(session_.active().empty());

  session_.ApplyAdd({3, 0}, 0);  // 1
  session_.ApplyAdd({3, 0}, 0);  // 5
  session_.ApplyAdd({0, 0}, 0);  // 2
  ASSERT_EQ(Ids(session_.active()),
            (std::vector<SegmentId>{SegmentId(2), SegmentId(5), SegmentId(1)}));
  session_.ApplyRemove(SegmentId(2));
  EXPECT_EQ(Ids(session_.active()),
            (std::vector<SegmentId>{SegmentId(5), SegmentId(1)}));
}

TEST_F(EditTest, RemoveInactiveIsFree) {
  EXPECT_EQ(CodeOf([&] { session_.ApplyRemove(SegmentId(3)); }),
            ErrorCode::kUnknownSegment);
  EXPECT_EQ(session_.ledger().total(), 0);
}

TEST_F(EditTest, LabelShortlist) {
  EXPECT_EQ(session_.LabelShortlist({1, 1}),
            (std::vector<LabelIndex>{kGrass, kCat, kDog}));
  EXPECT_EQ(session_.LabelShortlist({3, 3}), (std::vector<LabelIndex>{kGrass, kSky}));
}

TEST(LabelShortlistTest, DedupByMaxScore) {
  const Mask full = Mask::Full(kSmall);
  auto ctx = MakeContext(kSmall, {MakeSegment(1, full, kCat, .9),
                                  MakeSegment(2, full, kDog, .8),
                                  MakeSegment(3, full, kCat, .6)});
  AnnotationSession session(ctx, EmptyInit());
  EXPECT_EQ(session.LabelShortlist({0, 0}), (std::vector<LabelIndex>{kCat, kDog}));
  auto single = MakeContext(kSmall, {MakeSegment(1, full, kGrass, .7)});
  EXPECT_EQ(AnnotationSession(single, EmptyInit()).LabelShortlist({2, 2}),
            (std::vector<LabelIndex>{kGrass}));
  auto none = MakeContext(kSmall, {MakeSegment(1, BoxMask(kSmall, 0, 0, 1, 1), kGrass, .7)});
  EXPECT_TRUE(AnnotationSession(none, EmptyInit()).LabelShortlist({2, 2}).empty());
}

TEST_F(EditTest, ChangeLabelCosts) {
  session_.ApplyAdd({1, 1}, 0);
  EXPECT_EQ(session_.ApplyChangeLabel(SegmentId(1), kCat, true, Point{1, 1}), 2);
  EXPECT_EQ(session_.active().front().label, kCat);
  EXPECT_EQ(session_.ApplyChangeLabel(SegmentId(1), kPerson, false), 3);
  EXPECT_EQ(session_.active().front().label, kPerson);
  EXPECT_EQ(session_.ledger().total(), 2 + 2 + 3);

  const auto before = session_.active();
  EXPECT_EQ(session_.ApplyChangeLabel(SegmentId(1), kPerson, true), 2);
  EXPECT_EQ(session_.active(), before);
  EXPECT_EQ(session_.ledger().total(), 9);
}

TEST_F(EditTest, ChangeLabelErrors) {
  session_.ApplyAdd({1, 1}, 0);
  EXPECT_EQ(CodeOf([&] { session_.ApplyChangeLabel(SegmentId(2), kCat, true); }),
            ErrorCode::kUnknownSegment);
  EXPECT_EQ(CodeOf([&] { session_.ApplyChangeLabel(SegmentId(1), LabelIndex(99), true); }),
            ErrorCode::kUnknownLabel);
  EXPECT_EQ(CodeOf([&] {
              session_.ApplyChangeLabel(SegmentId(1), kPerson, true, Point{1, 1});
            }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(session_.ledger().total(), 2);
}

TEST_F(EditTest, ChangeDepth) {
  session_.ApplyAdd({3, 0}, 0);  // 1
  session_.ApplyAdd({3, 0}, 0);  // 5, now in front
  EXPECT_EQ(session_.ApplyChangeDepth(SegmentId(1), -1), 1);
  EXPECT_EQ(Ids(session_.active()), (std::vector<SegmentId>{SegmentId(1), SegmentId(5)}));

  session_.ApplyAdd({0, 0}, 0);  // 2 in front: [2, 1, 5]
  // One position from the back, +5 clamps to a single step.
  EXPECT_EQ(session_.ApplyChangeDepth(SegmentId(1), 5), 1);
  EXPECT_EQ(Ids(session_.active()),
            (std::vector<SegmentId>{SegmentId(2), SegmentId(5), SegmentId(1)}));
  EXPECT_EQ(session_.ApplyChangeDepth(SegmentId(1), -7), 2);
  EXPECT_EQ(session_.active().front().segment_id, SegmentId(1));
  EXPECT_EQ(session_.ledger().count(ActionKind::kChangeDepth, MicroAction::kScroll), 4);
}

TEST_F(EditTest, ChangeDepthErrors) {
  session_.ApplyAdd({1, 1}, 0);
  EXPECT_EQ(CodeOf([&] { session_.ApplyChangeDepth(SegmentId(1), 0); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([&] { session_.ApplyChangeDepth(SegmentId(3), 1); }),
            ErrorCode::kUnknownSegment);
  EXPECT_EQ(session_.ledger().total(), 2);
}

TEST_F(EditTest, RenderFollowsDepthOrder) {
  const Rendering empty = session_.Render();
  EXPECT_EQ(empty.segments.values, std::vector<int32_t>(16, LabelMap::kUnlabeled));
  EXPECT_EQ(empty.labels.values, std::vector<int32_t>(16, LabelMap::kUnlabeled));

  session_.ApplyAdd({3, 3}, 0);  // full grass
  EXPECT_EQ(session_.Render().labels.values,
            std::vector<int32_t>(16, kGrass.value()));

  session_.ApplyAdd({0, 0}, 2);  // 2x2 cat box in front
  const Rendering r = session_.Render();
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      const bool front = x < 2 && y < 2;
      EXPECT_EQ(r.segments.at(x, y), front ? 4 : 1);
      EXPECT_EQ(r.labels.at(x, y), front ? kCat.value() : kGrass.value());
    }
  }
}

TEST_F(EditTest, LedgerExamples) {
  EXPECT_EQ(session_.ledger().total(), 0);
  session_.ApplyAdd({1, 1}, 2);
  session_.ApplyRemove(SegmentId(3));
  EXPECT_EQ(session_.ledger().total(), 5);

  AnnotationSession other(ctx_, EmptyInit());
  other.ApplyAdd({3, 3}, 0);
  other.ApplyAdd({3, 3}, 0);
  EXPECT_THROW(other.ApplyAdd({3, 3}, 0), Error);
  AnnotationSession fresh(ctx_, EmptyInit());
  fresh.ApplyAdd({0, 0}, 0);
  fresh.ApplyRemove(SegmentId(1));
  fresh.ApplyAdd({0, 0}, 0);
  fresh.ApplyAdd({0, 0}, 0);
  fresh.ApplyAdd({0, 0}, 0);
  fresh.ApplyAdd({0, 0}, 0);
  const int64_t before = fresh.ledger().total();
  EXPECT_THROW(fresh.ApplyAdd({0, 0}, 0), Error);
  EXPECT_EQ(fresh.ledger().total(), before + 1);
}

TEST_F(EditTest, HideIsFreeAndStateless) {
  session_.ApplyAdd({1, 1}, 0);
  const auto active = session_.active();
  const auto ledger = session_.ledger();
  const auto hash = RenderHash(session_.Render());
  EXPECT_EQ(session_.Hide(), 0);
  EXPECT_EQ(session_.active(), active);
  EXPECT_EQ(session_.ledger(), ledger);
  EXPECT_EQ(RenderHash(session_.Render()), hash);
  EXPECT_EQ(session_.log().size(), 1u);
}

// Random action sequences: invariants after every action and exact replay.
TEST(SessionPropertyTest, RandomSequencesReplayExactly) {
  std::mt19937_64 rng(404);
  const Canvas c{24, 20};
  for (int trial = 0; trial < 40; ++trial) {
    auto ctx = MakeContext(c, RandomProposals(rng, c, 20));
    SessionConfig config;
    config.init_mode = trial % 2 ? InitMode::kAuto : InitMode::kEmpty;
    if (trial % 3 == 0) config.nms_threshold = 0.5;
    if (trial % 4 == 0) config.ordering = Ordering::kByDistance;
    if (trial % 5 == 0) config.top_n = 2;
    AnnotationSession session(ctx, config);
    for (int step = 0; step < 30; ++step) {
      const int choice = static_cast<int>(rng() % 4);
      const Point p{static_cast<double>(rng() % c.width),
                    static_cast<double>(rng() % c.height)};
      try {
        if (choice == 0 || session.active().empty()) {
          const auto n = session.CandidatesAt(p).segments.size();
          session.ApplyAdd(p, n ? static_cast<int32_t>(rng() % n) : 0);
        } else {
          const auto& e = session.active()[rng() % session.active().size()];
          if (choice == 1) {
            session.ApplyRemove(e.segment_id);
          } else if (choice == 2) {
            session.ApplyChangeLabel(e.segment_id,
                                     LabelIndex(static_cast<int32_t>(rng() % 5)),
                                     rng() % 2 == 0);
          } else {
            session.ApplyChangeDepth(e.segment_id,
                                     static_cast<int32_t>(rng() % 7) - 3 ?: 1);
          }
        }
      } catch (const Error& e) {
        ASSERT_EQ(e.code(), ErrorCode::kNoCandidates);
      }
      std::set<SegmentId> seen;
      for (const auto& e : session.active()) {
        ASSERT_TRUE(ctx->proposals().PositionOf(e.segment_id).has_value());
        ASSERT_TRUE(seen.insert(e.segment_id).second);
      }
    }
    int64_t sum = 0;
    for (const auto& r : session.log()) sum += r.cost;
    ASSERT_EQ(sum, session.ledger().total());

    AnnotationSession replayed(ctx, config);
    for (const auto& record : session.log()) replayed.Replay(record);
    ASSERT_EQ(replayed.ledger(), session.ledger());
    ASSERT_EQ(replayed.active(), session.active());
    ASSERT_EQ(replayed.log(), session.log());
    ASSERT_EQ(RenderHash(replayed.Render()), RenderHash(session.Render()));
  }
}

TEST(SessionRestoreTest, RejectsInconsistentState) {
  auto ctx = MakeContext(kSmall, {MakeSegment(1, Mask::Full(kSmall), kCat, .5)});
  EXPECT_EQ(CodeOf([&] {
              AnnotationSession::Restore(ctx, SessionConfig{}, {{SegmentId(9), kCat}}, {}, {});
            }),
            ErrorCode::kUnknownSegment);
  EXPECT_EQ(CodeOf([&] {
              AnnotationSession::Restore(ctx, SessionConfig{},
                                         {{SegmentId(1), kCat}, {SegmentId(1), kDog}}, {}, {});
            }),
            ErrorCode::kInvalidArgument);
  const auto restored = AnnotationSession::Restore(
      ctx, SessionConfig{}, {{SegmentId(1), kDog}}, {}, {});
  EXPECT_EQ(restored.active(), (ActiveSet{{SegmentId(1), kDog}}));
  EXPECT_EQ(restored.config().init_mode, InitMode::kAuto);
}

}  // namespace
}  // namespace annotkit
