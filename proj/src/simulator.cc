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


#include "annotkit/simulator.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "annotkit/error.h"
#include "annotkit/seeding.h"

namespace annotkit {
namespace {

Point PixelPoint(int64_t index, const Canvas& canvas) {
  return {static_cast<double>(index % canvas.width),
          static_cast<double>(index / canvas.width)};
}

int KindRank(ActionKind kind) {
  switch (kind) {
    case ActionKind::kAdd: return 0;
    case ActionKind::kRemove: return 1;
    case ActionKind::kChangeLabel: return 2;
    case ActionKind::kChangeDepth: return 3;
    case ActionKind::kHide: return 4;
  }
  return 5;
}

// Index of the target with the highest IoU against the visible part of the
// segment at `depth`; ties go to the lower index.
std::optional<size_t> BestTarget(const QualityModel& model,
                                 const GroundTruthImage& gt, size_t depth) {
  std::optional<size_t> best;
  double best_iou = 0.0;
  const int64_t area = model.VisibleArea(depth);
  for (size_t t = 0; t < gt.targets().size(); ++t) {
    const int64_t inter = model.VisibleIntersection(depth, t);
    if (inter == 0) continue;
    const double iou = static_cast<double>(inter) /
                       static_cast<double>(area + gt.targets()[t].mask.area() -
                                           inter);
    if (!best || iou > best_iou) {
      best = t;
      best_iou = iou;
    }
  }
  return best;
}

}  // namespace

uint64_t SimRng::StreamSeed(uint64_t seed, std::string_view image_id,
                            int64_t step) {
  return SplitMix64(DeriveSeed(seed, image_id) ^ static_cast<uint64_t>(step));
}

Point SampleClick(const Mask& mask, SimRng::Engine& rng) {
  if (mask.empty()) {
    throw Error(ErrorCode::kEmptyMask, "cannot click on an empty mask");
  }
  const SpatialMoments m = Moments(mask);
  const Canvas& canvas = mask.canvas();
  // Cholesky factor of the (regularized, positive definite) covariance.
  const double l11 = std::sqrt(m.covariance[0]);
  const double l21 = m.covariance[2] / l11;
  const double l22 = std::sqrt(std::max(m.covariance[3] - l21 * l21, 0.0));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int draw = 0; draw < kMaxClickDraws; ++draw) {
    const double z1 = normal(rng);
    const double z2 = normal(rng);
    // Pixel (x, y) spans [x, x+1) x [y, y+1); moments are about its corner.
    const Point p{m.center.x + 0.5 + l11 * z1,
                  m.center.y + 0.5 + l21 * z1 + l22 * z2};
    if (p.x < 0 || p.y < 0 || p.x >= canvas.width || p.y >= canvas.height) {
      continue;
    }
    if (Contains(mask, p)) return p;
  }
  std::uniform_int_distribution<int64_t> pick(0, mask.area() - 1);
  const Point corner = PixelPoint(NthSetPixel(mask, pick(rng)), canvas);
  return {corner.x + 0.5, corner.y + 0.5};
}

std::vector<CandidateAction> BuildCandidatePool(const AnnotationSession& session,
                                                const QualityModel& model,
                                                const GroundTruthImage& gt,
                                                SimRng::Engine& rng) {
  if (!(session.canvas() == gt.canvas())) {
    throw Error(ErrorCode::kCanvasMismatch,
                "session and ground truth are on different canvases");
  }
  const double current = model.pq();
  const ActiveSet& active = session.active();
  std::vector<CandidateAction> pool;

  for (size_t d = 0; d < active.size(); ++d) {
    const ActiveEntry& entry = active[d];
    const int32_t id = entry.segment_id.value();

    CandidateAction remove;
    remove.kind = ActionKind::kRemove;
    remove.target = id;
    remove.predicted_pq = model.TrialRemove(d);
    remove.cost = kRemoveCost;
    pool.push_back(remove);

    const int32_t up = static_cast<int32_t>(d);
    const int32_t down = static_cast<int32_t>(active.size() - 1 - d);
    for (int32_t distance = 1; distance <= std::max(up, down); ++distance) {
      std::optional<CandidateAction> found;
      for (int32_t shift : {-distance, distance}) {
        if (shift < -up || shift > down) continue;
        const double pq = model.TrialChangeDepth(d, shift);
        if (pq > current) {
          CandidateAction depth;
          depth.kind = ActionKind::kChangeDepth;
          depth.target = id;
          depth.shift = shift;
          depth.predicted_pq = pq;
          depth.cost = distance;
          found = depth;
          break;
        }
      }
      if (found) {
        pool.push_back(*found);
        break;
      }
    }

    const std::optional<size_t> best = BestTarget(model, gt, d);
    if (best && gt.targets()[*best].label != entry.label) {
      const LabelIndex label = gt.targets()[*best].label;
      // The annotator opens the label menu while hovering the segment.
      const Point hover = SampleClick(model.VisibleMask(d), rng);
      const std::vector<LabelIndex> shortlist = session.LabelShortlist(hover);
      CandidateAction relabel;
      relabel.kind = ActionKind::kChangeLabel;
      relabel.target = id;
      relabel.point = hover;
      relabel.label = label;
      relabel.via_shortlist =
          std::find(shortlist.begin(), shortlist.end(), label) !=
          shortlist.end();
      relabel.cost =
          relabel.via_shortlist ? kShortlistLabelCost : kManualLabelCost;
      relabel.predicted_pq = model.TrialChangeLabel(d, label);
      pool.push_back(relabel);
    }
  }

  const ProposalSet& proposals = session.context().proposals();
  for (size_t t = 0; t < gt.targets().size(); ++t) {
    if (model.IsMatched(t)) continue;
    const Point click = SampleClick(gt.targets()[t].mask, rng);
    const CandidateList list = session.CandidatesAt(click);
    for (size_t i = 0; i < list.segments.size(); ++i) {
      const double pq = model.TrialAdd(*proposals.PositionOf(list.segments[i]));
      if (pq > current) {
        CandidateAction add;
        add.kind = ActionKind::kAdd;
        add.target = static_cast<int32_t>(t);
        add.point = click;
        add.index = static_cast<int32_t>(i);
        add.predicted_pq = pq;
        add.cost = AddCost(add.index);
        pool.push_back(add);
        break;
      }
    }
  }

  for (CandidateAction& a : pool) a.delta = a.predicted_pq - current;
  return pool;
}

std::optional<CandidateAction> ChooseAction(
    std::span<const CandidateAction> pool) {
  const CandidateAction* best = nullptr;
  auto key = [](const CandidateAction& a) {
    return std::make_tuple(-a.delta, a.cost, KindRank(a.kind), a.target);
  };
  for (const CandidateAction& a : pool) {
    if (!(a.delta > 0)) continue;
    if (best == nullptr || key(a) < key(*best)) best = &a;
  }
  if (best == nullptr) return std::nullopt;
  return *best;
}

int64_t ExecuteAction(AnnotationSession& session,
                      const CandidateAction& action) {
  switch (action.kind) {
    case ActionKind::kAdd:
      return session.ApplyAdd(*action.point, action.index);
    case ActionKind::kRemove:
      return session.ApplyRemove(SegmentId(action.target));
    case ActionKind::kChangeLabel:
      return session.ApplyChangeLabel(SegmentId(action.target), *action.label,
                                      action.via_shortlist, action.point);
    case ActionKind::kChangeDepth:
      return session.ApplyChangeDepth(SegmentId(action.target), action.shift);
    case ActionKind::kHide:
      return session.Hide();
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown action kind");
}

SimulationResult SimulateImage(std::shared_ptr<const SessionContext> context,
                               const GroundTruthImage& gt,
                               const SessionConfig& config, int64_t budget,
                               uint64_t seed, std::string image_id) {
  if (budget < 0) {
    throw Error(ErrorCode::kInvalidArgument, "budget must be non-negative");
  }
  if (!(context->proposals().canvas() == gt.canvas())) {
    throw Error(ErrorCode::kCanvasMismatch,
                "proposals and ground truth are on different canvases");
  }
  AnnotationSession session(context, config);
  QualityModel model(*context, gt);
  model.Reset(session.active());

  ActionTrace trace;
  trace.image_id = std::move(image_id);
  const QualityReport initial =
      Evaluate(session.Render(), gt, context->catalog());
  trace.initial_recall = initial.recall;
  trace.initial_pq = initial.panoptic_quality;

  double pq = initial.panoptic_quality;
  int64_t spent = 0;
  for (int64_t step = 1;; ++step) {
    SimRng::Engine rng = SimRng::ForStep(seed, trace.image_id, step);
    const std::vector<CandidateAction> pool =
        BuildCandidatePool(session, model, gt, rng);
    const std::optional<CandidateAction> action = ChooseAction(pool);
    if (!action) {
      trace.terminal = TerminalReason::kNoImprovement;
      break;
    }
    if (spent + action->cost > budget) {
      trace.terminal = TerminalReason::kBudgetExhausted;
      break;
    }
    const int64_t cost = ExecuteAction(session, *action);
    const QualityReport report =
        Evaluate(session.Render(), gt, context->catalog());
    if (cost != action->cost || report.panoptic_quality != action->predicted_pq ||
        !(report.panoptic_quality > pq)) {
      throw std::logic_error("simulated action did not improve quality as predicted");
    }
    session.AnnotateLastAction(report.recall, report.panoptic_quality);
    spent += cost;
    pq = report.panoptic_quality;
    trace.steps.push_back(
        {session.log().back(), cost, spent, report.recall, pq});
    model.Reset(session.active());
  }
  return {std::move(trace), std::move(session)};
}

std::string TraceToText(const ActionTrace& trace, std::string_view fingerprint,
                        uint64_t seed) {
  std::string out = "# fingerprint=" + std::string(fingerprint) +
                    " seed=" + std::to_string(seed) +
                    " image=" + trace.image_id +
                    " terminal=" + std::string(TerminalReasonName(trace.terminal)) +
                    "\n";
  char line[160];
  std::snprintf(line, sizeof(line), "0,init,0,0,%.6f,%.6f\n",
                trace.initial_recall, trace.initial_pq);
  out += line;
  for (size_t i = 0; i < trace.steps.size(); ++i) {
    const TraceStep& s = trace.steps[i];
    std::snprintf(line, sizeof(line), "%zu,%s,%lld,%lld,%.6f,%.6f\n", i + 1,
                  std::string(ActionKindName(s.action.kind)).c_str(),
                  static_cast<long long>(s.cost),
                  static_cast<long long>(s.cumulative_cost), s.recall, s.pq);
    out += line;
  }
  return out;
}

}  // namespace annotkit
