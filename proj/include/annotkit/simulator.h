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


#ifndef ANNOTKIT_SIMULATOR_H_
#define ANNOTKIT_SIMULATOR_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "annotkit/engine.h"
#include "annotkit/metrics.h"
#include "annotkit/quality_model.h"
#include "annotkit/trace.h"

namespace annotkit {

// Random stream of one simulation step. Streams of different (seed, image,
// step) triples are independent, so images can be simulated in any order.
class SimRng {
 public:
  using Engine = std::mt19937_64;

  static uint64_t StreamSeed(uint64_t seed, std::string_view image_id,
                             int64_t step);
  static Engine ForStep(uint64_t seed, std::string_view image_id,
                        int64_t step) {
    return Engine(StreamSeed(seed, image_id, step));
  }
};

// A simulated mouse click on `mask`: Gaussian around the mask's pixel
// centers, re-drawn until it lands on the mask. After kMaxClickDraws misses a
// uniformly chosen mask pixel is returned. Throws kEmptyMask.
inline constexpr int kMaxClickDraws = 100;
Point SampleClick(const Mask& mask, SimRng::Engine& rng);

// One edit the simulated annotator could make next.
struct CandidateAction {
  ActionKind kind = ActionKind::kAdd;
  // Segment id, or the ground-truth target index for adds.
  int32_t target = 0;
  std::optional<Point> point;  // add click or label-menu hover
  int32_t index = 0;           // add scroll index
  std::optional<LabelIndex> label;
  int32_t shift = 0;
  bool via_shortlist = false;
  double predicted_pq = 0.0;
  double delta = 0.0;
  int64_t cost = 0;
};

// Enumerates candidate edits for the current state and scores each by trial
// application. `model` must reflect `session.active()`.
//
// Per active segment, in depth order: its removal; the smallest depth shift
// that improves quality (-1, +1, -2, +2, ...); a relabel to the label of the
// target with the highest visible IoU. Per unmatched target, in target
// order: a sampled click, then scrolling to the first improving candidate.
std::vector<CandidateAction> BuildCandidatePool(const AnnotationSession& session,
                                                const QualityModel& model,
                                                const GroundTruthImage& gt,
                                                SimRng::Engine& rng);

// The best pool entry with a positive delta: largest delta, then lower cost,
// then kind order add < remove < change_label < change_depth, then target.
std::optional<CandidateAction> ChooseAction(
    std::span<const CandidateAction> pool);

// Applies `action` to `session`, returning its cost.
int64_t ExecuteAction(AnnotationSession& session,
                      const CandidateAction& action);

struct SimulationResult {
  ActionTrace trace;
  AnnotationSession session;
};

// Runs the greedy annotator on one image until no edit improves panoptic
// quality or the next edit would exceed `budget` micro-actions. Throws
// kInvalidArgument for a negative budget and kCanvasMismatch.
SimulationResult SimulateImage(std::shared_ptr<const SessionContext> context,
                               const GroundTruthImage& gt,
                               const SessionConfig& config, int64_t budget,
                               uint64_t seed, std::string image_id);

// Line-oriented trace export: a "# ..." preamble, a step-0 record for the
// initial state, then "step,kind,cost,cum_cost,recall,pq" per action.
std::string TraceToText(const ActionTrace& trace, std::string_view fingerprint,
                        uint64_t seed);

}  // namespace annotkit

#endif  // ANNOTKIT_SIMULATOR_H_
