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


#ifndef ANNOTKIT_SYNTH_H_
#define ANNOTKIT_SYNTH_H_

#include <cstdint>
#include <memory>
#include <vector>

#include "annotkit/engine.h"
#include "annotkit/label.h"
#include "annotkit/metrics.h"

namespace annotkit {

// Controls the synthetic proposal generator. Variants of each target are
// morphologically grown or shrunk, shifted, and occasionally mislabeled.
struct NoiseConfig {
  int32_t variants_per_target = 6;
  int32_t dilate_erode_radius_max = 2;
  double translation_jitter_std = 1.5;
  double label_noise_prob = 0.1;
  // Probability that a target gets no proposals at all.
  double miss_prob = 0.15;
  int32_t distractor_count = 10;
  int32_t max_proposals = static_cast<int32_t>(kDefaultProposalSetSize);
  // score = clamp(base_quality * IoU-with-source + Normal(0, score_noise_std)).
  double base_quality = 0.9;
  // Distractors have no source; their score centers on this value instead.
  double distractor_quality = 0.5;
  double score_noise_std = 0.1;
  // Probability that a variant starts from the convex silhouette of the
  // target instead of its visible pixels: detectors tend to predict occluded
  // objects whole. Such a variant is scored against the silhouette.
  double silhouette_prob = 1.0;

  // Throws kInvalidArgument.
  void Validate() const;
  bool operator==(const NoiseConfig&) const = default;
};

// Noisy proposals for every target of `gt`. Deterministic in `seed`. When
// `sources` is given it receives, per emitted segment, the index of the
// target it was derived from, or -1 for distractors.
ProposalSet Synthesize(const GroundTruthImage& gt, const LabelCatalog& catalog,
                       const NoiseConfig& config, uint64_t seed,
                       std::vector<int32_t>* sources = nullptr);

// The exact targets as proposals, scored by descending area.
ProposalSet OracleProposals(const GroundTruthImage& gt);

// Grows (radius > 0) or shrinks (radius < 0) a mask by a disk.
Mask Morph(const Mask& mask, int32_t radius);
// Moves a mask by whole pixels; pixels leaving the canvas are dropped.
Mask Translate(const Mask& mask, int32_t dx, int32_t dy);
// Pixels whose centers lie in the convex hull of the set pixel centers
// (always a superset of `mask`).
Mask ConvexHull(const Mask& mask);

// Random scene layout: a few stuff regions with thing instances painted on
// top. Small instances are drawn after large ones and often rest on them.
struct SceneConfig {
  Canvas canvas{128, 128};
  int32_t min_stuff = 2;
  int32_t max_stuff = 3;
  int32_t min_large_things = 2;
  int32_t max_large_things = 5;
  double large_half_min = 10.0;
  double large_half_max = 26.0;
  int32_t min_small_things = 8;
  int32_t max_small_things = 20;
  double small_half_min = 3.0;
  double small_half_max = 7.0;
  // Probability that a small instance is centered on a large one.
  double nest_prob = 0.7;
  // Visible instances smaller than this are dropped.
  int64_t min_instance_area = 30;
};

// Six thing classes followed by five stuff classes.
std::shared_ptr<const LabelCatalog> SyntheticCatalog();

GroundTruthImage GenerateScene(const LabelCatalog& catalog,
                               const SceneConfig& config, uint64_t seed);

}  // namespace annotkit

#endif  // ANNOTKIT_SYNTH_H_
