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


// Batch experiments: simulated annotation runs over a dataset, ablation
// sweeps, evaluation of stored annotations, and synthetic datasets.

#ifndef ANNOTKIT_EXPERIMENT_H_
#define ANNOTKIT_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "annotkit/dataset_io.h"
#include "annotkit/engine.h"
#include "annotkit/metrics.h"
#include "annotkit/synth.h"
#include "annotkit/trace.h"

namespace annotkit {

// Inverse of SessionConfig::SettingName, e.g. "init-empty+nms0.5+sortscore-top1".
// Throws kInvalidArgument.
SessionConfig ParseSettingName(std::string_view name);

// The cross product of the ablation axes.
struct SweepGrid {
  std::vector<InitMode> init_modes{InitMode::kAuto};
  std::vector<std::optional<double>> nms_thresholds{std::nullopt};
  std::vector<Ordering> orderings{Ordering::kByScore};
  std::vector<std::optional<int32_t>> top_ns{std::nullopt};

  // Throws kInvalidArgument for empty axes, invalid values or settings that
  // collide on their name.
  std::vector<SessionConfig> Expand() const;
};

// Parses comma-separated axis values, e.g. "none,0.1,0.5". Throws
// kInvalidArgument.
std::vector<InitMode> ParseInitList(std::string_view text);
std::vector<std::optional<double>> ParseNmsList(std::string_view text);
std::vector<Ordering> ParseOrderingList(std::string_view text);
std::vector<std::optional<int32_t>> ParseTopNList(std::string_view text);

// Budgets 0, 1, ..., max_budget.
std::vector<int64_t> BudgetGrid(int64_t max_budget);

// Simulates every image of the manifest that has proposals, on `jobs`
// threads. Results are in manifest order regardless of scheduling. When
// `annotations` is given it receives the final state of every session.
// Throws kEmptyInput when no image has proposals.
std::vector<ActionTrace> RunSetting(
    const DatasetManifest& manifest, const SessionConfig& config,
    int64_t budget, uint64_t seed, int jobs,
    std::vector<AnnotationFile>* annotations = nullptr);

// File-system friendly form of an image id.
std::string SafeFileName(std::string_view id);

// Stable digest of the dataset content.
std::string DatasetDigest(const DatasetManifest& manifest);

// Hex digest of everything that determines a run's output, including the
// micro-action cost table.
std::string RunFingerprint(const SessionConfig& config, int64_t budget,
                           uint64_t seed, std::string_view dataset_digest);

// Writes <out>/<setting>.csv (the cost curve), <out>/<setting>.meta.json
// and one trace per image under <out>/<setting>/. Returns the curve.
CostCurve WriteSettingOutputs(const std::filesystem::path& out,
                              const SessionConfig& config, int64_t budget,
                              uint64_t seed, std::string_view dataset_digest,
                              const std::vector<ActionTrace>& traces);

// One named collection of annotation files, e.g. one annotation method.
struct AnnotationSet {
  std::string name;
  std::vector<AnnotationFile> files;
};

struct SetEvaluation {
  std::string name;
  std::vector<std::string> image_ids;
  std::vector<QualityReport> reports;  // parallel to image_ids
  double mean_recall = 0.0;
  double mean_pq = 0.0;
};

struct EvaluationResult {
  std::vector<SetEvaluation> sets;
  // Images annotated by every set; the agreement matrix averages over them.
  std::vector<std::string> common_images;
  // Mean pixel-wise label agreement between sets; symmetric, unit diagonal.
  std::vector<std::vector<double>> agreement;
};

// Errors: kEmptyInput without sets or common images, kNotFound for unknown
// images or images without proposals, kSchema for duplicate images in a set,
// and the engine's restore errors for inconsistent files.
EvaluationResult EvaluateAnnotations(const DatasetManifest& manifest,
                                     const std::vector<AnnotationSet>& sets);
std::string EvaluationToJson(const EvaluationResult& result);
std::string AgreementCsv(const EvaluationResult& result);

// A manifest of `count` generated scenes named img0, img1, ...; scene i uses
// DeriveSeed(seed, "scene/img<i>").
DatasetManifest GenerateDataset(int32_t count, const SceneConfig& scene,
                                uint64_t seed);
// Replaces the proposals of every image by synthetic ones; image `id` uses
// DeriveSeed(seed, "proposals/<id>").
void AttachProposals(DatasetManifest& manifest, const NoiseConfig& noise,
                     uint64_t seed);

}  // namespace annotkit

#endif  // ANNOTKIT_EXPERIMENT_H_
