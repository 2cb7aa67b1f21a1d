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


// Persistence of datasets and experiment artifacts. All formats are single
// UTF-8 JSON documents with masks in the "WxH:runs" text form.

#ifndef ANNOTKIT_DATASET_IO_H_
#define ANNOTKIT_DATASET_IO_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "annotkit/engine.h"
#include "annotkit/label.h"
#include "annotkit/metrics.h"
#include "annotkit/synth.h"

namespace annotkit {

struct ImageEntry {
  std::string id;
  // Relative path of a PNG shown by the UI; simulator-only datasets omit it.
  std::optional<std::string> display;
  GroundTruthImage gt;
  // Machine proposals, present once a dataset went through `synth` or an
  // external detector.
  std::optional<ProposalSet> proposals;

  const Canvas& canvas() const { return gt.canvas(); }
};

struct DatasetManifest {
  std::shared_ptr<const LabelCatalog> catalog;
  std::vector<ImageEntry> images;

  // Returns nullptr for unknown ids.
  const ImageEntry* Find(std::string_view image_id) const;
};

// Parses and fully validates a manifest. Every failure carries the location
// of the offending element. Errors: kSchema (malformed document or duplicate
// image ids), kUnknownLabel, kCorruptMask, kCanvasMismatch, kEmptyMask and
// kInvalidArgument (overlapping ground truth, bad proposals).
DatasetManifest ParseManifest(std::string_view text);
// As ParseManifest; kIo when the file cannot be read.
DatasetManifest LoadManifest(const std::filesystem::path& path);
std::string ManifestToJson(const DatasetManifest& manifest);
void SaveManifest(const DatasetManifest& manifest,
                  const std::filesystem::path& path);

// Session context for one image. Throws kNotFound when the image carries no
// proposals.
std::shared_ptr<const SessionContext> MakeSessionContext(
    const DatasetManifest& manifest, const ImageEntry& image);

inline constexpr int kAnnotationVersion = 1;

// The persisted state of one annotation session.
struct AnnotationFile {
  std::string image_id;
  std::optional<SessionConfig> config;
  ActiveSet active;  // front to back
  MicroActionLedger ledger;
  std::vector<ActionRecord> log;

  bool operator==(const AnnotationFile&) const = default;
};

AnnotationFile AnnotationFromSession(const AnnotationSession& session,
                                     std::string image_id);
// Labels are written by catalog id.
std::string AnnotationToJson(const AnnotationFile& annotation,
                             const LabelCatalog& catalog);
// Errors: kVersion for any version other than the current one, kSchema,
// kUnknownLabel.
AnnotationFile ParseAnnotation(std::string_view text,
                               const LabelCatalog& catalog);
void SaveAnnotation(const AnnotationFile& annotation,
                    const LabelCatalog& catalog,
                    const std::filesystem::path& path);
AnnotationFile LoadAnnotation(const std::filesystem::path& path,
                              const LabelCatalog& catalog);

// Rebuilds the session directly from the stored state.
AnnotationSession RestoreSession(std::shared_ptr<const SessionContext> context,
                                 const AnnotationFile& annotation);
// Rebuilds the session by re-executing the stored log on a fresh session;
// throws kConflict when the log does not reproduce itself.
AnnotationSession ReplaySession(std::shared_ptr<const SessionContext> context,
                                const AnnotationFile& annotation);

struct DatasetSplit {
  std::vector<std::string> exploration;
  std::vector<std::string> holdout;
};

// Random split into an exploration set of `exploration_count` images and a
// hold-out set with the rest, each in manifest order. Depends only on the
// seed and the image ids. Throws kInvalidArgument when the count is too large.
DatasetSplit Split(const DatasetManifest& manifest, size_t exploration_count,
                   uint64_t seed);

// Everything that determines a simulation run.
struct RunConfig {
  SessionConfig session;
  NoiseConfig noise;
  int64_t budget = 400;
  uint64_t seed = 42;
  std::optional<int64_t> exploration_count;
  std::optional<int64_t> holdout_count;

  // Throws kInvalidArgument.
  void Validate() const;
  bool operator==(const RunConfig&) const = default;
};

std::string RunConfigToJson(const RunConfig& config);
// Missing fields take their defaults. Errors: kSchema, kInvalidArgument.
RunConfig ParseRunConfig(std::string_view text);

// Stable text forms of the nested configs, also used for fingerprints.
std::string SessionConfigToJson(const SessionConfig& config);
SessionConfig ParseSessionConfig(std::string_view text);
std::string NoiseConfigToJson(const NoiseConfig& config);
std::string LedgerToJson(const MicroActionLedger& ledger);
std::string ActionRecordToJson(const ActionRecord& record,
                               const LabelCatalog& catalog);

std::string ReadFile(const std::filesystem::path& path);
// Writes through a temporary file and a rename so readers never observe a
// partial document.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view data);

}  // namespace annotkit

#endif  // ANNOTKIT_DATASET_IO_H_
