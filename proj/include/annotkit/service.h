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


// HTTP service that hosts annotation sessions for human annotators and
// scripted clients.
//
// SessionManager owns the sessions and is usable without any network layer.
// HttpService exposes it as a JSON API:
//
//   POST /sessions                      {image_id, config} -> 201 summary
//   GET  /sessions/{id}                 -> summary
//   GET  /sessions/{id}/candidates?x&y  -> ordered candidates
//   POST /sessions/{id}/actions         {kind, params, expected_action_count}
//   GET  /sessions/{id}/render          -> label maps and render hash
//   GET  /sessions/{id}/metrics         -> quality report (409 without GT)
//   GET  /images/{id}                   -> display PNG
//   GET  /catalog                       -> label catalog

#ifndef ANNOTKIT_SERVICE_H_
#define ANNOTKIT_SERVICE_H_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "annotkit/dataset_io.h"
#include "annotkit/engine.h"
#include "annotkit/error.h"
#include "annotkit/metrics.h"
#include "annotkit/rendering.h"

namespace annotkit {

// One user action as received over the wire.
struct ActionRequest {
  ActionKind kind = ActionKind::kAdd;
  std::optional<Point> point;  // add click, or label-menu hover
  int32_t chosen_index = 0;
  std::optional<SegmentId> segment;
  std::optional<LabelIndex> label;
  bool via_shortlist = false;
  int32_t shift = 0;
  // When set, the action is rejected with kConflict unless the session log
  // has exactly this many records; lets clients detect interleaved edits.
  std::optional<int64_t> expected_action_count;
};

struct ActionOutcome {
  int64_t cost = 0;
  // An add click that hit no segment. The click is still charged and logged.
  bool failed = false;
  std::optional<ActionRecord> record;  // absent for hide
  MicroActionLedger ledger;
  int64_t action_count = 0;
  double duration_seconds = 0.0;
};

struct SessionSnapshot {
  std::string session_id;
  std::string image_id;
  SessionConfig config;
  ActiveSet active;
  MicroActionLedger ledger;
  int64_t action_count = 0;
  uint64_t render_hash = 0;
  std::optional<QualityReport> quality;  // when ground truth is attached
  int64_t created_unix_ms = 0;
  int64_t last_action_unix_ms = 0;
  // Wall-clock time between consecutive requests, one per logged action.
  std::vector<double> durations_seconds;
};

// Thread-safe registry of sessions. Actions within one session are strictly
// serialized; different sessions proceed concurrently. With a persistence
// directory, every mutation is written through before it is acknowledged.
class SessionManager {
 public:
  SessionManager(std::shared_ptr<const DatasetManifest> dataset,
                 std::optional<std::filesystem::path> persist_dir);

  const DatasetManifest& dataset() const { return *dataset_; }

  // Reloads persisted sessions by replaying their logs. Returns the number of
  // sessions restored. Throws kConflict when a log does not reproduce the
  // stored state.
  size_t Recover();

  // Errors: kNotFound (unknown image, or no proposals), kInvalidArgument.
  SessionSnapshot Create(const std::string& image_id,
                         const SessionConfig& config);
  // The following throw kNotFound for unknown sessions.
  SessionSnapshot Snapshot(const std::string& session_id) const;
  CandidateList Candidates(const std::string& session_id, Point p) const;
  ActionOutcome Apply(const std::string& session_id,
                      const ActionRequest& request);
  Rendering Render(const std::string& session_id) const;
  // Throws kConflict when the image has no ground truth.
  QualityReport Metrics(const std::string& session_id) const;
  AnnotationFile Export(const std::string& session_id) const;

  std::shared_ptr<const SessionContext> ContextOf(
      const std::string& session_id) const;

 private:
  struct Record {
    std::string id;
    const ImageEntry* image = nullptr;
    std::unique_ptr<AnnotationSession> session;
    int64_t created_unix_ms = 0;
    int64_t last_action_unix_ms = 0;
    std::chrono::steady_clock::time_point last_request;
    std::vector<double> durations_seconds;
    mutable std::mutex mutex;
  };

  std::shared_ptr<Record> Find(const std::string& session_id) const;
  std::shared_ptr<const SessionContext> ContextFor(const ImageEntry& image);
  SessionSnapshot SnapshotLocked(const Record& record) const;
  bool HasGroundTruth(const ImageEntry& image) const;
  void Persist(const Record& record) const;

  std::shared_ptr<const DatasetManifest> dataset_;
  std::optional<std::filesystem::path> persist_dir_;
  mutable std::shared_mutex mutex_;  // guards sessions_, contexts_, next_id_
  std::map<std::string, std::shared_ptr<Record>> sessions_;
  std::map<std::string, std::shared_ptr<const SessionContext>> contexts_;
  int64_t next_id_ = 1;
};

// HTTP status code reported for an Error raised while serving a request.
int HttpStatusFor(ErrorCode code);

class HttpService {
 public:
  // Display images are resolved relative to `display_root`.
  HttpService(std::shared_ptr<SessionManager> sessions,
              std::filesystem::path display_root);
  ~HttpService();

  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  // Binds and serves until Stop(); returns false when the address is
  // unavailable.
  bool Listen(const std::string& host, int port);
  // Binds to a free port and returns it, or -1. Serve with ListenAfterBind.
  int BindToAnyPort(const std::string& host);
  bool ListenAfterBind();
  void Stop();
  bool IsRunning() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace annotkit

#endif  // ANNOTKIT_SERVICE_H_
