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

#ifndef ANNOTKIT_ENGINE_H_
#define ANNOTKIT_ENGINE_H_

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "annotkit/label.h"
#include "annotkit/mask.h"
#include "annotkit/rendering.h"
#include "annotkit/strong_id.h"

namespace annotkit {

struct Segment {
  SegmentId id;
  Mask mask;
  LabelIndex label;
  double score = 0.0;
};

inline constexpr size_t kDefaultProposalSetSize = 1000;

// Machine-generated candidate segments for one image. Immutable.
class ProposalSet {
 public:
  // Throws on duplicate ids, empty masks, scores outside [0, 1] and masks on
  // a different canvas.
  ProposalSet(Canvas canvas, std::vector<Segment> segments);

  const Canvas& canvas() const { return canvas_; }
  const std::vector<Segment>& segments() const { return segments_; }
  size_t size() const { return segments_.size(); }
  bool empty() const { return segments_.empty(); }

  std::optional<size_t> PositionOf(SegmentId id) const;
  // Throws kUnknownSegment.
  const Segment& at(SegmentId id) const;

 private:
  Canvas canvas_;
  std::vector<Segment> segments_;
  std::unordered_map<SegmentId, size_t> positions_;
};

enum class InitMode { kAuto, kEmpty };
enum class Ordering { kByScore, kByDistance };

struct SessionConfig {
  std::optional<double> nms_threshold;  // disabled when absent
  Ordering ordering = Ordering::kByScore;
  std::optional<int32_t> top_n;  // unlimited when absent
  InitMode init_mode = InitMode::kAuto;

  // Throws kInvalidArgument.
  void Validate() const;
  // e.g. "init-auto+nms0.5+sortdistance-top4".
  std::string SettingName() const;

  bool operator==(const SessionConfig&) const = default;
};

struct ActiveEntry {
  SegmentId segment_id;
  LabelIndex label;

  bool operator==(const ActiveEntry&) const = default;
};

// Front (index 0) to back.
using ActiveSet = std::vector<ActiveEntry>;

enum class ActionKind { kAdd, kRemove, kChangeLabel, kChangeDepth, kHide };
inline constexpr int kActionKindCount = 5;
std::string_view ActionKindName(ActionKind kind);
// Throws kInvalidArgument.
ActionKind ParseActionKind(std::string_view name);

enum class MicroAction { kClick, kScroll, kKeypress, kMenuSelect };
inline constexpr int kMicroActionCount = 4;
std::string_view MicroActionName(MicroAction micro);

// Micro-action cost table.
inline constexpr int64_t kAddBaseCost = 2;  // click + confirm click
inline constexpr int64_t kRemoveCost = 1;
inline constexpr int64_t kShortlistLabelCost = 2;
inline constexpr int64_t kManualLabelCost = 3;
inline constexpr int64_t kFailedClickCost = 1;
inline constexpr int64_t kHideCost = 0;
inline int64_t AddCost(int32_t scroll_index) {
  return kAddBaseCost + scroll_index;
}

class MicroActionLedger {
 public:
  int64_t total() const { return total_; }
  int64_t count(ActionKind kind, MicroAction micro) const {
    return counts_[static_cast<int>(kind)][static_cast<int>(micro)];
  }
  // Completed edit actions of `kind` (failed clicks are not actions).
  int64_t actions(ActionKind kind) const {
    return actions_[static_cast<int>(kind)];
  }
  int64_t cost_of(ActionKind kind) const;

  void Record(ActionKind kind, MicroAction micro, int64_t n);
  void CountAction(ActionKind kind) { ++actions_[static_cast<int>(kind)]; }

  bool operator==(const MicroActionLedger&) const = default;

 private:
  std::array<std::array<int64_t, kMicroActionCount>, kActionKindCount>
      counts_{};
  std::array<int64_t, kActionKindCount> actions_{};
  int64_t total_ = 0;
};

struct CandidateList {
  Point anchor;
  std::vector<SegmentId> segments;
};

// One entry of the append-only session log. Holds everything needed to
// re-execute the action against a fresh session.
struct ActionRecord {
  ActionKind kind = ActionKind::kAdd;
  std::optional<Point> point;
  std::optional<SegmentId> segment;  // target, or the segment an add inserted
  std::optional<LabelIndex> label;
  int32_t index = 0;  // chosen candidate index of an add
  int32_t shift = 0;  // requested depth shift
  bool via_shortlist = false;
  bool failed = false;  // add click without candidates
  int64_t cost = 0;
  std::optional<double> recall;
  std::optional<double> pq;

  bool operator==(const ActionRecord&) const = default;
};

// Proposals plus the per-segment data cached at session start.
class SessionContext {
 public:
  // Throws kUnknownLabel if a proposal label is outside the catalog.
  SessionContext(ProposalSet proposals,
                 std::shared_ptr<const LabelCatalog> catalog);

  const ProposalSet& proposals() const { return proposals_; }
  const LabelCatalog& catalog() const { return *catalog_; }
  const std::shared_ptr<const LabelCatalog>& shared_catalog() const {
    return catalog_;
  }
  const SpatialMoments& moments(size_t position) const {
    return moments_[position];
  }

 private:
  ProposalSet proposals_;
  std::shared_ptr<const LabelCatalog> catalog_;
  std::vector<SpatialMoments> moments_;
};

// Greedy coverage initialization: segments in descending score (ties by id)
// are appended while they own at least one uncovered pixel. Earlier appends
// are in front.
ActiveSet AutoInitialize(const ProposalSet& proposals);

// The annotation state machine for one image. Actions are applied serially;
// const members are safe to call concurrently on a shared snapshot.
class AnnotationSession {
 public:
  AnnotationSession(std::shared_ptr<const SessionContext> context,
                    SessionConfig config);

  // Rebuilds a session from persisted parts. Throws kUnknownSegment,
  // kUnknownLabel or kInvalidArgument when they are inconsistent.
  static AnnotationSession Restore(std::shared_ptr<const SessionContext> context,
                                   SessionConfig config, ActiveSet active,
                                   MicroActionLedger ledger,
                                   std::vector<ActionRecord> log);

  const SessionContext& context() const { return *context_; }
  const std::shared_ptr<const SessionContext>& shared_context() const {
    return context_;
  }
  const SessionConfig& config() const { return config_; }
  const ActiveSet& active() const { return active_; }
  const MicroActionLedger& ledger() const { return ledger_; }
  const std::vector<ActionRecord>& log() const { return log_; }
  const Canvas& canvas() const { return context_->proposals().canvas(); }

  bool IsActive(SegmentId id) const;
  std::optional<size_t> DepthOf(SegmentId id) const;

  // Valid segments at `p` after NMS, ordering and top-N truncation.
  // Throws kOutOfBounds.
  CandidateList CandidatesAt(Point p) const;
  // Labels of every proposal containing `p`, by best score. Throws
  // kOutOfBounds.
  std::vector<LabelIndex> LabelShortlist(Point p) const;

  // Each Apply* returns the micro-action cost it added to the ledger.
  //
  // An add click with no candidates costs one click and then throws
  // kNoCandidates.
  int64_t ApplyAdd(Point p, int32_t chosen_index);
  int64_t ApplyRemove(SegmentId id);
  // When `hover` is given with `via_shortlist`, the label must be in the
  // shortlist at `hover`.
  int64_t ApplyChangeLabel(SegmentId id, LabelIndex label, bool via_shortlist,
                           std::optional<Point> hover = std::nullopt);
  int64_t ApplyChangeDepth(SegmentId id, int32_t shift);
  // Hiding the overlay is a view toggle and never touches the state.
  int64_t Hide() const { return kHideCost; }

  // Re-executes a logged action. Throws kConflict if the outcome differs from
  // the record.
  int64_t Replay(const ActionRecord& record);

  // Attaches measured quality to the newest log record.
  void AnnotateLastAction(double recall, double pq);

  Rendering Render() const;

 private:
  size_t RequireActive(SegmentId id) const;
  void CheckOnCanvas(Point p) const;

  std::shared_ptr<const SessionContext> context_;
  SessionConfig config_;
  ActiveSet active_;
  std::vector<uint8_t> active_flags_;  // by proposal position
  MicroActionLedger ledger_;
  std::vector<ActionRecord> log_;
};

}  // namespace annotkit

#endif  // ANNOTKIT_ENGINE_H_
