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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "annotkit/error.h"

namespace annotkit {
namespace {

std::string FormatThreshold(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

// Score descending, id ascending.
bool ScoreOrder(const Segment& a, const Segment& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.id < b.id;
}

}  // namespace

ProposalSet::ProposalSet(Canvas canvas, std::vector<Segment> segments)
    : canvas_(canvas), segments_(std::move(segments)) {
  canvas_.Validate();
  for (size_t i = 0; i < segments_.size(); ++i) {
    const Segment& s = segments_[i];
    if (!(s.mask.canvas() == canvas_)) {
      throw Error(ErrorCode::kCanvasMismatch,
                  "proposal " + std::to_string(s.id.value()) +
                      " is on a different canvas");
    }
    if (s.mask.empty()) {
      throw Error(ErrorCode::kEmptyMask,
                  "proposal " + std::to_string(s.id.value()) + " is empty");
    }
    if (!(s.score >= 0.0 && s.score <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "proposal " + std::to_string(s.id.value()) +
                      " score outside [0, 1]");
    }
    if (!positions_.emplace(s.id, i).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate proposal id " + std::to_string(s.id.value()));
    }
  }
}

std::optional<size_t> ProposalSet::PositionOf(SegmentId id) const {
  const auto it = positions_.find(id);
  if (it == positions_.end()) return std::nullopt;
  return it->second;
}

const Segment& ProposalSet::at(SegmentId id) const {
  const auto pos = PositionOf(id);
  if (!pos) {
    throw Error(ErrorCode::kUnknownSegment,
                "no proposal with id " + std::to_string(id.value()));
  }
  return segments_[*pos];
}

void SessionConfig::Validate() const {
  if (nms_threshold &&
      !(*nms_threshold > 0.0 && *nms_threshold < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "nms_threshold must lie in (0, 1)");
  }
  if (top_n && *top_n < 1) {
    throw Error(ErrorCode::kInvalidArgument, "top_n must be positive");
  }
}

std::string SessionConfig::SettingName() const {
  std::string name = init_mode == InitMode::kAuto ? "init-auto" : "init-empty";
  if (nms_threshold) name += "+nms" + FormatThreshold(*nms_threshold);
  if (ordering == Ordering::kByDistance || top_n) {
    name += ordering == Ordering::kByDistance ? "+sortdistance" : "+sortscore";
  }
  if (top_n) name += "-top" + std::to_string(*top_n);
  return name;
}

std::string_view ActionKindName(ActionKind kind) {
  switch (kind) {
    case ActionKind::kAdd: return "add";
    case ActionKind::kRemove: return "remove";
    case ActionKind::kChangeLabel: return "change_label";
    case ActionKind::kChangeDepth: return "change_depth";
    case ActionKind::kHide: return "hide";
  }
  return "unknown";
}

ActionKind ParseActionKind(std::string_view name) {
  for (int k = 0; k < kActionKindCount; ++k) {
    const auto kind = static_cast<ActionKind>(k);
    if (ActionKindName(kind) == name) return kind;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown action kind '" + std::string(name) + "'");
}

std::string_view MicroActionName(MicroAction micro) {
  switch (micro) {
    case MicroAction::kClick: return "click";
    case MicroAction::kScroll: return "scroll";
    case MicroAction::kKeypress: return "keypress";
    case MicroAction::kMenuSelect: return "menu_select";
  }
  return "unknown";
}

int64_t MicroActionLedger::cost_of(ActionKind kind) const {
  const auto& row = counts_[static_cast<int>(kind)];
  return std::accumulate(row.begin(), row.end(), int64_t{0});
}

void MicroActionLedger::Record(ActionKind kind, MicroAction micro, int64_t n) {
  if (n < 0) {
    throw Error(ErrorCode::kInvalidArgument, "negative micro-action count");
  }
  counts_[static_cast<int>(kind)][static_cast<int>(micro)] += n;
  total_ += n;
}

SessionContext::SessionContext(ProposalSet proposals,
                               std::shared_ptr<const LabelCatalog> catalog)
    : proposals_(std::move(proposals)), catalog_(std::move(catalog)) {
  if (!catalog_) throw Error(ErrorCode::kInvalidArgument, "null catalog");
  moments_.reserve(proposals_.size());
  for (const Segment& s : proposals_.segments()) {
    if (!catalog_->contains(s.label)) {
      throw Error(ErrorCode::kUnknownLabel,
                  "proposal " + std::to_string(s.id.value()) +
                      " has a label outside the catalog");
    }
    moments_.push_back(Moments(s.mask));
  }
}

ActiveSet AutoInitialize(const ProposalSet& proposals) {
  std::vector<const Segment*> order;
  order.reserve(proposals.size());
  for (const Segment& s : proposals.segments()) order.push_back(&s);
  std::sort(order.begin(), order.end(),
            [](const Segment* a, const Segment* b) { return ScoreOrder(*a, *b); });

  std::vector<uint8_t> covered(static_cast<size_t>(proposals.canvas().area()), 0);
  ActiveSet active;
  for (const Segment* s : order) {
    bool owns_pixel = false;
    ForEachForegroundRun(s->mask, [&](int64_t start, int64_t length) {
      if (owns_pixel) return;
      owns_pixel = std::any_of(covered.begin() + start,
                               covered.begin() + start + length,
                               [](uint8_t c) { return c == 0; });
    });
    if (!owns_pixel) continue;
    ForEachForegroundRun(s->mask, [&](int64_t start, int64_t length) {
      std::fill_n(covered.begin() + start, length, uint8_t{1});
    });
    active.push_back({s->id, s->label});
  }
  return active;
}

AnnotationSession::AnnotationSession(
    std::shared_ptr<const SessionContext> context, SessionConfig config)
    : context_(std::move(context)), config_(config) {
  if (!context_) throw Error(ErrorCode::kInvalidArgument, "null context");
  config_.Validate();
  active_flags_.assign(context_->proposals().size(), 0);
  if (config_.init_mode == InitMode::kAuto) {
    active_ = AutoInitialize(context_->proposals());
    for (const ActiveEntry& e : active_) {
      active_flags_[*context_->proposals().PositionOf(e.segment_id)] = 1;
    }
  }
}

AnnotationSession AnnotationSession::Restore(
    std::shared_ptr<const SessionContext> context, SessionConfig config,
    ActiveSet active, MicroActionLedger ledger, std::vector<ActionRecord> log) {
  SessionConfig empty_config = config;
  empty_config.init_mode = InitMode::kEmpty;
  AnnotationSession session(std::move(context), empty_config);
  session.config_ = config;
  const ProposalSet& proposals = session.context_->proposals();
  for (const ActiveEntry& e : active) {
    const auto pos = proposals.PositionOf(e.segment_id);
    if (!pos) {
      throw Error(ErrorCode::kUnknownSegment,
                  "active segment " + std::to_string(e.segment_id.value()) +
                      " is not a proposal");
    }
    if (session.active_flags_[*pos]) {
      throw Error(ErrorCode::kInvalidArgument,
                  "segment " + std::to_string(e.segment_id.value()) +
                      " is active twice");
    }
    session.context_->catalog().at(e.label);
    session.active_flags_[*pos] = 1;
  }
  session.active_ = std::move(active);
  session.ledger_ = ledger;
  session.log_ = std::move(log);
  return session;
}

bool AnnotationSession::IsActive(SegmentId id) const {
  const auto pos = context_->proposals().PositionOf(id);
  return pos && active_flags_[*pos];
}

std::optional<size_t> AnnotationSession::DepthOf(SegmentId id) const {
  for (size_t i = 0; i < active_.size(); ++i) {
    if (active_[i].segment_id == id) return i;
  }
  return std::nullopt;
}

size_t AnnotationSession::RequireActive(SegmentId id) const {
  if (const auto depth = DepthOf(id)) return *depth;
  throw Error(ErrorCode::kUnknownSegment,
              "segment " + std::to_string(id.value()) + " is not active");
}

void AnnotationSession::CheckOnCanvas(Point p) const {
  const Canvas& c = canvas();
  if (!(p.x >= 0.0 && p.x < c.width && p.y >= 0.0 && p.y < c.height)) {
    throw Error(ErrorCode::kOutOfBounds,
                "point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                    ") outside canvas");
  }
}

CandidateList AnnotationSession::CandidatesAt(Point p) const {
  CheckOnCanvas(p);
  const auto& segments = context_->proposals().segments();
  std::vector<size_t> valid;
  for (size_t i = 0; i < segments.size(); ++i) {
    if (!active_flags_[i] && Contains(segments[i].mask, p)) valid.push_back(i);
  }
  auto by_score = [&](size_t a, size_t b) {
    return ScoreOrder(segments[a], segments[b]);
  };
  std::sort(valid.begin(), valid.end(), by_score);

  if (config_.nms_threshold) {
    // Class-agnostic greedy suppression against already kept segments.
    std::vector<size_t> kept;
    for (size_t i : valid) {
      const bool suppressed =
          std::any_of(kept.begin(), kept.end(), [&](size_t k) {
            return Iou(segments[i].mask, segments[k].mask) >
                   *config_.nms_threshold;
          });
      if (!suppressed) kept.push_back(i);
    }
    valid = std::move(kept);
  }

  if (config_.ordering == Ordering::kByDistance) {
    std::vector<std::pair<double, size_t>> keyed;
    keyed.reserve(valid.size());
    for (size_t i : valid) {
      keyed.emplace_back(Mahalanobis(p, context_->moments(i)), i);
    }
    std::sort(keyed.begin(), keyed.end(), [&](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first < b.first;
      return segments[a.second].id < segments[b.second].id;
    });
    for (size_t k = 0; k < keyed.size(); ++k) valid[k] = keyed[k].second;
  }

  if (config_.top_n && valid.size() > static_cast<size_t>(*config_.top_n)) {
    valid.resize(static_cast<size_t>(*config_.top_n));
  }

  CandidateList out{p, {}};
  out.segments.reserve(valid.size());
  for (size_t i : valid) out.segments.push_back(segments[i].id);
  return out;
}

std::vector<LabelIndex> AnnotationSession::LabelShortlist(Point p) const {
  CheckOnCanvas(p);
  std::unordered_map<LabelIndex, double> best;
  for (const Segment& s : context_->proposals().segments()) {
    if (!Contains(s.mask, p)) continue;
    auto [it, inserted] = best.emplace(s.label, s.score);
    if (!inserted) it->second = std::max(it->second, s.score);
  }
  std::vector<std::pair<LabelIndex, double>> ranked(best.begin(), best.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<LabelIndex> out;
  out.reserve(ranked.size());
  for (const auto& [label, score] : ranked) out.push_back(label);
  return out;
}

int64_t AnnotationSession::ApplyAdd(Point p, int32_t chosen_index) {
  const CandidateList candidates = CandidatesAt(p);
  if (candidates.segments.empty()) {
    ledger_.Record(ActionKind::kAdd, MicroAction::kClick, kFailedClickCost);
    ActionRecord record;
    record.kind = ActionKind::kAdd;
    record.point = p;
    record.index = chosen_index;
    record.failed = true;
    record.cost = kFailedClickCost;
    log_.push_back(record);
    throw Error(ErrorCode::kNoCandidates,
                "no segment contains (" + std::to_string(p.x) + ", " +
                    std::to_string(p.y) + ")");
  }
  if (chosen_index < 0 ||
      static_cast<size_t>(chosen_index) >= candidates.segments.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "candidate index " + std::to_string(chosen_index) +
                    " outside list of " +
                    std::to_string(candidates.segments.size()));
  }
  const SegmentId id = candidates.segments[static_cast<size_t>(chosen_index)];
  const auto pos = *context_->proposals().PositionOf(id);
  const Segment& segment = context_->proposals().segments()[pos];
  active_.insert(active_.begin(), ActiveEntry{id, segment.label});
  active_flags_[pos] = 1;

  const int64_t cost = AddCost(chosen_index);
  ledger_.Record(ActionKind::kAdd, MicroAction::kClick, kAddBaseCost);
  ledger_.Record(ActionKind::kAdd, MicroAction::kScroll, chosen_index);
  ledger_.CountAction(ActionKind::kAdd);

  ActionRecord record;
  record.kind = ActionKind::kAdd;
  record.point = p;
  record.segment = id;
  record.index = chosen_index;
  record.cost = cost;
  log_.push_back(record);
  return cost;
}

int64_t AnnotationSession::ApplyRemove(SegmentId id) {
  const size_t depth = RequireActive(id);
  active_.erase(active_.begin() + static_cast<std::ptrdiff_t>(depth));
  active_flags_[*context_->proposals().PositionOf(id)] = 0;
  ledger_.Record(ActionKind::kRemove, MicroAction::kClick, kRemoveCost);
  ledger_.CountAction(ActionKind::kRemove);

  ActionRecord record;
  record.kind = ActionKind::kRemove;
  record.segment = id;
  record.cost = kRemoveCost;
  log_.push_back(record);
  return kRemoveCost;
}

int64_t AnnotationSession::ApplyChangeLabel(SegmentId id, LabelIndex label,
                                            bool via_shortlist,
                                            std::optional<Point> hover) {
  const size_t depth = RequireActive(id);
  context_->catalog().at(label);
  if (via_shortlist && hover) {
    const auto shortlist = LabelShortlist(*hover);
    if (std::find(shortlist.begin(), shortlist.end(), label) ==
        shortlist.end()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "label '" + context_->catalog().at(label).id +
                      "' is not in the shortlist at the hover point");
    }
  }
  active_[depth].label = label;
  ledger_.Record(ActionKind::kChangeLabel, MicroAction::kKeypress,
                 via_shortlist ? 1 : 2);
  ledger_.Record(ActionKind::kChangeLabel, MicroAction::kMenuSelect, 1);
  ledger_.CountAction(ActionKind::kChangeLabel);

  const int64_t cost = via_shortlist ? kShortlistLabelCost : kManualLabelCost;
  ActionRecord record;
  record.kind = ActionKind::kChangeLabel;
  record.point = hover;
  record.segment = id;
  record.label = label;
  record.via_shortlist = via_shortlist;
  record.cost = cost;
  log_.push_back(record);
  return cost;
}

int64_t AnnotationSession::ApplyChangeDepth(SegmentId id, int32_t shift) {
  if (shift == 0) {
    throw Error(ErrorCode::kInvalidArgument, "depth shift must be non-zero");
  }
  const size_t depth = RequireActive(id);
  const int64_t last = static_cast<int64_t>(active_.size()) - 1;
  const int64_t target =
      std::clamp<int64_t>(static_cast<int64_t>(depth) + shift, 0, last);
  const ActiveEntry entry = active_[depth];
  active_.erase(active_.begin() + static_cast<std::ptrdiff_t>(depth));
  active_.insert(active_.begin() + static_cast<std::ptrdiff_t>(target), entry);

  const int64_t cost = std::abs(target - static_cast<int64_t>(depth));
  ledger_.Record(ActionKind::kChangeDepth, MicroAction::kScroll, cost);
  ledger_.CountAction(ActionKind::kChangeDepth);

  ActionRecord record;
  record.kind = ActionKind::kChangeDepth;
  record.segment = id;
  record.shift = shift;
  record.cost = cost;
  log_.push_back(record);
  return cost;
}

int64_t AnnotationSession::Replay(const ActionRecord& record) {
  auto require = [](bool ok, std::string_view what) {
    if (!ok) {
      throw Error(ErrorCode::kConflict,
                  "replay diverged: " + std::string(what));
    }
  };
  int64_t cost = 0;
  switch (record.kind) {
    case ActionKind::kAdd: {
      require(record.point.has_value(), "add record without point");
      if (record.failed) {
        try {
          ApplyAdd(*record.point, record.index);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kNoCandidates) throw;
          cost = kFailedClickCost;
          break;
        }
        require(false, "failed click found candidates");
      }
      cost = ApplyAdd(*record.point, record.index);
      require(!record.segment || log_.back().segment == record.segment,
              "add selected a different segment");
      break;
    }
    case ActionKind::kRemove:
      require(record.segment.has_value(), "remove record without segment");
      cost = ApplyRemove(*record.segment);
      break;
    case ActionKind::kChangeLabel:
      require(record.segment && record.label, "incomplete change_label");
      cost = ApplyChangeLabel(*record.segment, *record.label,
                              record.via_shortlist, record.point);
      break;
    case ActionKind::kChangeDepth:
      require(record.segment.has_value(), "change_depth without segment");
      cost = ApplyChangeDepth(*record.segment, record.shift);
      break;
    case ActionKind::kHide:
      return Hide();
  }
  require(cost == record.cost, "cost differs from record");
  log_.back().recall = record.recall;
  log_.back().pq = record.pq;
  return cost;
}

void AnnotationSession::AnnotateLastAction(double recall, double pq) {
  if (log_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no action to annotate");
  }
  log_.back().recall = recall;
  log_.back().pq = pq;
}

Rendering AnnotationSession::Render() const {
  const ProposalSet& proposals = context_->proposals();
  std::vector<RasterLayer> by_id;
  std::vector<RasterLayer> by_label;
  by_id.reserve(active_.size());
  by_label.reserve(active_.size());
  for (const ActiveEntry& e : active_) {
    const Mask& mask = proposals.at(e.segment_id).mask;
    by_id.push_back({mask, e.segment_id.value()});
    by_label.push_back({mask, e.label.value()});
  }
  return Rendering{Rasterize(by_id, proposals.canvas()),
                   Rasterize(by_label, proposals.canvas())};
}

}  // namespace annotkit
