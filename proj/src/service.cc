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


#include "annotkit/service.h"

#include <algorithm>
#include <functional>
#include <utility>

#include "annotkit/error.h"
#include "httplib.h"
#include "json.hpp"

namespace annotkit {
namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

int64_t UnixMillisNow() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

Json QualityJson(const QualityReport& r) {
  Json j;
  j["recall"] = r.recall;
  j["recalled"] = r.recalled;
  j["targets"] = r.targets;
  j["pq"] = r.panoptic_quality;
  j["sq"] = r.segmentation_quality;
  j["rq"] = r.recognition_quality;
  j["tp"] = r.tp;
  j["fp"] = r.fp;
  j["fn"] = r.fn;
  return j;
}

Json SnapshotJson(const SessionSnapshot& s, const LabelCatalog& catalog) {
  Json j;
  j["session_id"] = s.session_id;
  j["image_id"] = s.image_id;
  j["config"] = Json::parse(SessionConfigToJson(s.config));
  j["setting"] = s.config.SettingName();
  Json active = Json::array();
  for (size_t d = 0; d < s.active.size(); ++d) {
    active.push_back({{"segment_id", s.active[d].segment_id.value()},
                      {"label", catalog.at(s.active[d].label).id},
                      {"depth", d}});
  }
  j["active"] = std::move(active);
  j["ledger"] = Json::parse(LedgerToJson(s.ledger));
  j["action_count"] = s.action_count;
  j["render_hash"] = HashToHex(s.render_hash);
  j["quality"] = s.quality ? QualityJson(*s.quality) : Json(nullptr);
  j["created_unix_ms"] = s.created_unix_ms;
  j["last_action_unix_ms"] = s.last_action_unix_ms;
  j["durations_seconds"] = s.durations_seconds;
  return j;
}

[[noreturn]] void BadRequest(const std::string& message) {
  throw Error(ErrorCode::kSchema, message);
}

Json ParseBody(const std::string& body) {
  try {
    return Json::parse(body);
  } catch (const Json::parse_error& e) {
    BadRequest(std::string("request body is not valid JSON: ") + e.what());
  }
}

Point ParsePoint(const Json& j, const char* what) {
  if (!j.is_object() || !j.contains("x") || !j.contains("y") ||
      !j["x"].is_number() || !j["y"].is_number()) {
    BadRequest(std::string(what) + " must be an object with numeric x and y");
  }
  return {j["x"].get<double>(), j["y"].get<double>()};
}

int32_t ParseInt32(const Json& j, const char* what) {
  if (!j.is_number_integer()) BadRequest(std::string(what) + " must be an integer");
  const int64_t v = j.get<int64_t>();
  if (v < INT32_MIN || v > INT32_MAX) BadRequest(std::string(what) + " out of range");
  return static_cast<int32_t>(v);
}

ActionRequest ParseActionRequest(const Json& body, const LabelCatalog& catalog) {
  if (!body.is_object() || !body.contains("kind") || !body["kind"].is_string()) {
    BadRequest("action needs a string 'kind'");
  }
  ActionRequest r;
  try {
    r.kind = ParseActionKind(body["kind"].get<std::string>());
  } catch (const Error& e) {
    BadRequest(e.what());
  }
  // Parameters may be nested under "params" or given inline.
  const Json& p = body.contains("params") ? body["params"] : body;
  if (!p.is_object()) BadRequest("'params' must be an object");
  if (p.contains("point")) r.point = ParsePoint(p["point"], "point");
  if (p.contains("hover")) r.point = ParsePoint(p["hover"], "hover");
  if (p.contains("chosen_index")) {
    r.chosen_index = ParseInt32(p["chosen_index"], "chosen_index");
  }
  if (p.contains("segment_id")) {
    r.segment = SegmentId(ParseInt32(p["segment_id"], "segment_id"));
  }
  if (p.contains("label")) {
    if (!p["label"].is_string()) BadRequest("label must be a catalog id");
    r.label = catalog.Require(p["label"].get<std::string>());
  }
  if (p.contains("via_shortlist")) {
    if (!p["via_shortlist"].is_boolean()) BadRequest("via_shortlist must be a boolean");
    r.via_shortlist = p["via_shortlist"].get<bool>();
  }
  if (p.contains("shift")) r.shift = ParseInt32(p["shift"], "shift");
  if (body.contains("expected_action_count")) {
    if (!body["expected_action_count"].is_number_integer()) {
      BadRequest("expected_action_count must be an integer");
    }
    r.expected_action_count = body["expected_action_count"].get<int64_t>();
  }
  switch (r.kind) {
    case ActionKind::kAdd:
      if (!r.point) BadRequest("add needs a point");
      break;
    case ActionKind::kRemove:
    case ActionKind::kChangeDepth:
      if (!r.segment) BadRequest("action needs a segment_id");
      break;
    case ActionKind::kChangeLabel:
      if (!r.segment || !r.label) BadRequest("change_label needs segment_id and label");
      break;
    case ActionKind::kHide:
      break;
  }
  return r;
}

std::string SessionFile(const std::string& id) { return id + ".session.json"; }

}  // namespace

// ---- SessionManager ----

SessionManager::SessionManager(std::shared_ptr<const DatasetManifest> dataset,
                               std::optional<fs::path> persist_dir)
    : dataset_(std::move(dataset)), persist_dir_(std::move(persist_dir)) {
  if (persist_dir_) fs::create_directories(*persist_dir_);
}

std::shared_ptr<const SessionContext> SessionManager::ContextFor(
    const ImageEntry& image) {
  std::unique_lock lock(mutex_);
  auto it = contexts_.find(image.id);
  if (it == contexts_.end()) {
    it = contexts_.emplace(image.id, MakeSessionContext(*dataset_, image)).first;
  }
  return it->second;
}

bool SessionManager::HasGroundTruth(const ImageEntry& image) const {
  return !image.gt.segments().empty();
}

std::shared_ptr<SessionManager::Record> SessionManager::Find(
    const std::string& session_id) const {
  std::shared_lock lock(mutex_);
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) {
    throw Error(ErrorCode::kNotFound, "unknown session '" + session_id + "'");
  }
  return it->second;
}

SessionSnapshot SessionManager::SnapshotLocked(const Record& r) const {
  SessionSnapshot s;
  s.session_id = r.id;
  s.image_id = r.image->id;
  s.config = r.session->config();
  s.active = r.session->active();
  s.ledger = r.session->ledger();
  s.action_count = static_cast<int64_t>(r.session->log().size());
  const Rendering rendering = r.session->Render();
  s.render_hash = RenderHash(rendering);
  if (HasGroundTruth(*r.image)) {
    s.quality = Evaluate(rendering, r.image->gt, *dataset_->catalog);
  }
  s.created_unix_ms = r.created_unix_ms;
  s.last_action_unix_ms = r.last_action_unix_ms;
  s.durations_seconds = r.durations_seconds;
  return s;
}

void SessionManager::Persist(const Record& r) const {
  if (!persist_dir_) return;
  Json j;
  j["session_id"] = r.id;
  j["image_id"] = r.image->id;
  j["created_unix_ms"] = r.created_unix_ms;
  j["last_action_unix_ms"] = r.last_action_unix_ms;
  j["durations_seconds"] = r.durations_seconds;
  j["annotation"] = Json::parse(AnnotationToJson(
      AnnotationFromSession(*r.session, r.image->id), *dataset_->catalog));
  WriteFileAtomic(*persist_dir_ / SessionFile(r.id), j.dump(1) + "\n");
}

size_t SessionManager::Recover() {
  if (!persist_dir_) return 0;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(*persist_dir_)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > 13 && name.ends_with(".session.json")) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  size_t restored = 0;
  for (const fs::path& path : files) {
    Json j;
    try {
      j = Json::parse(ReadFile(path));
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kSchema, path.string() + ": " + e.what());
    }
    auto record = std::make_shared<Record>();
    record->id = j.at("session_id").get<std::string>();
    record->image = dataset_->Find(j.at("image_id").get<std::string>());
    if (record->image == nullptr) {
      throw Error(ErrorCode::kNotFound,
                  path.string() + ": unknown image " + j.at("image_id").dump());
    }
    const AnnotationFile stored =
        ParseAnnotation(j.at("annotation").dump(), *dataset_->catalog);
    AnnotationSession replayed = ReplaySession(ContextFor(*record->image), stored);
    if (replayed.active() != stored.active || !(replayed.ledger() == stored.ledger)) {
      throw Error(ErrorCode::kConflict,
                  path.string() + ": replaying the log does not reproduce the "
                                  "stored state");
    }
    record->session = std::make_unique<AnnotationSession>(std::move(replayed));
    record->created_unix_ms = j.value("created_unix_ms", int64_t{0});
    record->last_action_unix_ms = j.value("last_action_unix_ms", int64_t{0});
    record->durations_seconds =
        j.value("durations_seconds", std::vector<double>{});
    record->last_request = std::chrono::steady_clock::now();
    std::unique_lock lock(mutex_);
    // Keep fresh ids ahead of every recovered "s<n>" id.
    if (record->id.size() > 1 && record->id[0] == 's') {
      try {
        next_id_ = std::max<int64_t>(next_id_, std::stoll(record->id.substr(1)) + 1);
      } catch (const std::exception&) {
      }
    }
    sessions_[record->id] = std::move(record);
    ++restored;
  }
  return restored;
}

SessionSnapshot SessionManager::Create(const std::string& image_id,
                                       const SessionConfig& config) {
  config.Validate();
  const ImageEntry* image = dataset_->Find(image_id);
  if (image == nullptr) {
    throw Error(ErrorCode::kNotFound, "unknown image '" + image_id + "'");
  }
  auto record = std::make_shared<Record>();
  record->image = image;
  record->session =
      std::make_unique<AnnotationSession>(ContextFor(*image), config);
  record->created_unix_ms = UnixMillisNow();
  record->last_action_unix_ms = record->created_unix_ms;
  record->last_request = std::chrono::steady_clock::now();
  {
    std::unique_lock lock(mutex_);
    record->id = "s" + std::to_string(next_id_++);
    sessions_[record->id] = record;
  }
  std::lock_guard lock(record->mutex);
  Persist(*record);
  return SnapshotLocked(*record);
}

SessionSnapshot SessionManager::Snapshot(const std::string& session_id) const {
  const auto record = Find(session_id);
  std::lock_guard lock(record->mutex);
  return SnapshotLocked(*record);
}

CandidateList SessionManager::Candidates(const std::string& session_id,
                                         Point p) const {
  const auto record = Find(session_id);
  std::lock_guard lock(record->mutex);
  return record->session->CandidatesAt(p);
}

ActionOutcome SessionManager::Apply(const std::string& session_id,
                                    const ActionRequest& request) {
  const auto record = Find(session_id);
  std::lock_guard lock(record->mutex);
  AnnotationSession& session = *record->session;
  const auto log_size = static_cast<int64_t>(session.log().size());
  if (request.expected_action_count &&
      *request.expected_action_count != log_size) {
    throw Error(ErrorCode::kConflict,
                "session has " + std::to_string(log_size) +
                    " actions, request expected " +
                    std::to_string(*request.expected_action_count));
  }
  const auto now = std::chrono::steady_clock::now();
  const double elapsed =
      std::chrono::duration<double>(now - record->last_request).count();
  record->last_request = now;

  ActionOutcome outcome;
  switch (request.kind) {
    case ActionKind::kAdd:
      try {
        outcome.cost = session.ApplyAdd(*request.point, request.chosen_index);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNoCandidates) throw;
        outcome.cost = kFailedClickCost;
        outcome.failed = true;
      }
      break;
    case ActionKind::kRemove:
      outcome.cost = session.ApplyRemove(*request.segment);
      break;
    case ActionKind::kChangeLabel:
      outcome.cost = session.ApplyChangeLabel(
          *request.segment, *request.label, request.via_shortlist, request.point);
      break;
    case ActionKind::kChangeDepth:
      outcome.cost = session.ApplyChangeDepth(*request.segment, request.shift);
      break;
    case ActionKind::kHide:
      outcome.cost = session.Hide();
      break;
  }

  const bool logged = static_cast<int64_t>(session.log().size()) > log_size;
  if (logged) {
    if (HasGroundTruth(*record->image)) {
      const QualityReport q =
          Evaluate(session.Render(), record->image->gt, *dataset_->catalog);
      session.AnnotateLastAction(q.recall, q.panoptic_quality);
    }
    record->durations_seconds.push_back(elapsed);
    record->last_action_unix_ms = UnixMillisNow();
    outcome.record = session.log().back();
    Persist(*record);
  }
  outcome.ledger = session.ledger();
  outcome.action_count = static_cast<int64_t>(session.log().size());
  outcome.duration_seconds = elapsed;
  return outcome;
}

Rendering SessionManager::Render(const std::string& session_id) const {
  const auto record = Find(session_id);
  std::lock_guard lock(record->mutex);
  return record->session->Render();
}

QualityReport SessionManager::Metrics(const std::string& session_id) const {
  const auto record = Find(session_id);
  std::lock_guard lock(record->mutex);
  if (!HasGroundTruth(*record->image)) {
    throw Error(ErrorCode::kConflict, "image '" + record->image->id +
                                          "' has no ground truth attached");
  }
  return Evaluate(record->session->Render(), record->image->gt,
                  *dataset_->catalog);
}

AnnotationFile SessionManager::Export(const std::string& session_id) const {
  const auto record = Find(session_id);
  std::lock_guard lock(record->mutex);
  return AnnotationFromSession(*record->session, record->image->id);
}

std::shared_ptr<const SessionContext> SessionManager::ContextOf(
    const std::string& session_id) const {
  const auto record = Find(session_id);
  std::lock_guard lock(record->mutex);
  return record->session->shared_context();
}

// ---- HTTP ----

int HttpStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kConflict:
      return 409;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kOutOfBounds:
    case ErrorCode::kUnknownSegment:
    case ErrorCode::kUnknownLabel:
    case ErrorCode::kSchema:
    case ErrorCode::kCorruptMask:
    case ErrorCode::kCanvasMismatch:
    case ErrorCode::kEmptyMask:
    case ErrorCode::kInvalidCanvas:
    case ErrorCode::kVersion:
      return 400;
    default:
      return 500;
  }
}

struct HttpService::Impl {
  std::shared_ptr<SessionManager> sessions;
  fs::path display_root;
  httplib::Server server;

  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  // Converts library errors into JSON error responses.
  static httplib::Server::Handler Guard(Handler handler) {
    return [handler = std::move(handler)](const httplib::Request& req,
                                          httplib::Response& res) {
      const auto fail = [&](int status, std::string_view code,
                            const std::string& message) {
        Json j;
        j["error"] = {{"code", code}, {"message", message}};
        res.status = status;
        res.set_content(j.dump(), "application/json");
      };
      try {
        handler(req, res);
      } catch (const Error& e) {
        fail(HttpStatusFor(e.code()), ErrorCodeName(e.code()), e.what());
      } catch (const std::exception& e) {
        fail(500, "internal", e.what());
      }
    };
  }

  static void Send(httplib::Response& res, const Json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  const LabelCatalog& catalog() const { return *sessions->dataset().catalog; }

  void Mount() {
    server.Post("/sessions", Guard([this](const auto& req, auto& res) {
      const Json body = ParseBody(req.body);
      if (!body.is_object() || !body.contains("image_id") ||
          !body["image_id"].is_string()) {
        BadRequest("request needs a string 'image_id'");
      }
      SessionConfig config;
      if (body.contains("config")) {
        try {
          config = ParseSessionConfig(body["config"].dump());
        } catch (const Error& e) {
          throw Error(ErrorCode::kInvalidArgument, e.what());
        }
      }
      const SessionSnapshot s =
          sessions->Create(body["image_id"].get<std::string>(), config);
      Send(res, SnapshotJson(s, catalog()), 201);
    }));

    server.Get(R"(/sessions/([^/]+))", Guard([this](const auto& req, auto& res) {
      Send(res, SnapshotJson(sessions->Snapshot(req.matches[1]), catalog()));
    }));

    server.Get(R"(/sessions/([^/]+)/candidates)",
               Guard([this](const auto& req, auto& res) {
      const std::string id = req.matches[1];
      if (!req.has_param("x") || !req.has_param("y")) {
        BadRequest("candidates need x and y query parameters");
      }
      Point p;
      try {
        p = {std::stod(req.get_param_value("x")),
             std::stod(req.get_param_value("y"))};
      } catch (const std::exception&) {
        BadRequest("x and y must be numbers");
      }
      const CandidateList list = sessions->Candidates(id, p);
      const auto context = sessions->ContextOf(id);
      Json candidates = Json::array();
      for (size_t i = 0; i < list.segments.size(); ++i) {
        const Segment& s = context->proposals().at(list.segments[i]);
        candidates.push_back({{"index", i},
                              {"segment_id", s.id.value()},
                              {"label", catalog().at(s.label).id},
                              {"score", s.score},
                              {"rle", s.mask.ToString()}});
      }
      Json body;
      body["anchor"] = {{"x", list.anchor.x}, {"y", list.anchor.y}};
      body["candidates"] = std::move(candidates);
      Send(res, body);
    }));

    server.Post(R"(/sessions/([^/]+)/actions)",
                Guard([this](const auto& req, auto& res) {
      const std::string id = req.matches[1];
      const ActionRequest request = ParseActionRequest(ParseBody(req.body), catalog());
      const ActionOutcome outcome = sessions->Apply(id, request);
      Json body;
      body["cost"] = outcome.cost;
      body["failed"] = outcome.failed;
      body["action"] = outcome.record
                           ? Json::parse(ActionRecordToJson(*outcome.record, catalog()))
                           : Json(nullptr);
      body["ledger"] = Json::parse(LedgerToJson(outcome.ledger));
      body["action_count"] = outcome.action_count;
      body["duration_seconds"] = outcome.duration_seconds;
      body["state"] = SnapshotJson(sessions->Snapshot(id), catalog());
      Send(res, body);
    }));

    server.Get(R"(/sessions/([^/]+)/render)", Guard([this](const auto& req, auto& res) {
      const Rendering r = sessions->Render(req.matches[1]);
      Json body;
      body["width"] = r.segments.canvas.width;
      body["height"] = r.segments.canvas.height;
      body["unlabeled"] = LabelMap::kUnlabeled;
      body["hash"] = HashToHex(RenderHash(r));
      body["segments"] = r.segments.values;
      body["labels"] = r.labels.values;
      Send(res, body);
    }));

    server.Get(R"(/sessions/([^/]+)/metrics)", Guard([this](const auto& req, auto& res) {
      Send(res, QualityJson(sessions->Metrics(req.matches[1])));
    }));

    server.Get(R"(/images/([^/]+))", Guard([this](const auto& req, auto& res) {
      const std::string id = req.matches[1];
      const ImageEntry* image = sessions->dataset().Find(id);
      if (image == nullptr || !image->display) {
        throw Error(ErrorCode::kNotFound, "no display image for '" + id + "'");
      }
      const fs::path relative(*image->display);
      for (const auto& part : relative) {
        if (part == "..") {
          throw Error(ErrorCode::kNotFound, "display path leaves the dataset");
        }
      }
      if (relative.is_absolute()) {
        throw Error(ErrorCode::kNotFound, "display path must be relative");
      }
      std::string data;
      try {
        data = ReadFile(display_root / relative);
      } catch (const Error&) {
        throw Error(ErrorCode::kNotFound, "display image of '" + id + "' is missing");
      }
      res.set_content(std::move(data), "image/png");
    }));

    server.Get("/catalog", Guard([this](const auto&, auto& res) {
      Json labels = Json::array();
      for (const Label& l : catalog().labels()) {
        labels.push_back({{"id", l.id}, {"kind", LabelKindName(l.kind)}});
      }
      Send(res, {{"labels", std::move(labels)}});
    }));
  }
};

HttpService::HttpService(std::shared_ptr<SessionManager> sessions,
                         fs::path display_root)
    : impl_(std::make_unique<Impl>()) {
  impl_->sessions = std::move(sessions);
  impl_->display_root = std::move(display_root);
  impl_->Mount();
}

HttpService::~HttpService() { Stop(); }

bool HttpService::Listen(const std::string& host, int port) {
  return impl_->server.listen(host, port);
}

int HttpService::BindToAnyPort(const std::string& host) {
  return impl_->server.bind_to_any_port(host);
}

bool HttpService::ListenAfterBind() { return impl_->server.listen_after_bind(); }

void HttpService::Stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

bool HttpService::IsRunning() const { return impl_->server.is_running(); }

}  // namespace annotkit
