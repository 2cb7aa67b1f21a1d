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


#include "annotkit/dataset_io.h"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <unordered_map>
#include <utility>

#include "annotkit/error.h"
#include "annotkit/seeding.h"
#include "json.hpp"

namespace annotkit {
namespace {

using Json = nlohmann::ordered_json;

// Strips the "code: " prefix that Error adds to every message.
std::string Detail(const Error& e) {
  const std::string what = e.what();
  const std::string prefix = std::string(ErrorCodeName(e.code())) + ": ";
  return what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
}

[[noreturn]] void Relocate(const Error& e, const std::string& where) {
  throw Error(e.code(), where + ": " + Detail(e));
}

[[noreturn]] void SchemaError(const std::string& where,
                              const std::string& what) {
  throw Error(ErrorCode::kSchema, where + ": " + what);
}

Json ParseJson(std::string_view text, const char* what) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kSchema,
                std::string(what) + " is not valid JSON: " + e.what());
  }
}

const Json& Field(const Json& object, const char* key,
                  const std::string& where) {
  if (!object.is_object()) SchemaError(where, "expected an object");
  const auto it = object.find(key);
  if (it == object.end()) {
    SchemaError(where, std::string("missing field '") + key + "'");
  }
  return *it;
}

const Json* OptionalField(const Json& object, const char* key,
                          const std::string& where) {
  if (!object.is_object()) SchemaError(where, "expected an object");
  const auto it = object.find(key);
  return it == object.end() || it->is_null() ? nullptr : &*it;
}

std::string AsString(const Json& value, const std::string& where) {
  if (!value.is_string()) SchemaError(where, "expected a string");
  return value.get<std::string>();
}

int64_t AsInt(const Json& value, const std::string& where) {
  if (!value.is_number_integer()) SchemaError(where, "expected an integer");
  return value.get<int64_t>();
}

uint64_t AsUint(const Json& value, const std::string& where) {
  if (!value.is_number_unsigned()) {
    SchemaError(where, "expected a non-negative integer");
  }
  return value.get<uint64_t>();
}

double AsDouble(const Json& value, const std::string& where) {
  if (!value.is_number()) SchemaError(where, "expected a number");
  return value.get<double>();
}

bool AsBool(const Json& value, const std::string& where) {
  if (!value.is_boolean()) SchemaError(where, "expected a boolean");
  return value.get<bool>();
}

const Json& AsArray(const Json& value, const std::string& where) {
  if (!value.is_array()) SchemaError(where, "expected an array");
  return value;
}

int32_t AsInt32(const Json& value, const std::string& where) {
  const int64_t v = AsInt(value, where);
  if (v < INT32_MIN || v > INT32_MAX) SchemaError(where, "integer out of range");
  return static_cast<int32_t>(v);
}

std::string At(const std::string& base, size_t index) {
  return base + "[" + std::to_string(index) + "]";
}

LabelIndex ResolveLabel(const LabelCatalog& catalog, const Json& value,
                        const std::string& where) {
  const std::string id = AsString(value, where);
  const auto index = catalog.Find(id);
  if (!index) {
    throw Error(ErrorCode::kUnknownLabel,
                where + ": label '" + id + "' is not in the catalog");
  }
  return *index;
}

Mask ParseMask(const Json& value, const Canvas& canvas,
               const std::string& where) {
  const std::string text = AsString(value, where);
  std::optional<Mask> parsed;
  try {
    parsed = Mask::Parse(text);
  } catch (const Error& e) {
    Relocate(e, where);
  }
  Mask mask = std::move(*parsed);
  if (!(mask.canvas() == canvas)) {
    throw Error(ErrorCode::kCanvasMismatch,
                where + ": mask canvas differs from the image canvas");
  }
  return mask;
}

// ---- Catalog, ground truth and proposals ----

std::shared_ptr<const LabelCatalog> ParseCatalog(const Json& value) {
  const std::string where = "catalog";
  std::vector<Label> labels;
  const Json& array = AsArray(value, where);
  for (size_t i = 0; i < array.size(); ++i) {
    const std::string at = At(where, i);
    Label label;
    label.id = AsString(Field(array[i], "id", at), at + ".id");
    const std::string kind = AsString(Field(array[i], "kind", at), at + ".kind");
    try {
      label.kind = ParseLabelKind(kind);
    } catch (const Error& e) {
      SchemaError(at + ".kind", Detail(e));
    }
    labels.push_back(std::move(label));
  }
  try {
    return std::make_shared<const LabelCatalog>(std::move(labels));
  } catch (const Error& e) {
    Relocate(e, where);
  }
}

ImageEntry ParseImage(const Json& value, const LabelCatalog& catalog,
                      const std::string& where) {
  const std::string id = AsString(Field(value, "id", where), where + ".id");
  const std::string loc = where + " (image '" + id + "')";
  Canvas canvas;
  canvas.width = AsInt32(Field(value, "width", loc), loc + ".width");
  canvas.height = AsInt32(Field(value, "height", loc), loc + ".height");
  try {
    canvas.Validate();
  } catch (const Error& e) {
    Relocate(e, loc);
  }
  std::optional<std::string> display;
  if (const Json* d = OptionalField(value, "display", loc)) {
    display = AsString(*d, loc + ".display");
  }

  std::vector<GtSegment> segments;
  const Json& gt = AsArray(Field(value, "gt", loc), loc + ".gt");
  for (size_t i = 0; i < gt.size(); ++i) {
    const std::string at = At(loc + ".gt", i);
    const LabelIndex label =
        ResolveLabel(catalog, Field(gt[i], "label", at), at + ".label");
    segments.push_back(
        GtSegment{ParseMask(Field(gt[i], "rle", at), canvas, at + ".rle"), label});
  }
  std::optional<GroundTruthImage> truth;
  try {
    truth = GroundTruthImage::Create(canvas, std::move(segments), catalog);
  } catch (const Error& e) {
    Relocate(e, loc + ".gt");
  }

  std::optional<ProposalSet> proposals;
  if (const Json* p = OptionalField(value, "proposals", loc)) {
    const std::string ploc = loc + ".proposals";
    std::vector<Segment> list;
    const Json& array = AsArray(*p, ploc);
    for (size_t i = 0; i < array.size(); ++i) {
      const std::string at = At(ploc, i);
      Segment s{SegmentId(AsInt32(Field(array[i], "id", at), at + ".id")),
                ParseMask(Field(array[i], "rle", at), canvas, at + ".rle"),
                ResolveLabel(catalog, Field(array[i], "label", at), at + ".label"),
                AsDouble(Field(array[i], "score", at), at + ".score")};
      list.push_back(std::move(s));
    }
    try {
      proposals.emplace(canvas, std::move(list));
    } catch (const Error& e) {
      Relocate(e, ploc);
    }
  }
  return ImageEntry{id, std::move(display), std::move(*truth),
                    std::move(proposals)};
}

// ---- Sessions and actions ----

std::string_view InitModeName(InitMode mode) {
  return mode == InitMode::kAuto ? "auto" : "empty";
}

std::string_view OrderingName(Ordering ordering) {
  return ordering == Ordering::kByScore ? "score" : "distance";
}

Json SessionConfigJson(const SessionConfig& config) {
  Json j;
  j["init"] = InitModeName(config.init_mode);
  j["nms_threshold"] =
      config.nms_threshold ? Json(*config.nms_threshold) : Json(nullptr);
  j["ordering"] = OrderingName(config.ordering);
  j["top_n"] = config.top_n ? Json(*config.top_n) : Json(nullptr);
  return j;
}

SessionConfig SessionConfigFromJson(const Json& j, const std::string& where) {
  if (!j.is_object()) SchemaError(where, "expected an object");
  SessionConfig config;
  if (const Json* v = OptionalField(j, "init", where)) {
    const std::string s = AsString(*v, where + ".init");
    if (s == "auto") {
      config.init_mode = InitMode::kAuto;
    } else if (s == "empty") {
      config.init_mode = InitMode::kEmpty;
    } else {
      SchemaError(where + ".init", "expected 'auto' or 'empty'");
    }
  }
  if (const Json* v = OptionalField(j, "nms_threshold", where)) {
    config.nms_threshold = AsDouble(*v, where + ".nms_threshold");
  }
  if (const Json* v = OptionalField(j, "ordering", where)) {
    const std::string s = AsString(*v, where + ".ordering");
    if (s == "score") {
      config.ordering = Ordering::kByScore;
    } else if (s == "distance") {
      config.ordering = Ordering::kByDistance;
    } else {
      SchemaError(where + ".ordering", "expected 'score' or 'distance'");
    }
  }
  if (const Json* v = OptionalField(j, "top_n", where)) {
    config.top_n = AsInt32(*v, where + ".top_n");
  }
  try {
    config.Validate();
  } catch (const Error& e) {
    Relocate(e, where);
  }
  return config;
}

Json NoiseConfigJson(const NoiseConfig& c) {
  Json j;
  j["variants_per_target"] = c.variants_per_target;
  j["dilate_erode_radius_max"] = c.dilate_erode_radius_max;
  j["translation_jitter_std"] = c.translation_jitter_std;
  j["label_noise_prob"] = c.label_noise_prob;
  j["miss_prob"] = c.miss_prob;
  j["distractor_count"] = c.distractor_count;
  j["max_proposals"] = c.max_proposals;
  j["base_quality"] = c.base_quality;
  j["distractor_quality"] = c.distractor_quality;
  j["score_noise_std"] = c.score_noise_std;
  j["silhouette_prob"] = c.silhouette_prob;
  return j;
}

NoiseConfig NoiseConfigFromJson(const Json& j, const std::string& where) {
  if (!j.is_object()) SchemaError(where, "expected an object");
  NoiseConfig c;
  const auto read_int = [&](const char* key, int32_t& out) {
    if (const Json* v = OptionalField(j, key, where)) {
      out = AsInt32(*v, where + "." + key);
    }
  };
  const auto read_double = [&](const char* key, double& out) {
    if (const Json* v = OptionalField(j, key, where)) {
      out = AsDouble(*v, where + "." + key);
    }
  };
  read_int("variants_per_target", c.variants_per_target);
  read_int("dilate_erode_radius_max", c.dilate_erode_radius_max);
  read_double("translation_jitter_std", c.translation_jitter_std);
  read_double("label_noise_prob", c.label_noise_prob);
  read_double("miss_prob", c.miss_prob);
  read_int("distractor_count", c.distractor_count);
  read_int("max_proposals", c.max_proposals);
  read_double("base_quality", c.base_quality);
  read_double("distractor_quality", c.distractor_quality);
  read_double("score_noise_std", c.score_noise_std);
  read_double("silhouette_prob", c.silhouette_prob);
  try {
    c.Validate();
  } catch (const Error& e) {
    Relocate(e, where);
  }
  return c;
}

Json ActionJson(const ActionRecord& r, const LabelCatalog& catalog) {
  Json j;
  j["kind"] = ActionKindName(r.kind);
  if (r.point) j["point"] = {{"x", r.point->x}, {"y", r.point->y}};
  if (r.segment) j["segment_id"] = r.segment->value();
  if (r.label) j["label"] = catalog.at(*r.label).id;
  j["index"] = r.index;
  j["shift"] = r.shift;
  j["via_shortlist"] = r.via_shortlist;
  j["failed"] = r.failed;
  j["cost"] = r.cost;
  if (r.recall) j["recall"] = *r.recall;
  if (r.pq) j["pq"] = *r.pq;
  return j;
}

ActionRecord ActionFromJson(const Json& j, const LabelCatalog& catalog,
                            const std::string& where) {
  ActionRecord r;
  try {
    r.kind = ParseActionKind(AsString(Field(j, "kind", where), where + ".kind"));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kSchema) throw;
    SchemaError(where + ".kind", Detail(e));
  }
  if (const Json* p = OptionalField(j, "point", where)) {
    const std::string at = where + ".point";
    r.point = Point{AsDouble(Field(*p, "x", at), at + ".x"),
                    AsDouble(Field(*p, "y", at), at + ".y")};
  }
  if (const Json* v = OptionalField(j, "segment_id", where)) {
    r.segment = SegmentId(AsInt32(*v, where + ".segment_id"));
  }
  if (const Json* v = OptionalField(j, "label", where)) {
    r.label = ResolveLabel(catalog, *v, where + ".label");
  }
  if (const Json* v = OptionalField(j, "index", where)) {
    r.index = AsInt32(*v, where + ".index");
  }
  if (const Json* v = OptionalField(j, "shift", where)) {
    r.shift = AsInt32(*v, where + ".shift");
  }
  if (const Json* v = OptionalField(j, "via_shortlist", where)) {
    r.via_shortlist = AsBool(*v, where + ".via_shortlist");
  }
  if (const Json* v = OptionalField(j, "failed", where)) {
    r.failed = AsBool(*v, where + ".failed");
  }
  r.cost = AsInt(Field(j, "cost", where), where + ".cost");
  if (const Json* v = OptionalField(j, "recall", where)) {
    r.recall = AsDouble(*v, where + ".recall");
  }
  if (const Json* v = OptionalField(j, "pq", where)) {
    r.pq = AsDouble(*v, where + ".pq");
  }
  return r;
}

Json LedgerJson(const MicroActionLedger& ledger) {
  Json j;
  j["total"] = ledger.total();
  Json actions = Json::object();
  Json micro = Json::object();
  for (int k = 0; k < kActionKindCount; ++k) {
    const auto kind = static_cast<ActionKind>(k);
    const std::string name(ActionKindName(kind));
    actions[name] = ledger.actions(kind);
    Json row = Json::object();
    for (int m = 0; m < kMicroActionCount; ++m) {
      const auto mic = static_cast<MicroAction>(m);
      row[std::string(MicroActionName(mic))] = ledger.count(kind, mic);
    }
    micro[name] = std::move(row);
  }
  j["actions"] = std::move(actions);
  j["micro"] = std::move(micro);
  return j;
}

MicroActionLedger LedgerFromJson(const Json& j, const std::string& where) {
  MicroActionLedger ledger;
  const Json& actions = Field(j, "actions", where);
  const Json& micro = Field(j, "micro", where);
  for (int k = 0; k < kActionKindCount; ++k) {
    const auto kind = static_cast<ActionKind>(k);
    const std::string name(ActionKindName(kind));
    const int64_t n = AsInt(Field(actions, name.c_str(), where + ".actions"),
                            where + ".actions." + name);
    if (n < 0) SchemaError(where + ".actions." + name, "negative count");
    for (int64_t i = 0; i < n; ++i) ledger.CountAction(kind);
    const Json& row = Field(micro, name.c_str(), where + ".micro");
    for (int m = 0; m < kMicroActionCount; ++m) {
      const auto mic = static_cast<MicroAction>(m);
      const std::string mname(MicroActionName(mic));
      const std::string at = where + ".micro." + name + "." + mname;
      const int64_t c = AsInt(Field(row, mname.c_str(), at), at);
      if (c < 0) SchemaError(at, "negative count");
      ledger.Record(kind, mic, c);
    }
  }
  if (AsInt(Field(j, "total", where), where + ".total") != ledger.total()) {
    SchemaError(where + ".total", "does not equal the sum of the counts");
  }
  return ledger;
}

}  // namespace

// ---- Files ----

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  return data;
}

void WriteFileAtomic(const std::filesystem::path& path, std::string_view data) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw Error(ErrorCode::kIo,
                "cannot move " + tmp.string() + " into place: " + ec.message());
  }
}

// ---- Manifest ----

const ImageEntry* DatasetManifest::Find(std::string_view image_id) const {
  for (const ImageEntry& image : images) {
    if (image.id == image_id) return &image;
  }
  return nullptr;
}

DatasetManifest ParseManifest(std::string_view text) {
  const Json root = ParseJson(text, "manifest");
  if (!root.is_object()) SchemaError("manifest", "expected an object");
  DatasetManifest manifest;
  manifest.catalog = ParseCatalog(Field(root, "catalog", "manifest"));
  const Json& images = AsArray(Field(root, "images", "manifest"), "images");
  std::set<std::string> seen;
  for (size_t i = 0; i < images.size(); ++i) {
    ImageEntry entry = ParseImage(images[i], *manifest.catalog, At("images", i));
    if (!seen.insert(entry.id).second) {
      SchemaError(At("images", i), "duplicate image id '" + entry.id + "'");
    }
    manifest.images.push_back(std::move(entry));
  }
  return manifest;
}

DatasetManifest LoadManifest(const std::filesystem::path& path) {
  const std::string text = ReadFile(path);
  try {
    return ParseManifest(text);
  } catch (const Error& e) {
    Relocate(e, path.string());
  }
}

std::string ManifestToJson(const DatasetManifest& manifest) {
  const LabelCatalog& catalog = *manifest.catalog;
  Json root;
  Json labels = Json::array();
  for (const Label& label : catalog.labels()) {
    labels.push_back({{"id", label.id}, {"kind", LabelKindName(label.kind)}});
  }
  root["catalog"] = std::move(labels);
  Json images = Json::array();
  for (const ImageEntry& image : manifest.images) {
    Json j;
    j["id"] = image.id;
    j["width"] = image.canvas().width;
    j["height"] = image.canvas().height;
    if (image.display) j["display"] = *image.display;
    Json gt = Json::array();
    for (const GtSegment& s : image.gt.segments()) {
      gt.push_back({{"label", catalog.at(s.label).id}, {"rle", s.mask.ToString()}});
    }
    j["gt"] = std::move(gt);
    if (image.proposals) {
      Json proposals = Json::array();
      for (const Segment& s : image.proposals->segments()) {
        proposals.push_back({{"id", s.id.value()},
                             {"label", catalog.at(s.label).id},
                             {"score", s.score},
                             {"rle", s.mask.ToString()}});
      }
      j["proposals"] = std::move(proposals);
    }
    images.push_back(std::move(j));
  }
  root["images"] = std::move(images);
  return root.dump(1) + "\n";
}

void SaveManifest(const DatasetManifest& manifest,
                  const std::filesystem::path& path) {
  WriteFileAtomic(path, ManifestToJson(manifest));
}

std::shared_ptr<const SessionContext> MakeSessionContext(
    const DatasetManifest& manifest, const ImageEntry& image) {
  if (!image.proposals) {
    throw Error(ErrorCode::kNotFound,
                "image '" + image.id + "' has no proposals");
  }
  return std::make_shared<const SessionContext>(*image.proposals,
                                                manifest.catalog);
}

// ---- Annotations ----

AnnotationFile AnnotationFromSession(const AnnotationSession& session,
                                     std::string image_id) {
  return AnnotationFile{std::move(image_id), session.config(), session.active(),
                        session.ledger(), session.log()};
}

std::string AnnotationToJson(const AnnotationFile& annotation,
                             const LabelCatalog& catalog) {
  Json root;
  root["version"] = kAnnotationVersion;
  root["image_id"] = annotation.image_id;
  if (annotation.config) root["config"] = SessionConfigJson(*annotation.config);
  Json active = Json::array();
  for (const ActiveEntry& e : annotation.active) {
    active.push_back({{"segment_id", e.segment_id.value()},
                      {"label", catalog.at(e.label).id}});
  }
  root["active"] = std::move(active);
  root["ledger"] = LedgerJson(annotation.ledger);
  Json log = Json::array();
  for (const ActionRecord& r : annotation.log) log.push_back(ActionJson(r, catalog));
  root["log"] = std::move(log);
  return root.dump(1) + "\n";
}

AnnotationFile ParseAnnotation(std::string_view text,
                               const LabelCatalog& catalog) {
  const Json root = ParseJson(text, "annotation");
  const std::string where = "annotation";
  const int64_t version = AsInt(Field(root, "version", where), "version");
  if (version != kAnnotationVersion) {
    throw Error(ErrorCode::kVersion,
                "annotation format version " + std::to_string(version) +
                    " is not supported (expected " +
                    std::to_string(kAnnotationVersion) + ")");
  }
  AnnotationFile a;
  a.image_id = AsString(Field(root, "image_id", where), "image_id");
  if (const Json* c = OptionalField(root, "config", where)) {
    a.config = SessionConfigFromJson(*c, "config");
  }
  const Json& active = AsArray(Field(root, "active", where), "active");
  for (size_t i = 0; i < active.size(); ++i) {
    const std::string at = At("active", i);
    a.active.push_back(
        {SegmentId(AsInt32(Field(active[i], "segment_id", at), at + ".segment_id")),
         ResolveLabel(catalog, Field(active[i], "label", at), at + ".label")});
  }
  a.ledger = LedgerFromJson(Field(root, "ledger", where), "ledger");
  const Json& log = AsArray(Field(root, "log", where), "log");
  for (size_t i = 0; i < log.size(); ++i) {
    a.log.push_back(ActionFromJson(log[i], catalog, At("log", i)));
  }
  return a;
}

void SaveAnnotation(const AnnotationFile& annotation,
                    const LabelCatalog& catalog,
                    const std::filesystem::path& path) {
  WriteFileAtomic(path, AnnotationToJson(annotation, catalog));
}

AnnotationFile LoadAnnotation(const std::filesystem::path& path,
                              const LabelCatalog& catalog) {
  const std::string text = ReadFile(path);
  try {
    return ParseAnnotation(text, catalog);
  } catch (const Error& e) {
    Relocate(e, path.string());
  }
}

AnnotationSession RestoreSession(std::shared_ptr<const SessionContext> context,
                                 const AnnotationFile& annotation) {
  return AnnotationSession::Restore(std::move(context),
                                    annotation.config.value_or(SessionConfig{}),
                                    annotation.active, annotation.ledger,
                                    annotation.log);
}

AnnotationSession ReplaySession(std::shared_ptr<const SessionContext> context,
                                const AnnotationFile& annotation) {
  AnnotationSession session(std::move(context),
                            annotation.config.value_or(SessionConfig{}));
  for (size_t i = 0; i < annotation.log.size(); ++i) {
    try {
      session.Replay(annotation.log[i]);
    } catch (const Error& e) {
      Relocate(e, At("log", i));
    }
  }
  return session;
}

// ---- Split ----

DatasetSplit Split(const DatasetManifest& manifest, size_t exploration_count,
                   uint64_t seed) {
  const size_t n = manifest.images.size();
  if (exploration_count > n) {
    throw Error(ErrorCode::kInvalidArgument,
                "exploration count " + std::to_string(exploration_count) +
                    " exceeds the " + std::to_string(n) + " images");
  }
  // Rank images by a keyed hash of their id; ties cannot occur for distinct
  // ids in practice and fall back to manifest order.
  std::vector<std::pair<uint64_t, size_t>> keys;
  keys.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    keys.emplace_back(DeriveSeed(seed, "split/" + manifest.images[i].id), i);
  }
  std::sort(keys.begin(), keys.end());
  std::vector<uint8_t> chosen(n, 0);
  for (size_t i = 0; i < exploration_count; ++i) chosen[keys[i].second] = 1;
  DatasetSplit split;
  for (size_t i = 0; i < n; ++i) {
    (chosen[i] ? split.exploration : split.holdout)
        .push_back(manifest.images[i].id);
  }
  return split;
}

// ---- Run configuration ----

void RunConfig::Validate() const {
  session.Validate();
  noise.Validate();
  if (budget < 0) {
    throw Error(ErrorCode::kInvalidArgument, "budget must be non-negative");
  }
  if ((exploration_count && *exploration_count < 0) ||
      (holdout_count && *holdout_count < 0)) {
    throw Error(ErrorCode::kInvalidArgument, "split sizes must be non-negative");
  }
}

std::string SessionConfigToJson(const SessionConfig& config) {
  return SessionConfigJson(config).dump();
}

SessionConfig ParseSessionConfig(std::string_view text) {
  return SessionConfigFromJson(ParseJson(text, "session config"), "config");
}

std::string NoiseConfigToJson(const NoiseConfig& config) {
  return NoiseConfigJson(config).dump();
}

std::string LedgerToJson(const MicroActionLedger& ledger) {
  return LedgerJson(ledger).dump();
}

std::string ActionRecordToJson(const ActionRecord& record,
                               const LabelCatalog& catalog) {
  return ActionJson(record, catalog).dump();
}

std::string RunConfigToJson(const RunConfig& config) {
  Json root;
  root["session"] = SessionConfigJson(config.session);
  root["noise"] = NoiseConfigJson(config.noise);
  root["budget"] = config.budget;
  root["seed"] = config.seed;
  Json split = Json::object();
  split["exploration"] =
      config.exploration_count ? Json(*config.exploration_count) : Json(nullptr);
  split["holdout"] =
      config.holdout_count ? Json(*config.holdout_count) : Json(nullptr);
  root["split"] = std::move(split);
  return root.dump(1) + "\n";
}

RunConfig ParseRunConfig(std::string_view text) {
  const Json root = ParseJson(text, "run config");
  const std::string where = "run config";
  if (!root.is_object()) SchemaError(where, "expected an object");
  RunConfig config;
  if (const Json* v = OptionalField(root, "session", where)) {
    config.session = SessionConfigFromJson(*v, "session");
  }
  if (const Json* v = OptionalField(root, "noise", where)) {
    config.noise = NoiseConfigFromJson(*v, "noise");
  }
  if (const Json* v = OptionalField(root, "budget", where)) {
    config.budget = AsInt(*v, "budget");
  }
  if (const Json* v = OptionalField(root, "seed", where)) {
    config.seed = AsUint(*v, "seed");
  }
  if (const Json* s = OptionalField(root, "split", where)) {
    if (const Json* v = OptionalField(*s, "exploration", "split")) {
      config.exploration_count = AsInt(*v, "split.exploration");
    }
    if (const Json* v = OptionalField(*s, "holdout", "split")) {
      config.holdout_count = AsInt(*v, "split.holdout");
    }
  }
  config.Validate();
  return config;
}

}  // namespace annotkit
