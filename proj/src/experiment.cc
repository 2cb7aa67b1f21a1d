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


#include "annotkit/experiment.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <thread>
#include <utility>

#include "annotkit/error.h"
#include "annotkit/rendering.h"
#include "annotkit/seeding.h"
#include "annotkit/simulator.h"
#include "json.hpp"

namespace annotkit {
namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void Invalid(const std::string& message) {
  throw Error(ErrorCode::kInvalidArgument, message);
}

std::vector<std::string_view> SplitList(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  size_t start = 0;
  while (true) {
    const size_t end = text.find(sep, start);
    parts.push_back(text.substr(start, end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return parts;
}

std::optional<double> ParseDouble(std::string_view text) {
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::optional<int32_t> ParseInt(std::string_view text) {
  int32_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

}  // namespace

std::string SafeFileName(std::string_view id) {
  std::string out;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
    out += ok ? c : '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

namespace {

// Runs fn(i) for i in [0, n) on up to `jobs` threads. The first exception
// thrown by any task is rethrown after all threads finish.
template <typename Fn>
void ParallelFor(size_t n, int jobs, Fn fn) {
  const size_t workers =
      std::min(n, static_cast<size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (size_t i = next++; i < n && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    });
  }
  for (std::thread& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

Json CostTableJson() {
  Json j;
  j["add"] = "2 + scroll index";
  j["remove"] = kRemoveCost;
  j["change_label_shortlist"] = kShortlistLabelCost;
  j["change_label_manual"] = kManualLabelCost;
  j["change_depth"] = "|effective shift|";
  j["hide"] = kHideCost;
  j["failed_click"] = kFailedClickCost;
  return j;
}

Json ReportJson(const QualityReport& r) {
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

}  // namespace

SessionConfig ParseSettingName(std::string_view name) {
  const std::vector<std::string_view> parts = SplitList(name, '+');
  SessionConfig config;
  if (parts[0] == "init-auto") {
    config.init_mode = InitMode::kAuto;
  } else if (parts[0] == "init-empty") {
    config.init_mode = InitMode::kEmpty;
  } else {
    Invalid("setting must start with init-auto or init-empty: " +
            std::string(name));
  }
  for (size_t i = 1; i < parts.size(); ++i) {
    std::string_view part = parts[i];
    if (part.substr(0, 3) == "nms" && !config.nms_threshold && i == 1) {
      config.nms_threshold = ParseDouble(part.substr(3));
      if (!config.nms_threshold) Invalid("bad NMS threshold in " + std::string(name));
      continue;
    }
    if (part.substr(0, 4) == "sort" && i + 1 == parts.size()) {
      const size_t dash = part.find("-top");
      const std::string_view order = part.substr(0, dash);
      if (order == "sortscore") {
        config.ordering = Ordering::kByScore;
      } else if (order == "sortdistance") {
        config.ordering = Ordering::kByDistance;
      } else {
        Invalid("unknown ordering in " + std::string(name));
      }
      if (dash != std::string_view::npos) {
        config.top_n = ParseInt(part.substr(dash + 4));
        if (!config.top_n) Invalid("bad top-N in " + std::string(name));
      }
      continue;
    }
    Invalid("unrecognized setting component '" + std::string(part) + "'");
  }
  config.Validate();
  if (config.SettingName() != name) {
    Invalid("setting '" + std::string(name) + "' is not in canonical form '" +
            config.SettingName() + "'");
  }
  return config;
}

std::vector<SessionConfig> SweepGrid::Expand() const {
  if (init_modes.empty() || nms_thresholds.empty() || orderings.empty() ||
      top_ns.empty()) {
    Invalid("every sweep axis needs at least one value");
  }
  std::vector<SessionConfig> configs;
  std::set<std::string> names;
  for (InitMode init : init_modes) {
    for (const auto& nms : nms_thresholds) {
      for (Ordering ordering : orderings) {
        for (const auto& top_n : top_ns) {
          SessionConfig config;
          config.init_mode = init;
          config.nms_threshold = nms;
          config.ordering = ordering;
          config.top_n = top_n;
          config.Validate();
          if (!names.insert(config.SettingName()).second) {
            Invalid("sweep grid repeats setting " + config.SettingName());
          }
          configs.push_back(config);
        }
      }
    }
  }
  return configs;
}

std::vector<InitMode> ParseInitList(std::string_view text) {
  std::vector<InitMode> out;
  for (std::string_view v : SplitList(text, ',')) {
    if (v == "auto") {
      out.push_back(InitMode::kAuto);
    } else if (v == "empty") {
      out.push_back(InitMode::kEmpty);
    } else {
      Invalid("init values are 'auto' or 'empty', got '" + std::string(v) + "'");
    }
  }
  return out;
}

std::vector<std::optional<double>> ParseNmsList(std::string_view text) {
  std::vector<std::optional<double>> out;
  for (std::string_view v : SplitList(text, ',')) {
    if (v == "none") {
      out.push_back(std::nullopt);
      continue;
    }
    const auto value = ParseDouble(v);
    if (!value) Invalid("bad NMS threshold '" + std::string(v) + "'");
    out.push_back(value);
  }
  return out;
}

std::vector<Ordering> ParseOrderingList(std::string_view text) {
  std::vector<Ordering> out;
  for (std::string_view v : SplitList(text, ',')) {
    if (v == "score") {
      out.push_back(Ordering::kByScore);
    } else if (v == "distance") {
      out.push_back(Ordering::kByDistance);
    } else {
      Invalid("ordering values are 'score' or 'distance', got '" +
              std::string(v) + "'");
    }
  }
  return out;
}

std::vector<std::optional<int32_t>> ParseTopNList(std::string_view text) {
  std::vector<std::optional<int32_t>> out;
  for (std::string_view v : SplitList(text, ',')) {
    if (v == "none") {
      out.push_back(std::nullopt);
      continue;
    }
    const auto value = ParseInt(v);
    if (!value) Invalid("bad top-N '" + std::string(v) + "'");
    out.push_back(value);
  }
  return out;
}

std::vector<int64_t> BudgetGrid(int64_t max_budget) {
  if (max_budget < 0) Invalid("budget must be non-negative");
  std::vector<int64_t> budgets(static_cast<size_t>(max_budget) + 1);
  for (size_t i = 0; i < budgets.size(); ++i) budgets[i] = static_cast<int64_t>(i);
  return budgets;
}

std::vector<ActionTrace> RunSetting(const DatasetManifest& manifest,
                                    const SessionConfig& config, int64_t budget,
                                    uint64_t seed, int jobs,
                                    std::vector<AnnotationFile>* annotations) {
  config.Validate();
  std::vector<const ImageEntry*> images;
  for (const ImageEntry& image : manifest.images) {
    if (image.proposals) images.push_back(&image);
  }
  if (images.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no image of the dataset has proposals");
  }
  std::vector<std::optional<ActionTrace>> traces(images.size());
  std::vector<std::optional<AnnotationFile>> files(images.size());
  ParallelFor(images.size(), jobs, [&](size_t i) {
    const ImageEntry& image = *images[i];
    SimulationResult result =
        SimulateImage(MakeSessionContext(manifest, image), image.gt, config,
                      budget, seed, image.id);
    if (annotations) files[i] = AnnotationFromSession(result.session, image.id);
    traces[i] = std::move(result.trace);
  });
  if (annotations) {
    annotations->clear();
    for (auto& f : files) annotations->push_back(std::move(*f));
  }
  std::vector<ActionTrace> out;
  out.reserve(traces.size());
  for (auto& t : traces) out.push_back(std::move(*t));
  return out;
}

std::string DatasetDigest(const DatasetManifest& manifest) {
  return HashToHex(Fnv1a64(ManifestToJson(manifest)));
}

std::string RunFingerprint(const SessionConfig& config, int64_t budget,
                           uint64_t seed, std::string_view dataset_digest) {
  Json j;
  j["session"] = Json::parse(SessionConfigToJson(config));
  j["budget"] = budget;
  j["seed"] = seed;
  j["dataset"] = dataset_digest;
  j["costs"] = CostTableJson();
  return HashToHex(Fnv1a64(j.dump()));
}

CostCurve WriteSettingOutputs(const std::filesystem::path& out,
                              const SessionConfig& config, int64_t budget,
                              uint64_t seed, std::string_view dataset_digest,
                              const std::vector<ActionTrace>& traces) {
  const std::string setting = config.SettingName();
  const std::string fingerprint =
      RunFingerprint(config, budget, seed, dataset_digest);
  const std::vector<int64_t> budgets = BudgetGrid(budget);
  const CostCurve curve = AggregateCurve(traces, budgets);

  const std::filesystem::path trace_dir = out / setting;
  std::filesystem::create_directories(trace_dir);
  std::set<std::string> names;
  for (const ActionTrace& trace : traces) {
    std::string name = SafeFileName(trace.image_id);
    if (!names.insert(name).second) {
      throw Error(ErrorCode::kSchema, "image ids collide on file name " + name);
    }
    WriteFileAtomic(trace_dir / (name + ".trace"),
                    TraceToText(trace, fingerprint, seed));
  }
  WriteFileAtomic(out / (setting + ".csv"), CostCurveCsv(curve));

  Json meta;
  meta["setting"] = setting;
  meta["fingerprint"] = fingerprint;
  meta["session"] = Json::parse(SessionConfigToJson(config));
  meta["budget"] = budget;
  meta["seed"] = seed;
  meta["dataset"] = dataset_digest;
  meta["images"] = traces.size();
  meta["costs"] = CostTableJson();
  int64_t exhausted = 0;
  for (const ActionTrace& t : traces) {
    exhausted += t.terminal == TerminalReason::kBudgetExhausted;
  }
  meta["terminal"] = {{"no-improvement", static_cast<int64_t>(traces.size()) - exhausted},
                      {"budget-exhausted", exhausted}};
  const CurvePoint& last = curve.points.back();
  meta["final"] = {{"mean_recall", last.mean_recall}, {"mean_pq", last.mean_pq}};
  WriteFileAtomic(out / (setting + ".meta.json"), meta.dump(1) + "\n");
  return curve;
}

EvaluationResult EvaluateAnnotations(const DatasetManifest& manifest,
                                     const std::vector<AnnotationSet>& sets) {
  if (sets.empty()) throw Error(ErrorCode::kEmptyInput, "no annotation sets");
  EvaluationResult result;
  // Per set: image id -> label map of the annotation.
  std::vector<std::map<std::string, LabelMap>> label_maps(sets.size());
  for (size_t s = 0; s < sets.size(); ++s) {
    SetEvaluation eval;
    eval.name = sets[s].name;
    for (const AnnotationFile& file : sets[s].files) {
      const ImageEntry* image = manifest.Find(file.image_id);
      if (image == nullptr) {
        throw Error(ErrorCode::kNotFound, "set '" + eval.name +
                                              "' annotates unknown image '" +
                                              file.image_id + "'");
      }
      if (label_maps[s].count(file.image_id)) {
        throw Error(ErrorCode::kSchema, "set '" + eval.name +
                                            "' annotates image '" +
                                            file.image_id + "' twice");
      }
      const AnnotationSession session =
          RestoreSession(MakeSessionContext(manifest, *image), file);
      const Rendering rendering = session.Render();
      eval.image_ids.push_back(file.image_id);
      eval.reports.push_back(Evaluate(rendering, image->gt, *manifest.catalog));
      label_maps[s].emplace(file.image_id, rendering.labels);
    }
    for (const QualityReport& r : eval.reports) {
      eval.mean_recall += r.recall;
      eval.mean_pq += r.panoptic_quality;
    }
    if (!eval.reports.empty()) {
      eval.mean_recall /= static_cast<double>(eval.reports.size());
      eval.mean_pq /= static_cast<double>(eval.reports.size());
    }
    result.sets.push_back(std::move(eval));
  }

  for (const ImageEntry& image : manifest.images) {
    const bool everywhere = std::all_of(
        label_maps.begin(), label_maps.end(),
        [&](const auto& maps) { return maps.count(image.id) > 0; });
    if (everywhere) result.common_images.push_back(image.id);
  }
  if (result.common_images.empty()) {
    throw Error(ErrorCode::kEmptyInput,
                "no image is annotated by every annotation set");
  }
  const size_t n = sets.size();
  result.agreement.assign(n, std::vector<double>(n, 1.0));
  for (size_t a = 0; a < n; ++a) {
    for (size_t b = a + 1; b < n; ++b) {
      double sum = 0.0;
      for (const std::string& id : result.common_images) {
        sum += PixelAgreement(label_maps[a].at(id), label_maps[b].at(id));
      }
      const double mean = sum / static_cast<double>(result.common_images.size());
      result.agreement[a][b] = mean;
      result.agreement[b][a] = mean;
    }
  }
  return result;
}

std::string EvaluationToJson(const EvaluationResult& result) {
  Json root;
  Json sets = Json::array();
  for (const SetEvaluation& s : result.sets) {
    Json j;
    j["name"] = s.name;
    j["mean_recall"] = s.mean_recall;
    j["mean_pq"] = s.mean_pq;
    Json images = Json::array();
    for (size_t i = 0; i < s.image_ids.size(); ++i) {
      Json r = ReportJson(s.reports[i]);
      r["image_id"] = s.image_ids[i];
      images.push_back(std::move(r));
    }
    j["images"] = std::move(images);
    sets.push_back(std::move(j));
  }
  root["sets"] = std::move(sets);
  root["common_images"] = result.common_images;
  root["agreement"] = result.agreement;
  return root.dump(1) + "\n";
}

std::string AgreementCsv(const EvaluationResult& result) {
  std::string csv = "set";
  for (const SetEvaluation& s : result.sets) csv += "," + s.name;
  csv += "\n";
  for (size_t a = 0; a < result.sets.size(); ++a) {
    csv += result.sets[a].name;
    for (double v : result.agreement[a]) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), ",%.6f", v);
      csv += buf;
    }
    csv += "\n";
  }
  return csv;
}

DatasetManifest GenerateDataset(int32_t count, const SceneConfig& scene,
                                uint64_t seed) {
  if (count < 0) Invalid("scene count must be non-negative");
  DatasetManifest manifest;
  manifest.catalog = SyntheticCatalog();
  for (int32_t i = 0; i < count; ++i) {
    const std::string id = "img" + std::to_string(i);
    manifest.images.push_back(ImageEntry{
        id, std::nullopt,
        GenerateScene(*manifest.catalog, scene, DeriveSeed(seed, "scene/" + id)),
        std::nullopt});
  }
  return manifest;
}

void AttachProposals(DatasetManifest& manifest, const NoiseConfig& noise,
                     uint64_t seed) {
  noise.Validate();
  for (ImageEntry& image : manifest.images) {
    image.proposals = Synthesize(image.gt, *manifest.catalog, noise,
                                 DeriveSeed(seed, "proposals/" + image.id));
  }
}

}  // namespace annotkit
