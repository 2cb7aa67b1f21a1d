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


// Command-line entry points: simulate, sweep, evaluate, synth and serve.
//
// Exit status: 0 on success, 1 for usage errors, 2 for data errors.

#include <algorithm>
#include <csignal>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "annotkit/dataset_io.h"
#include "annotkit/error.h"
#include "annotkit/experiment.h"
#include "annotkit/service.h"
#include "annotkit/synth.h"

namespace annotkit {
namespace {

namespace fs = std::filesystem;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

// Raised for flag combinations CLI11 cannot check by itself.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string dataset;
  std::string out;
  uint64_t seed = 42;
  int jobs = 1;
  std::string config;  // optional RunConfig JSON
};

void AddCommon(CLI::App* cmd, CommonOptions& o, bool needs_dataset,
               bool needs_out) {
  auto* d = cmd->add_option("--dataset", o.dataset, "Dataset manifest (JSON)");
  if (needs_dataset) d->required();
  auto* out = cmd->add_option("--out", o.out, "Output location");
  if (needs_out) out->required();
  cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  cmd->add_option("--jobs", o.jobs, "Worker threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

// Library errors raised while interpreting flag values are usage errors.
template <typename Fn>
auto AsUsage(Fn fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

RunConfig LoadRunConfig(const std::string& path) {
  return path.empty() ? RunConfig{} : ParseRunConfig(ReadFile(path));
}

// Restricts the manifest to one side of a split when the run config asks
// for it.
DatasetManifest SelectSubset(DatasetManifest manifest, const RunConfig& run,
                             const std::string& subset) {
  if (subset == "all") return manifest;
  if (!run.exploration_count) {
    throw UsageError("--subset needs split.exploration in the run config");
  }
  const DatasetSplit split = Split(
      manifest, static_cast<size_t>(*run.exploration_count), run.seed);
  const auto& keep = subset == "exploration" ? split.exploration : split.holdout;
  std::vector<ImageEntry> images;
  size_t k = 0;
  for (ImageEntry& image : manifest.images) {
    if (k < keep.size() && keep[k] == image.id) {
      images.push_back(std::move(image));
      ++k;
    }
  }
  manifest.images = std::move(images);
  if (subset == "holdout" && run.holdout_count &&
      static_cast<int64_t>(manifest.images.size()) > *run.holdout_count) {
    manifest.images.erase(
        manifest.images.begin() + static_cast<std::ptrdiff_t>(*run.holdout_count),
        manifest.images.end());
  }
  return manifest;
}

void WriteAnnotations(const fs::path& dir, const DatasetManifest& manifest,
                      const std::vector<AnnotationFile>& files) {
  fs::create_directories(dir);
  for (const AnnotationFile& f : files) {
    SaveAnnotation(f, *manifest.catalog,
                   dir / (SafeFileName(f.image_id) + ".annotation.json"));
  }
}

void PrintCurveSummary(const std::string& setting, const std::string& fingerprint,
                       const CostCurve& curve) {
  const CurvePoint& last = curve.points.back();
  std::printf("%s fingerprint=%s images=%zu final_recall=%.6f final_pq=%.6f\n",
              setting.c_str(), fingerprint.c_str(), last.n_images,
              last.mean_recall, last.mean_pq);
}

int RunSimulate(const CommonOptions& o, const std::string& setting,
                std::optional<int64_t> budget_flag, const std::string& subset,
                bool save_annotations, bool seed_given) {
  RunConfig run = LoadRunConfig(o.config);
  if (!setting.empty()) {
    run.session = AsUsage([&] { return ParseSettingName(setting); });
  }
  if (budget_flag) run.budget = *budget_flag;
  if (seed_given || o.config.empty()) run.seed = o.seed;
  run.Validate();
  const DatasetManifest manifest =
      SelectSubset(LoadManifest(o.dataset), run, subset);
  std::vector<AnnotationFile> annotations;
  const auto traces = RunSetting(manifest, run.session, run.budget, run.seed,
                                 o.jobs, save_annotations ? &annotations : nullptr);
  const std::string digest = DatasetDigest(manifest);
  const CostCurve curve = WriteSettingOutputs(o.out, run.session, run.budget,
                                              run.seed, digest, traces);
  if (save_annotations) {
    WriteAnnotations(fs::path(o.out) / run.session.SettingName() / "annotations",
                     manifest, annotations);
  }
  PrintCurveSummary(run.session.SettingName(),
                    RunFingerprint(run.session, run.budget, run.seed, digest),
                    curve);
  return 0;
}

int RunSweep(const CommonOptions& o, const SweepGrid& grid, int64_t budget) {
  const std::vector<SessionConfig> configs =
      AsUsage([&] { return grid.Expand(); });
  const DatasetManifest manifest = LoadManifest(o.dataset);
  const std::string digest = DatasetDigest(manifest);
  std::string summary = "setting,fingerprint,final_recall,final_pq\n";
  for (const SessionConfig& config : configs) {
    const auto traces = RunSetting(manifest, config, budget, o.seed, o.jobs);
    const CostCurve curve =
        WriteSettingOutputs(o.out, config, budget, o.seed, digest, traces);
    const std::string fingerprint = RunFingerprint(config, budget, o.seed, digest);
    PrintCurveSummary(config.SettingName(), fingerprint, curve);
    char line[256];
    std::snprintf(line, sizeof(line), "%s,%s,%.6f,%.6f\n",
                  config.SettingName().c_str(), fingerprint.c_str(),
                  curve.points.back().mean_recall, curve.points.back().mean_pq);
    summary += line;
  }
  WriteFileAtomic(fs::path(o.out) / "sweep.csv", summary);
  return 0;
}

// "name=dir" or "dir" (named after the directory).
AnnotationSet LoadAnnotationSet(const std::string& arg,
                                const LabelCatalog& catalog) {
  const size_t eq = arg.find('=');
  const fs::path dir = eq == std::string::npos ? arg : arg.substr(eq + 1);
  AnnotationSet set;
  set.name = eq == std::string::npos ? dir.filename().string() : arg.substr(0, eq);
  if (set.name.empty()) set.name = dir.parent_path().filename().string();
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::kIo, "annotation directory " + dir.string() +
                                    " does not exist");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const fs::path& f : files) set.files.push_back(LoadAnnotation(f, catalog));
  return set;
}

int RunEvaluate(const CommonOptions& o, const std::vector<std::string>& args) {
  if (args.size() < 2) {
    throw UsageError("evaluate needs at least two --annotations sets");
  }
  const DatasetManifest manifest = LoadManifest(o.dataset);
  std::vector<AnnotationSet> sets;
  for (const std::string& arg : args) {
    sets.push_back(LoadAnnotationSet(arg, *manifest.catalog));
  }
  const EvaluationResult result = EvaluateAnnotations(manifest, sets);
  fs::create_directories(o.out);
  WriteFileAtomic(fs::path(o.out) / "evaluation.json", EvaluationToJson(result));
  WriteFileAtomic(fs::path(o.out) / "agreement.csv", AgreementCsv(result));
  for (const SetEvaluation& s : result.sets) {
    std::printf("%s images=%zu mean_recall=%.6f mean_pq=%.6f\n", s.name.c_str(),
                s.reports.size(), s.mean_recall, s.mean_pq);
  }
  std::fputs(AgreementCsv(result).c_str(), stdout);
  return 0;
}

int RunSynth(const CommonOptions& o, std::optional<int32_t> scenes,
             int32_t canvas_size) {
  if (scenes.has_value() == !o.dataset.empty()) {
    throw UsageError("synth needs exactly one of --dataset and --scenes");
  }
  const RunConfig run = LoadRunConfig(o.config);
  DatasetManifest manifest;
  if (scenes) {
    SceneConfig scene;
    scene.canvas = {canvas_size, canvas_size};
    manifest = GenerateDataset(*scenes, scene, o.seed);
  } else {
    manifest = LoadManifest(o.dataset);
  }
  AttachProposals(manifest, run.noise, o.seed);
  fs::path out(o.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  SaveManifest(manifest, out);
  std::printf("wrote %zu images to %s digest=%s\n", manifest.images.size(),
              out.string().c_str(), DatasetDigest(manifest).c_str());
  return 0;
}

HttpService* g_service = nullptr;

extern "C" void HandleStopSignal(int) {
  if (g_service != nullptr) g_service->Stop();
}

int RunServe(const CommonOptions& o, const std::string& listen,
             const std::string& persist) {
  const size_t colon = listen.rfind(':');
  if (colon == std::string::npos) {
    throw UsageError("--listen must be host:port");
  }
  const std::string host = listen.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(listen.substr(colon + 1));
  } catch (const std::exception&) {
    throw UsageError("--listen port must be a number");
  }
  auto manifest = std::make_shared<const DatasetManifest>(LoadManifest(o.dataset));
  std::optional<fs::path> persist_dir;
  if (!persist.empty()) persist_dir = persist;
  auto sessions = std::make_shared<SessionManager>(manifest, persist_dir);
  const size_t recovered = sessions->Recover();
  HttpService service(sessions, fs::path(o.dataset).parent_path());
  g_service = &service;
  std::signal(SIGINT, HandleStopSignal);
  std::signal(SIGTERM, HandleStopSignal);
  std::fprintf(stderr, "serving %zu images on %s (%zu sessions recovered)\n",
               manifest->images.size(), listen.c_str(), recovered);
  const bool ok = service.Listen(host, port);
  g_service = nullptr;
  if (!ok && !service.IsRunning()) {
    std::fprintf(stderr, "annotkit: stopped serving on %s\n", listen.c_str());
  }
  return 0;
}

int Main(int argc, char** argv) {
  CLI::App app{"annotkit: machine-assisted panoptic annotation toolkit"};
  app.require_subcommand(1);

  CommonOptions common;
  std::string setting;
  std::optional<int64_t> budget;
  int64_t sweep_budget = 400;
  std::string subset = "all";
  bool save_annotations = false;

  auto* simulate = app.add_subcommand("simulate", "Simulate annotation with one setting");
  AddCommon(simulate, common, true, true);
  simulate->add_option("--config", common.config, "Run configuration (JSON)");
  simulate->add_option("--setting", setting,
                       "Setting name, e.g. init-auto+nms0.5+sortdistance-top4");
  simulate->add_option("--budget", budget, "Micro-action budget per image")
      ->check(CLI::NonNegativeNumber);
  simulate->add_option("--subset", subset, "Images to run: all, exploration or holdout")
      ->check(CLI::IsMember({"all", "exploration", "holdout"}))
      ->capture_default_str();
  simulate->add_flag("--save-annotations", save_annotations,
                     "Also write the final annotation of every image");

  SweepGrid grid;
  std::string init_list = "auto", nms_list = "none", ordering_list = "score",
              top_list = "none";
  auto* sweep = app.add_subcommand("sweep", "Simulate the cross product of settings");
  AddCommon(sweep, common, true, true);
  sweep->add_option("--init", init_list, "auto,empty")->capture_default_str();
  sweep->add_option("--nms", nms_list, "NMS thresholds, 'none' disables")
      ->capture_default_str();
  sweep->add_option("--ordering", ordering_list, "score,distance")->capture_default_str();
  sweep->add_option("--top-n", top_list, "Candidate limits, 'none' disables")
      ->capture_default_str();
  sweep->add_option("--budget", sweep_budget, "Micro-action budget per image")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);

  std::vector<std::string> annotation_sets;
  auto* evaluate = app.add_subcommand("evaluate", "Compare annotation sets");
  AddCommon(evaluate, common, true, true);
  evaluate->add_option("--annotations", annotation_sets,
                       "Annotation directory, optionally as name=dir (repeat)")
      ->required();

  std::optional<int32_t> scenes;
  int32_t canvas_size = 128;
  auto* synth = app.add_subcommand("synth", "Attach synthetic proposals to a dataset");
  AddCommon(synth, common, false, true);
  synth->add_option("--config", common.config, "Run configuration with noise settings");
  synth->add_option("--scenes", scenes, "Generate this many scenes instead of --dataset")
      ->check(CLI::NonNegativeNumber);
  synth->add_option("--canvas", canvas_size, "Side length of generated scenes")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  std::string listen = "127.0.0.1:8080";
  std::string persist;
  auto* serve = app.add_subcommand("serve", "Serve annotation sessions over HTTP");
  serve->add_option("--dataset", common.dataset, "Dataset manifest (JSON)")
      ->envname("ANNOTKIT_DATASET")
      ->required();
  serve->add_option("--listen", listen, "host:port")
      ->envname("ANNOTKIT_LISTEN")
      ->capture_default_str();
  serve->add_option("--persist", persist, "Session persistence directory")
      ->envname("ANNOTKIT_PERSIST_DIR");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (simulate->parsed()) {
      return RunSimulate(common, setting, budget, subset, save_annotations,
                         simulate->count("--seed") > 0);
    }
    if (sweep->parsed()) {
      AsUsage([&] {
        grid.init_modes = ParseInitList(init_list);
        grid.nms_thresholds = ParseNmsList(nms_list);
        grid.orderings = ParseOrderingList(ordering_list);
        grid.top_ns = ParseTopNList(top_list);
      });
      return RunSweep(common, grid, sweep_budget);
    }
    if (evaluate->parsed()) return RunEvaluate(common, annotation_sets);
    if (synth->parsed()) return RunSynth(common, scenes, canvas_size);
    if (serve->parsed()) return RunServe(common, listen, persist);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "annotkit: %s\n", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    std::fprintf(stderr, "annotkit: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "annotkit: %s\n", e.what());
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace
}  // namespace annotkit

int main(int argc, char** argv) { return annotkit::Main(argc, argv); }
