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


#include "annotkit/synth.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "annotkit/error.h"

namespace annotkit {
namespace {

using Rng = std::mt19937_64;

void CheckProbability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(name) + " must be in [0, 1]");
  }
}

// Offsets of a disk of radius r, including the center.
std::vector<std::pair<int32_t, int32_t>> DiskOffsets(int32_t r) {
  std::vector<std::pair<int32_t, int32_t>> offsets;
  for (int32_t dy = -r; dy <= r; ++dy) {
    for (int32_t dx = -r; dx <= r; ++dx) {
      if (dx * dx + dy * dy <= r * r) offsets.emplace_back(dx, dy);
    }
  }
  return offsets;
}

// Marks every pixel within the disk around a set pixel of `in`.
std::vector<uint8_t> Dilate(std::span<const uint8_t> in, const Canvas& c,
                            int32_t r) {
  const auto offsets = DiskOffsets(r);
  std::vector<uint8_t> out(in.size(), 0);
  for (int32_t y = 0; y < c.height; ++y) {
    for (int32_t x = 0; x < c.width; ++x) {
      if (!in[static_cast<size_t>(y) * c.width + x]) continue;
      for (const auto& [dx, dy] : offsets) {
        const int32_t nx = x + dx, ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= c.width || ny >= c.height) continue;
        out[static_cast<size_t>(ny) * c.width + nx] = 1;
      }
    }
  }
  return out;
}

Mask EllipseMask(const Canvas& c, double cx, double cy, double ax, double ay) {
  Bitmap bits(c);
  for (int32_t y = 0; y < c.height; ++y) {
    for (int32_t x = 0; x < c.width; ++x) {
      const double u = (x + 0.5 - cx) / ax, v = (y + 0.5 - cy) / ay;
      if (u * u + v * v <= 1.0) bits.set(x, y);
    }
  }
  return Encode(bits);
}

Mask RectMask(const Canvas& c, double cx, double cy, double hx, double hy) {
  Bitmap bits(c);
  for (int32_t y = 0; y < c.height; ++y) {
    for (int32_t x = 0; x < c.width; ++x) {
      if (std::abs(x + 0.5 - cx) <= hx && std::abs(y + 0.5 - cy) <= hy) {
        bits.set(x, y);
      }
    }
  }
  return Encode(bits);
}

double ClampScore(double s) { return std::clamp(s, 0.0, 1.0); }

}  // namespace

void NoiseConfig::Validate() const {
  if (variants_per_target < 0 || dilate_erode_radius_max < 0 ||
      distractor_count < 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "noise counts and radii must be non-negative");
  }
  if (!(translation_jitter_std >= 0.0) || !(score_noise_std >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "noise deviations must be non-negative");
  }
  if (max_proposals < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_proposals must be >= 1");
  }
  CheckProbability(label_noise_prob, "label_noise_prob");
  CheckProbability(miss_prob, "miss_prob");
  CheckProbability(base_quality, "base_quality");
  CheckProbability(distractor_quality, "distractor_quality");
  CheckProbability(silhouette_prob, "silhouette_prob");
}

Mask Morph(const Mask& mask, int32_t radius) {
  if (radius == 0) return mask;
  const Bitmap bits = Decode(mask);
  const Canvas& c = mask.canvas();
  Bitmap out(c);
  if (radius > 0) {
    const auto grown = Dilate(bits.bits(), c, radius);
    std::copy(grown.begin(), grown.end(), out.mutable_bits().begin());
  } else {
    // Erosion keeps pixels whose whole disk is inside the mask; the canvas
    // border does not erode.
    std::vector<uint8_t> outside(bits.bits().size());
    for (size_t i = 0; i < outside.size(); ++i) outside[i] = !bits.bits()[i];
    const auto near_outside = Dilate(outside, c, -radius);
    for (size_t i = 0; i < outside.size(); ++i) {
      out.mutable_bits()[i] = bits.bits()[i] && !near_outside[i];
    }
  }
  return Encode(out);
}

Mask Translate(const Mask& mask, int32_t dx, int32_t dy) {
  const Canvas& c = mask.canvas();
  const Bitmap bits = Decode(mask);
  Bitmap out(c);
  for (int32_t y = 0; y < c.height; ++y) {
    for (int32_t x = 0; x < c.width; ++x) {
      if (!bits.at(x, y)) continue;
      const int32_t nx = x + dx, ny = y + dy;
      if (nx < 0 || ny < 0 || nx >= c.width || ny >= c.height) continue;
      out.set(nx, ny);
    }
  }
  return Encode(out);
}

Mask ConvexHull(const Mask& mask) {
  const Canvas& c = mask.canvas();
  const Bitmap bits = Decode(mask);
  // Row extremes of set pixel centers are enough to span the hull.
  std::vector<std::pair<int64_t, int64_t>> pts;
  for (int32_t y = 0; y < c.height; ++y) {
    int32_t lo = -1, hi = -1;
    for (int32_t x = 0; x < c.width; ++x) {
      if (!bits.at(x, y)) continue;
      if (lo < 0) lo = x;
      hi = x;
    }
    if (lo < 0) continue;
    pts.emplace_back(lo, y);
    if (hi != lo) pts.emplace_back(hi, y);
  }
  if (pts.size() < 3) return mask;
  std::sort(pts.begin(), pts.end());
  auto cross = [](const auto& o, const auto& a, const auto& b) {
    return (a.first - o.first) * (b.second - o.second) -
           (a.second - o.second) * (b.first - o.first);
  };
  // Andrew's monotone chain, counter-clockwise.
  std::vector<std::pair<int64_t, int64_t>> hull(2 * pts.size());
  size_t k = 0;
  for (size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i - 1]) <= 0) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  Bitmap out(c);
  for (int32_t y = 0; y < c.height; ++y) {
    for (int32_t x = 0; x < c.width; ++x) {
      bool inside = true;
      for (size_t i = 0; i < hull.size() && inside; ++i) {
        const auto& a = hull[i];
        const auto& b = hull[(i + 1) % hull.size()];
        inside = cross(a, b, std::pair<int64_t, int64_t>(x, y)) >= 0;
      }
      if (inside) out.set(x, y);
    }
  }
  // Degenerate (collinear) hulls keep the original pixels.
  return Union(Encode(out), mask);
}

ProposalSet Synthesize(const GroundTruthImage& gt, const LabelCatalog& catalog,
                       const NoiseConfig& config, uint64_t seed,
                       std::vector<int32_t>* sources) {
  config.Validate();
  const Canvas& canvas = gt.canvas();
  canvas.Validate();
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> score_noise(0.0, 1.0);
  std::normal_distribution<double> jitter(0.0, 1.0);
  std::uniform_int_distribution<int32_t> radius(-config.dilate_erode_radius_max,
                                                config.dilate_erode_radius_max);
  const int32_t num_labels = static_cast<int32_t>(catalog.size());

  auto other_label = [&](LabelIndex label) {
    if (num_labels < 2) return label;
    std::uniform_int_distribution<int32_t> pick(0, num_labels - 2);
    const int32_t v = pick(rng);
    return LabelIndex(v >= label.value() ? v + 1 : v);
  };

  struct Emitted {
    Segment segment;
    int32_t source;
  };
  std::vector<Emitted> emitted;
  int32_t next_id = 0;
  for (size_t t = 0; t < gt.targets().size(); ++t) {
    const GtTarget& target = gt.targets()[t];
    if (unit(rng) < config.miss_prob) continue;
    const Mask silhouette = ConvexHull(target.mask);
    for (int32_t v = 0; v < config.variants_per_target; ++v) {
      const bool whole = unit(rng) < config.silhouette_prob;
      const Mask& base = whole ? silhouette : target.mask;
      Mask mask = Morph(base, radius(rng));
      const int32_t dx = static_cast<int32_t>(
          std::lround(config.translation_jitter_std * jitter(rng)));
      const int32_t dy = static_cast<int32_t>(
          std::lround(config.translation_jitter_std * jitter(rng)));
      mask = Translate(mask, dx, dy);
      LabelIndex label = target.label;
      if (unit(rng) < config.label_noise_prob) label = other_label(label);
      const double score =
          ClampScore(config.base_quality * Iou(mask, base) +
                     config.score_noise_std * score_noise(rng));
      if (mask.empty()) continue;
      emitted.push_back({{SegmentId(next_id++), std::move(mask), label, score},
                         static_cast<int32_t>(t)});
    }
  }

  std::uniform_real_distribution<double> cx(0.0, canvas.width);
  std::uniform_real_distribution<double> cy(0.0, canvas.height);
  const double max_axis = std::max(2.0, std::min(canvas.width, canvas.height) / 2.0);
  std::uniform_real_distribution<double> axis(std::min(4.0, max_axis), max_axis);
  std::uniform_int_distribution<int32_t> any_label(0, std::max(num_labels - 1, 0));
  for (int32_t i = 0; i < config.distractor_count && num_labels > 0; ++i) {
    const double x = cx(rng), y = cy(rng), ax = axis(rng), ay = axis(rng);
    const LabelIndex label(any_label(rng));
    const double score = ClampScore(config.distractor_quality +
                                    config.score_noise_std * score_noise(rng));
    Mask mask = EllipseMask(canvas, x, y, ax, ay);
    if (mask.empty()) continue;
    emitted.push_back({{SegmentId(next_id++), std::move(mask), label, score}, -1});
  }

  std::stable_sort(emitted.begin(), emitted.end(),
                   [](const Emitted& a, const Emitted& b) {
                     return a.segment.score > b.segment.score;
                   });
  if (emitted.size() > static_cast<size_t>(config.max_proposals)) {
    emitted.erase(emitted.begin() + config.max_proposals, emitted.end());
  }
  std::vector<Segment> segments;
  segments.reserve(emitted.size());
  if (sources != nullptr) sources->clear();
  for (Emitted& e : emitted) {
    segments.push_back(std::move(e.segment));
    if (sources != nullptr) sources->push_back(e.source);
  }
  return ProposalSet(canvas, std::move(segments));
}

ProposalSet OracleProposals(const GroundTruthImage& gt) {
  std::vector<Segment> segments;
  const double canvas_area = static_cast<double>(gt.canvas().area());
  int32_t id = 0;
  for (const GtTarget& t : gt.targets()) {
    segments.push_back({SegmentId(id++), t.mask, t.label,
                        static_cast<double>(t.mask.area()) / canvas_area});
  }
  std::stable_sort(segments.begin(), segments.end(),
                   [](const Segment& a, const Segment& b) {
                     return a.score > b.score;
                   });
  return ProposalSet(gt.canvas(), std::move(segments));
}

std::shared_ptr<const LabelCatalog> SyntheticCatalog() {
  return std::make_shared<const LabelCatalog>(std::vector<Label>{
      {"person", LabelKind::kThing},
      {"car", LabelKind::kThing},
      {"dog", LabelKind::kThing},
      {"cat", LabelKind::kThing},
      {"bicycle", LabelKind::kThing},
      {"chair", LabelKind::kThing},
      {"sky", LabelKind::kStuff},
      {"grass", LabelKind::kStuff},
      {"road", LabelKind::kStuff},
      {"wall", LabelKind::kStuff},
      {"water", LabelKind::kStuff},
  });
}

GroundTruthImage GenerateScene(const LabelCatalog& catalog,
                               const SceneConfig& config, uint64_t seed) {
  const Canvas& c = config.canvas;
  c.Validate();
  std::vector<LabelIndex> things, stuff;
  for (size_t i = 0; i < catalog.size(); ++i) {
    const LabelIndex label(static_cast<int32_t>(i));
    (catalog.is_thing(label) ? things : stuff).push_back(label);
  }
  if (things.empty() || stuff.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "scene generation needs thing and stuff classes");
  }
  Rng rng(seed);
  std::uniform_real_distribution<double> ux(0.0, c.width), uy(0.0, c.height);

  // Stuff: Voronoi cells of distinct stuff classes.
  const int32_t n_stuff = std::min<int32_t>(
      std::uniform_int_distribution<int32_t>(config.min_stuff, config.max_stuff)(rng),
      static_cast<int32_t>(stuff.size()));
  std::shuffle(stuff.begin(), stuff.end(), rng);
  std::vector<std::pair<double, double>> sites;
  for (int32_t i = 0; i < n_stuff; ++i) sites.emplace_back(ux(rng), uy(rng));
  std::vector<Bitmap> cells(static_cast<size_t>(n_stuff), Bitmap(c));
  for (int32_t y = 0; y < c.height; ++y) {
    for (int32_t x = 0; x < c.width; ++x) {
      size_t best = 0;
      double best_d = 0.0;
      for (size_t s = 0; s < sites.size(); ++s) {
        const double ddx = x + 0.5 - sites[s].first, ddy = y + 0.5 - sites[s].second;
        const double d = ddx * ddx + ddy * ddy;
        if (s == 0 || d < best_d) {
          best = s;
          best_d = d;
        }
      }
      cells[best].set(x, y);
    }
  }

  // Things: large instances first, then small ones painted on top, many of
  // them resting on a large instance.
  std::uniform_int_distribution<size_t> thing_label(0, things.size() - 1);
  std::vector<std::pair<Mask, LabelIndex>> shapes;
  auto add_shape = [&](double x, double y, double hx, double hy) {
    const bool ellipse = rng() % 2 == 0;
    const LabelIndex label = things[thing_label(rng)];
    shapes.emplace_back(ellipse ? EllipseMask(c, x, y, hx, hy)
                                : RectMask(c, x, y, hx, hy),
                        label);
  };
  std::uniform_real_distribution<double> large_half(config.large_half_min,
                                                    config.large_half_max);
  const int32_t n_large = std::uniform_int_distribution<int32_t>(
      config.min_large_things, config.max_large_things)(rng);
  for (int32_t i = 0; i < n_large; ++i) {
    const double x = ux(rng), y = uy(rng);
    const double hx = large_half(rng), hy = large_half(rng);
    add_shape(x, y, hx, hy);
  }
  const size_t large_count = shapes.size();
  std::uniform_real_distribution<double> small_half(config.small_half_min,
                                                    config.small_half_max);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int32_t n_small = std::uniform_int_distribution<int32_t>(
      config.min_small_things, config.max_small_things)(rng);
  for (int32_t i = 0; i < n_small; ++i) {
    double x = ux(rng), y = uy(rng);
    if (large_count > 0 && unit(rng) < config.nest_prob) {
      const Mask& parent =
          shapes[std::uniform_int_distribution<size_t>(0, large_count - 1)(rng)]
              .first;
      if (!parent.empty()) {
        const int64_t pixel = NthSetPixel(
            parent, std::uniform_int_distribution<int64_t>(0, parent.area() - 1)(rng));
        x = static_cast<double>(pixel % c.width) + 0.5;
        y = static_cast<double>(pixel / c.width) + 0.5;
      }
    }
    const double hx = small_half(rng), hy = small_half(rng);
    add_shape(x, y, hx, hy);
  }
  std::vector<GtSegment> segments;
  Mask occluders = Mask::Empty(c);
  Mask thing_pixels = Mask::Empty(c);
  for (auto it = shapes.rbegin(); it != shapes.rend(); ++it) {
    Mask visible = Difference(it->first, occluders);
    occluders = Union(occluders, it->first);
    if (visible.area() < config.min_instance_area) continue;
    thing_pixels = Union(thing_pixels, visible);
    segments.push_back({std::move(visible), it->second});
  }
  std::reverse(segments.begin(), segments.end());
  for (int32_t s = 0; s < n_stuff; ++s) {
    Mask region = Difference(Encode(cells[static_cast<size_t>(s)]), thing_pixels);
    if (!region.empty()) segments.push_back({std::move(region), stuff[static_cast<size_t>(s)]});
  }
  return GroundTruthImage::Create(c, std::move(segments), catalog);
}

}  // namespace annotkit
