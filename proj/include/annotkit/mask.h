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

#ifndef ANNOTKIT_MASK_H_
#define ANNOTKIT_MASK_H_

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace annotkit {

struct Canvas {
  int32_t width = 0;
  int32_t height = 0;

  int64_t area() const { return int64_t{width} * height; }
  bool operator==(const Canvas&) const = default;

  // Throws kInvalidCanvas unless both dimensions are positive.
  void Validate() const;
};

// Pixel coordinates: x is the column, y the row. Real-valued points lie in
// the pixel floor(x), floor(y).
struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

// Row-major boolean grid.
class Bitmap {
 public:
  explicit Bitmap(Canvas canvas);
  Bitmap(Canvas canvas, std::vector<uint8_t> bits);

  const Canvas& canvas() const { return canvas_; }
  bool at(int32_t x, int32_t y) const { return bits_[Index(x, y)] != 0; }
  void set(int32_t x, int32_t y, bool value = true) {
    bits_[Index(x, y)] = value ? 1 : 0;
  }
  std::span<const uint8_t> bits() const { return bits_; }
  std::span<uint8_t> mutable_bits() { return bits_; }

  bool operator==(const Bitmap&) const = default;

 private:
  size_t Index(int32_t x, int32_t y) const {
    return static_cast<size_t>(y) * canvas_.width + x;
  }

  Canvas canvas_;
  std::vector<uint8_t> bits_;
};

// Run-length encoded binary mask. Runs alternate background/foreground in
// row-major order, starting with background. Only the leading run may be 0.
class Mask {
 public:
  static Mask Empty(Canvas canvas);
  static Mask Full(Canvas canvas);
  // Validates the canonical-form invariants; throws kCorruptMask.
  static Mask FromRuns(Canvas canvas, std::vector<uint32_t> runs);
  // Parses the interchange form "WxH:n0,n1,...".
  static Mask Parse(std::string_view text);

  const Canvas& canvas() const { return canvas_; }
  const std::vector<uint32_t>& runs() const { return runs_; }
  int64_t area() const { return area_; }
  bool empty() const { return area_ == 0; }

  // True iff the pixel at row-major index `index` is set.
  bool ContainsIndex(int64_t index) const;

  std::string ToString() const;

  bool operator==(const Mask&) const = default;

 private:
  Mask(Canvas canvas, std::vector<uint32_t> runs, int64_t area)
      : canvas_(canvas), runs_(std::move(runs)), area_(area) {}

  Canvas canvas_;
  std::vector<uint32_t> runs_;
  int64_t area_ = 0;
};

struct SpatialMoments {
  Point center;
  // Row-major [xx, xy, yx, yy], regularized.
  std::array<double, 4> covariance{};
  int64_t area = 0;
};

// Added to both diagonal entries of every covariance.
inline constexpr double kCovarianceRegularization = 0.25;

Mask Encode(const Bitmap& bitmap);
Bitmap Decode(const Mask& mask);

// Invokes fn(start, length) for each foreground run, start a row-major index.
void ForEachForegroundRun(const Mask& mask,
                          const std::function<void(int64_t, int64_t)>& fn);
// Row-major indices of all set pixels, ascending.
std::vector<uint32_t> SetPixelIndices(const Mask& mask);
// Row-major index of the k-th set pixel (0-based, k < area).
int64_t NthSetPixel(const Mask& mask, int64_t k);

int64_t IntersectionArea(const Mask& a, const Mask& b);
// |a∩b| / |a∪b|, 0 when both masks are empty.
double Iou(const Mask& a, const Mask& b);
Mask Union(const Mask& a, const Mask& b);
Mask Intersection(const Mask& a, const Mask& b);
Mask Difference(const Mask& a, const Mask& b);

bool Contains(const Mask& mask, Point p);

SpatialMoments Moments(const Mask& mask);
double Mahalanobis(Point p, const SpatialMoments& moments);

// Per-pixel integer map. kUnlabeled marks pixels without an owner.
struct LabelMap {
  static constexpr int32_t kUnlabeled = -1;

  LabelMap() = default;
  explicit LabelMap(Canvas c)
      : canvas(c), values(static_cast<size_t>(c.area()), kUnlabeled) {}

  int32_t at(int32_t x, int32_t y) const {
    return values[static_cast<size_t>(y) * canvas.width + x];
  }
  bool operator==(const LabelMap&) const = default;

  Canvas canvas;
  std::vector<int32_t> values;
};

struct RasterLayer {
  std::reference_wrapper<const Mask> mask;
  int32_t id;
};

// Each pixel receives the id of the front-most (lowest index) layer covering
// it.
LabelMap Rasterize(std::span<const RasterLayer> front_to_back, Canvas canvas);

}  // namespace annotkit

#endif  // ANNOTKIT_MASK_H_
