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

#include "annotkit/mask.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "annotkit/error.h"

namespace annotkit {
namespace {

// Appends runs while keeping the canonical form (adjacent equal values are
// merged, only the leading background run may be 0).
class RunBuilder {
 public:
  void Append(bool value, int64_t length) {
    if (length <= 0) return;
    if (value == current_) {
      runs_.back() += static_cast<uint32_t>(length);
    } else {
      runs_.push_back(static_cast<uint32_t>(length));
      current_ = value;
    }
  }
  std::vector<uint32_t> Finish() && { return std::move(runs_); }

 private:
  std::vector<uint32_t> runs_{0};
  bool current_ = false;
};

class RunCursor {
 public:
  explicit RunCursor(const Mask& mask) : runs_(mask.runs()) {
    remaining_ = runs_.empty() ? 0 : runs_[0];
    Skip();
  }
  bool done() const { return next_ > runs_.size(); }
  bool value() const { return value_; }
  int64_t remaining() const { return remaining_; }
  void Advance(int64_t n) {
    remaining_ -= n;
    Skip();
  }

 private:
  void Skip() {
    while (remaining_ == 0 && next_ <= runs_.size()) {
      if (next_ == runs_.size()) {
        ++next_;
        return;
      }
      remaining_ = runs_[next_++];
      value_ = !value_;
    }
  }

  std::span<const uint32_t> runs_;
  size_t next_ = 1;
  int64_t remaining_ = 0;
  bool value_ = false;
};

template <typename Op>
Mask Merge(const Mask& a, const Mask& b, Op op) {
  if (!(a.canvas() == b.canvas())) {
    throw Error(ErrorCode::kCanvasMismatch, "set operation on different canvases");
  }
  RunCursor ca(a);
  RunCursor cb(b);
  RunBuilder out;
  while (!ca.done() && !cb.done()) {
    const int64_t step = std::min(ca.remaining(), cb.remaining());
    out.Append(op(ca.value(), cb.value()), step);
    ca.Advance(step);
    cb.Advance(step);
  }
  return Mask::FromRuns(a.canvas(), std::move(out).Finish());
}

void RequireSameCanvas(const Mask& a, const Mask& b) {
  if (!(a.canvas() == b.canvas())) {
    throw Error(ErrorCode::kCanvasMismatch,
                "masks on " + std::to_string(a.canvas().width) + "x" +
                    std::to_string(a.canvas().height) + " and " +
                    std::to_string(b.canvas().width) + "x" +
                    std::to_string(b.canvas().height));
  }
}

bool ParseUint(std::string_view text, uint64_t& out) {
  if (text.empty()) return false;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

// Sum of x^2 for x in [0, n].
__int128 SumSquares(int64_t n) {
  if (n < 0) return 0;
  return static_cast<__int128>(n) * (n + 1) * (2 * n + 1) / 6;
}

}  // namespace

void Canvas::Validate() const {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kInvalidCanvas,
                "canvas " + std::to_string(width) + "x" +
                    std::to_string(height) + " has no pixels");
  }
}

Bitmap::Bitmap(Canvas canvas) : canvas_(canvas) {
  canvas_.Validate();
  bits_.assign(static_cast<size_t>(canvas_.area()), 0);
}

Bitmap::Bitmap(Canvas canvas, std::vector<uint8_t> bits)
    : canvas_(canvas), bits_(std::move(bits)) {
  canvas_.Validate();
  if (static_cast<int64_t>(bits_.size()) != canvas_.area()) {
    throw Error(ErrorCode::kInvalidCanvas,
                "bitmap size does not match its canvas");
  }
}

Mask Mask::Empty(Canvas canvas) {
  canvas.Validate();
  return Mask(canvas, {static_cast<uint32_t>(canvas.area())}, 0);
}

Mask Mask::Full(Canvas canvas) {
  canvas.Validate();
  return Mask(canvas, {0, static_cast<uint32_t>(canvas.area())},
              canvas.area());
}

Mask Mask::FromRuns(Canvas canvas, std::vector<uint32_t> runs) {
  canvas.Validate();
  if (runs.empty()) throw Error(ErrorCode::kCorruptMask, "no runs");
  int64_t total = 0;
  int64_t area = 0;
  for (size_t i = 0; i < runs.size(); ++i) {
    if (i > 0 && runs[i] == 0) {
      throw Error(ErrorCode::kCorruptMask,
                  "run " + std::to_string(i) + " is zero");
    }
    total += runs[i];
    if (i % 2 == 1) area += runs[i];
  }
  if (total != canvas.area()) {
    throw Error(ErrorCode::kCorruptMask,
                "runs sum to " + std::to_string(total) + ", canvas has " +
                    std::to_string(canvas.area()) + " pixels");
  }
  return Mask(canvas, std::move(runs), area);
}

Mask Mask::Parse(std::string_view text) {
  const size_t colon = text.find(':');
  const size_t x = text.find('x');
  if (colon == std::string_view::npos || x == std::string_view::npos ||
      x > colon) {
    throw Error(ErrorCode::kCorruptMask,
                "malformed RLE text '" + std::string(text) + "'");
  }
  uint64_t width = 0;
  uint64_t height = 0;
  if (!ParseUint(text.substr(0, x), width) ||
      !ParseUint(text.substr(x + 1, colon - x - 1), height) ||
      width > INT32_MAX || height > INT32_MAX) {
    throw Error(ErrorCode::kCorruptMask,
                "malformed canvas in '" + std::string(text) + "'");
  }
  const Canvas canvas{static_cast<int32_t>(width),
                      static_cast<int32_t>(height)};
  std::vector<uint32_t> runs;
  std::string_view rest = text.substr(colon + 1);
  while (true) {
    const size_t comma = rest.find(',');
    uint64_t run = 0;
    if (!ParseUint(rest.substr(0, comma), run) || run > UINT32_MAX) {
      throw Error(ErrorCode::kCorruptMask,
                  "malformed run in '" + std::string(text) + "'");
    }
    runs.push_back(static_cast<uint32_t>(run));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return FromRuns(canvas, std::move(runs));
}

bool Mask::ContainsIndex(int64_t index) const {
  int64_t pos = 0;
  for (size_t i = 0; i < runs_.size(); ++i) {
    pos += runs_[i];
    if (index < pos) return i % 2 == 1;
  }
  return false;
}

std::string Mask::ToString() const {
  std::string out = std::to_string(canvas_.width) + "x" +
                    std::to_string(canvas_.height) + ":";
  for (size_t i = 0; i < runs_.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(runs_[i]);
  }
  return out;
}

Mask Encode(const Bitmap& bitmap) {
  RunBuilder builder;
  const auto bits = bitmap.bits();
  size_t i = 0;
  while (i < bits.size()) {
    const bool value = bits[i] != 0;
    size_t j = i;
    while (j < bits.size() && (bits[j] != 0) == value) ++j;
    builder.Append(value, static_cast<int64_t>(j - i));
    i = j;
  }
  return Mask::FromRuns(bitmap.canvas(), std::move(builder).Finish());
}

Bitmap Decode(const Mask& mask) {
  Bitmap bitmap(mask.canvas());
  auto bits = bitmap.mutable_bits();
  ForEachForegroundRun(mask, [&](int64_t start, int64_t length) {
    std::fill_n(bits.begin() + start, length, uint8_t{1});
  });
  return bitmap;
}

void ForEachForegroundRun(const Mask& mask,
                          const std::function<void(int64_t, int64_t)>& fn) {
  const auto runs = mask.runs();
  int64_t pos = 0;
  for (size_t i = 0; i < runs.size(); ++i) {
    if (i % 2 == 1) fn(pos, runs[i]);
    pos += runs[i];
  }
}

std::vector<uint32_t> SetPixelIndices(const Mask& mask) {
  std::vector<uint32_t> out;
  out.reserve(static_cast<size_t>(mask.area()));
  ForEachForegroundRun(mask, [&](int64_t start, int64_t length) {
    for (int64_t k = 0; k < length; ++k) {
      out.push_back(static_cast<uint32_t>(start + k));
    }
  });
  return out;
}

int64_t NthSetPixel(const Mask& mask, int64_t k) {
  if (k < 0 || k >= mask.area()) {
    throw Error(ErrorCode::kOutOfBounds, "set-pixel rank out of range");
  }
  const auto runs = mask.runs();
  int64_t pos = 0;
  for (size_t i = 0; i < runs.size(); ++i) {
    if (i % 2 == 1) {
      if (k < runs[i]) return pos + k;
      k -= runs[i];
    }
    pos += runs[i];
  }
  return -1;  // unreachable for valid masks
}

int64_t IntersectionArea(const Mask& a, const Mask& b) {
  RequireSameCanvas(a, b);
  RunCursor ca(a);
  RunCursor cb(b);
  int64_t inter = 0;
  while (!ca.done() && !cb.done()) {
    const int64_t step = std::min(ca.remaining(), cb.remaining());
    if (ca.value() && cb.value()) inter += step;
    ca.Advance(step);
    cb.Advance(step);
  }
  return inter;
}

double Iou(const Mask& a, const Mask& b) {
  const int64_t inter = IntersectionArea(a, b);
  const int64_t uni = a.area() + b.area() - inter;
  if (uni == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

Mask Union(const Mask& a, const Mask& b) {
  return Merge(a, b, [](bool x, bool y) { return x || y; });
}

Mask Intersection(const Mask& a, const Mask& b) {
  return Merge(a, b, [](bool x, bool y) { return x && y; });
}

Mask Difference(const Mask& a, const Mask& b) {
  return Merge(a, b, [](bool x, bool y) { return x && !y; });
}

bool Contains(const Mask& mask, Point p) {
  const Canvas& c = mask.canvas();
  if (!(p.x >= 0.0 && p.x < c.width && p.y >= 0.0 && p.y < c.height)) {
    throw Error(ErrorCode::kOutOfBounds,
                "point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                    ") outside canvas");
  }
  const auto col = static_cast<int64_t>(std::floor(p.x));
  const auto row = static_cast<int64_t>(std::floor(p.y));
  return mask.ContainsIndex(row * c.width + col);
}

SpatialMoments Moments(const Mask& mask) {
  if (mask.empty()) throw Error(ErrorCode::kEmptyMask, "moments of empty mask");
  const int64_t width = mask.canvas().width;
  __int128 sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  ForEachForegroundRun(mask, [&](int64_t start, int64_t length) {
    while (length > 0) {
      const int64_t row = start / width;
      const int64_t col = start % width;
      const int64_t k = std::min(length, width - col);
      const int64_t last = col + k - 1;
      const __int128 sum_x =
          static_cast<__int128>(k) * (col + last) / 2;
      sx += sum_x;
      sxx += SumSquares(last) - SumSquares(col - 1);
      sy += static_cast<__int128>(k) * row;
      syy += static_cast<__int128>(k) * row * row;
      sxy += sum_x * row;
      start += k;
      length -= k;
    }
  });
  const __int128 n = mask.area();
  const long double n2 = static_cast<long double>(n) * n;
  SpatialMoments m;
  m.area = mask.area();
  m.center = {static_cast<double>(static_cast<long double>(sx) / n),
              static_cast<double>(static_cast<long double>(sy) / n)};
  const auto cxx = static_cast<double>(static_cast<long double>(n * sxx - sx * sx) / n2);
  const auto cyy = static_cast<double>(static_cast<long double>(n * syy - sy * sy) / n2);
  const auto cxy = static_cast<double>(static_cast<long double>(n * sxy - sx * sy) / n2);
  m.covariance = {cxx + kCovarianceRegularization, cxy, cxy,
                  cyy + kCovarianceRegularization};
  return m;
}

double Mahalanobis(Point p, const SpatialMoments& moments) {
  const auto& s = moments.covariance;
  const double det = s[0] * s[3] - s[1] * s[2];
  if (!(det > 0.0) || !(s[0] > 0.0)) {
    throw Error(ErrorCode::kNumericalDegenerate,
                "covariance is not positive definite");
  }
  const double dx = p.x - moments.center.x;
  const double dy = p.y - moments.center.y;
  const double q = (s[3] * dx * dx - (s[1] + s[2]) * dx * dy + s[0] * dy * dy) / det;
  return std::sqrt(std::max(q, 0.0));
}

LabelMap Rasterize(std::span<const RasterLayer> front_to_back, Canvas canvas) {
  canvas.Validate();
  LabelMap out(canvas);
  for (auto it = front_to_back.rbegin(); it != front_to_back.rend(); ++it) {
    const Mask& mask = it->mask.get();
    if (!(mask.canvas() == canvas)) {
      throw Error(ErrorCode::kCanvasMismatch, "layer canvas differs from target");
    }
    const int32_t id = it->id;
    ForEachForegroundRun(mask, [&](int64_t start, int64_t length) {
      std::fill_n(out.values.begin() + start, length, id);
    });
  }
  return out;
}

}  // namespace annotkit
