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

#ifndef ANNOTKIT_TRACE_H_
#define ANNOTKIT_TRACE_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "annotkit/engine.h"

namespace annotkit {

struct TraceStep {
  ActionRecord action;
  int64_t cost = 0;
  int64_t cumulative_cost = 0;
  double recall = 0.0;
  double pq = 0.0;

  bool operator==(const TraceStep&) const = default;
};

enum class TerminalReason { kNoImprovement, kBudgetExhausted };
std::string_view TerminalReasonName(TerminalReason reason);

// What one simulated annotator did on one image.
struct ActionTrace {
  std::string image_id;
  double initial_recall = 0.0;
  double initial_pq = 0.0;
  std::vector<TraceStep> steps;
  TerminalReason terminal = TerminalReason::kNoImprovement;

  int64_t total_cost() const {
    return steps.empty() ? 0 : steps.back().cumulative_cost;
  }
  bool operator==(const ActionTrace&) const = default;
};

}  // namespace annotkit

#endif  // ANNOTKIT_TRACE_H_
