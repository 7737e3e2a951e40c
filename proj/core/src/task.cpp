// Copyright 2026 The Seqvision Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "seqvision/task.hpp"

#include <string>

#include "seqvision/errors.hpp"

namespace seqvision {

std::string_view to_string(Task task) {
  switch (task) {
    case Task::kSemseg: return "semseg";
    case Task::kRes: return "res";
    case Task::kRec: return "rec";
    case Task::kCaption: return "caption";
  }
  return "unknown";
}

Task parse_task(std::string_view name) {
  for (Task t : kAllTasks) {
    if (to_string(t) == name) return t;
  }
  throw InvalidArgument("unknown task '" + std::string(name) +
                        "' (expected semseg, res, rec or caption)");
}

TokenKind output_kind(Task task) {
  switch (task) {
    case Task::kSemseg:
    case Task::kRes: return TokenKind::kVisual;
    case Task::kRec: return TokenKind::kPositional;
    case Task::kCaption: return TokenKind::kText;
  }
  return TokenKind::kSpecial;
}

bool is_dense(Task task) { return task == Task::kSemseg || task == Task::kRes; }

}  // namespace seqvision
