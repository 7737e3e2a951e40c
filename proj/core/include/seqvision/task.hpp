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

#ifndef SEQVISION_TASK_HPP_
#define SEQVISION_TASK_HPP_

#include <array>
#include <string_view>

#include "seqvision/vocab.hpp"

namespace seqvision {

enum class Task { kSemseg = 0, kRes = 1, kRec = 2, kCaption = 3 };

inline constexpr std::array<Task, 4> kAllTasks = {Task::kSemseg, Task::kRes,
                                                  Task::kRec, Task::kCaption};

std::string_view to_string(Task task);
// Throws InvalidArgument for unknown names.
Task parse_task(std::string_view name);

// Token kind the task emits between BOS and EOS.
TokenKind output_kind(Task task);
bool is_dense(Task task);

}  // namespace seqvision

#endif  // SEQVISION_TASK_HPP_
