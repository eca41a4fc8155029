/*
 * Copyright (C) 2026 The prd Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

namespace prd::detail {

struct ProcessOptions {
  std::optional<std::string> stdin_path;  // /dev/null when absent
  std::chrono::milliseconds timeout{0};   // zero waits forever
  bool merge_stderr = false;              // otherwise stderr goes to /dev/null
  bool search_path = false;
};

struct ProcessResult {
  bool timed_out = false;
  bool signaled = false;
  int exit_code = 0;
  int signal = 0;
  std::string output;
};

// Throws prd::Error(SpawnFailure) when the child cannot be started.
ProcessResult run_process(const std::vector<std::string>& argv, const ProcessOptions& options);

}  // namespace prd::detail
