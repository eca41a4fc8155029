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

#include <iosfwd>

#include "prd/error.hpp"

namespace prd::cli {

// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kChanged = 1,  // regressed or behavior changed
  kInputError = 2,
  kLocalizationError = 3,
  kPlanningError = 4,
  kRewriteError = 5,
};

enum class Stage { Input, Localize, Plan, Rewrite, Check };

// Exit code for an error raised while running `stage`.
int exit_code_for(Errc code, Stage stage) noexcept;

// Entry point behind the `prd` executable. Machine output goes to `out`,
// diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace prd::cli
