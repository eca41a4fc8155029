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

// Composes an original executable and a recompiled payload: the payload is
// appended as a new segment, its relocations and PLT placeholders are
// resolved against the load address, and the function entry is overwritten
// with the detour trampoline.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "prd/detour.hpp"
#include "prd/elf.hpp"

namespace prd::rewrite {

struct RewriteResult {
  std::vector<std::uint8_t> bytes;
  elf::Address payload_base = 0;    // address of the payload segment's first byte
  elf::Address detour_target = 0;   // address of plan.payload_symbol
  std::vector<std::uint8_t> trampoline;
  bool relocated_phdrs = false;
};

/// The plan's function is looked up again in `original` (address and size
/// come from the binary, not the plan). Throws InvalidPayload before
/// touching anything when the payload fails validation, and
/// PlaceholderUnresolved when a thunk names a symbol the binary does not
/// import or its placeholder bytes are not where the marker says.
RewriteResult rewrite(const elf::ElfImage& original, std::span<const std::uint8_t> payload,
                      const detour::DetourPlan& plan);

}  // namespace prd::rewrite
