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

// Instruction-length decoding for 32-bit x86 code, enough to walk a function
// body linearly and pick out its call instructions.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

namespace prd::x86 {

inline constexpr std::size_t kMaxInstructionLength = 15;

enum class Flow {
  Sequential,
  CallRel,       // E8
  CallIndirect,  // FF /2, FF /3
  JumpRel,       // E9, EB
  JumpIndirect,  // FF /4, FF /5
  CondJumpRel,   // 7x, 0F 8x, E0-E3
  Return,        // C2, C3, CA, CB, CF
};

struct Instruction {
  std::size_t length = 0;
  Flow flow = Flow::Sequential;
  std::int32_t displacement = 0;  // relative branch operand, sign-extended
  bool operand_size_override = false;
};

// Decodes the instruction at the start of `code`. Returns nullopt for
// invalid opcodes and when `code` ends before the instruction does.
std::optional<Instruction> decode(std::span<const std::uint8_t> code) noexcept;

}  // namespace prd::x86
