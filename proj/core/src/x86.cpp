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

#include "prd/x86.hpp"

#include <array>

namespace prd::x86 {
namespace {

// Operand encoding classes.
enum : std::uint8_t {
  kNone = 0,   // opcode only
  kM = 1,      // ModRM
  kI8 = 2,     // imm8
  kIz = 3,     // imm16/32 by operand size
  kMI8 = 4,    // ModRM + imm8
  kMIz = 5,    // ModRM + imm16/32
  kI16 = 6,    // imm16
  kI16I8 = 7,  // enter
  kRel8 = 8,
  kRelz = 9,
  kMoffs = 10,  // address-size offset
  kFar = 11,    // ptr16:16/32
  kGrp3b = 12,  // F6: imm8 only for /0 /1
  kGrp3v = 13,  // F7: immz only for /0 /1
  kPrefix = 14,
  kEsc = 15,  // 0F
  kVex = 16,  // C4/C5 when ModRM.mod == 11
  kBad = 17,
};

constexpr std::array<std::uint8_t, 256> make_one_byte() {
  std::array<std::uint8_t, 256> t{};
  for (int row = 0; row < 0x40; row += 8) {
    t[row + 0] = t[row + 1] = t[row + 2] = t[row + 3] = kM;
    t[row + 4] = kI8;
    t[row + 5] = kIz;
    t[row + 6] = t[row + 7] = kNone;
  }
  t[0x0f] = kEsc;
  t[0x26] = t[0x2e] = t[0x36] = t[0x3e] = kPrefix;
  for (int i = 0x40; i < 0x60; ++i) t[i] = kNone;
  t[0x62] = t[0x63] = kM;
  t[0x64] = t[0x65] = t[0x66] = t[0x67] = kPrefix;
  t[0x68] = kIz;
  t[0x69] = kMIz;
  t[0x6a] = kI8;
  t[0x6b] = kMI8;
  for (int i = 0x70; i < 0x80; ++i) t[i] = kRel8;
  t[0x80] = t[0x82] = t[0x83] = kMI8;
  t[0x81] = kMIz;
  for (int i = 0x84; i < 0x90; ++i) t[i] = kM;
  t[0x9a] = kFar;
  t[0xa0] = t[0xa1] = t[0xa2] = t[0xa3] = kMoffs;
  t[0xa8] = kI8;
  t[0xa9] = kIz;
  for (int i = 0xb0; i < 0xb8; ++i) t[i] = kI8;
  for (int i = 0xb8; i < 0xc0; ++i) t[i] = kIz;
  t[0xc0] = t[0xc1] = kMI8;
  t[0xc2] = kI16;
  t[0xc4] = t[0xc5] = kVex;
  t[0xc6] = kMI8;
  t[0xc7] = kMIz;
  t[0xc8] = kI16I8;
  t[0xca] = kI16;
  t[0xcd] = kI8;
  t[0xd0] = t[0xd1] = t[0xd2] = t[0xd3] = kM;
  t[0xd4] = t[0xd5] = kI8;
  for (int i = 0xd8; i < 0xe0; ++i) t[i] = kM;
  for (int i = 0xe0; i < 0xe4; ++i) t[i] = kRel8;
  t[0xe4] = t[0xe5] = t[0xe6] = t[0xe7] = kI8;
  t[0xe8] = t[0xe9] = kRelz;
  t[0xea] = kFar;
  t[0xeb] = kRel8;
  t[0xf0] = t[0xf2] = t[0xf3] = kPrefix;
  t[0xf6] = kGrp3b;
  t[0xf7] = kGrp3v;
  t[0xfe] = t[0xff] = kM;
  return t;
}

constexpr std::array<std::uint8_t, 256> make_two_byte() {
  std::array<std::uint8_t, 256> t{};
  t.fill(kM);
  t[0x04] = t[0x0a] = t[0x0c] = kBad;
  t[0x05] = t[0x06] = t[0x07] = t[0x08] = t[0x09] = t[0x0b] = t[0x0e] = kNone;
  t[0x0f] = kMI8;  // 3DNow!, suffix byte
  for (int i = 0x24; i < 0x28; ++i) t[i] = kBad;
  for (int i = 0x30; i < 0x38; ++i) t[i] = kNone;
  t[0x36] = kBad;
  t[0x38] = kM;    // three-byte map, handled by caller
  t[0x3a] = kMI8;  // three-byte map, handled by caller
  t[0x39] = t[0x3b] = t[0x3c] = t[0x3d] = t[0x3e] = t[0x3f] = kBad;
  t[0x70] = t[0x71] = t[0x72] = t[0x73] = kMI8;
  t[0x77] = kNone;
  t[0x7a] = t[0x7b] = kBad;
  for (int i = 0x80; i < 0x90; ++i) t[i] = kRelz;
  t[0xa0] = t[0xa1] = t[0xa2] = t[0xa8] = t[0xa9] = t[0xaa] = kNone;
  t[0xa6] = t[0xa7] = kBad;
  t[0xa4] = t[0xac] = t[0xba] = kMI8;
  t[0xc2] = t[0xc4] = t[0xc5] = t[0xc6] = kMI8;
  for (int i = 0xc8; i < 0xd0; ++i) t[i] = kNone;
  return t;
}

constexpr auto kOneByte = make_one_byte();
constexpr auto kTwoByte = make_two_byte();

class Cursor {
 public:
  explicit Cursor(std::span<const std::uint8_t> code) : code_(code) {}

  bool take(std::size_t n) {
    if (pos_ + n > code_.size() || pos_ + n > kMaxInstructionLength) return false;
    pos_ += n;
    return true;
  }
  std::optional<std::uint8_t> peek() const {
    if (pos_ >= code_.size()) return std::nullopt;
    return code_[pos_];
  }
  std::optional<std::uint8_t> next() {
    auto b = peek();
    if (b && !take(1)) return std::nullopt;
    return b;
  }
  std::int32_t read_signed(std::size_t at, std::size_t n) const {
    std::uint32_t v = 0;
    for (std::size_t i = 0; i < n; ++i) v |= static_cast<std::uint32_t>(code_[at + i]) << (8 * i);
    if (n == 1) return static_cast<std::int8_t>(v);
    if (n == 2) return static_cast<std::int16_t>(v);
    return static_cast<std::int32_t>(v);
  }
  std::size_t pos() const { return pos_; }

 private:
  std::span<const std::uint8_t> code_;
  std::size_t pos_ = 0;
};

// Consumes ModRM plus any SIB and displacement. Returns the ModRM byte.
std::optional<std::uint8_t> skip_modrm(Cursor& c, bool addr16) {
  const auto modrm = c.next();
  if (!modrm) return std::nullopt;
  const int mod = *modrm >> 6;
  const int rm = *modrm & 7;
  if (mod == 3) return modrm;
  std::size_t disp = 0;
  if (addr16) {
    if (mod == 0 && rm == 6) disp = 2;
    else if (mod == 1) disp = 1;
    else if (mod == 2) disp = 2;
  } else {
    if (rm == 4) {
      const auto sib = c.next();
      if (!sib) return std::nullopt;
      if (mod == 0 && (*sib & 7) == 5) disp = 4;
    }
    if (mod == 0 && rm == 5) disp = 4;
    else if (mod == 1) disp = 1;
    else if (mod == 2) disp = 4;
  }
  if (!c.take(disp)) return std::nullopt;
  return modrm;
}

std::optional<Instruction> decode_vex(Cursor& c, std::uint8_t lead, bool addr16) {
  // In 32-bit mode C4/C5 are LES/LDS unless the next byte has mod == 11.
  const auto b1 = c.peek();
  if (!b1) return std::nullopt;
  if ((*b1 >> 6) != 3) {
    if (!skip_modrm(c, addr16)) return std::nullopt;
    return Instruction{c.pos()};
  }
  int map = 1;
  if (lead == 0xc5) {
    c.take(1);
  } else {
    c.take(1);
    map = *b1 & 0x1f;
    if (!c.next()) return std::nullopt;
  }
  const auto op = c.next();
  if (!op) return std::nullopt;
  if (map < 1 || map > 3) return std::nullopt;
  if (map == 1 && *op == 0x77) return Instruction{c.pos()};  // vzeroupper / vzeroall
  if (!skip_modrm(c, addr16)) return std::nullopt;
  bool imm = map == 3;
  if (map == 1) {
    imm = (*op >= 0x70 && *op <= 0x73) || *op == 0xc2 || *op == 0xc4 || *op == 0xc5 || *op == 0xc6;
  }
  if (imm && !c.take(1)) return std::nullopt;
  return Instruction{c.pos()};
}

}  // namespace

std::optional<Instruction> decode(std::span<const std::uint8_t> code) noexcept {
  Cursor c(code);
  bool opsize16 = false;
  bool addr16 = false;

  std::uint8_t op = 0;
  for (;;) {
    const auto b = c.next();
    if (!b) return std::nullopt;
    if (kOneByte[*b] != kPrefix) {
      op = *b;
      break;
    }
    if (*b == 0x66) opsize16 = true;
    if (*b == 0x67) addr16 = true;
  }

  Instruction out;
  out.operand_size_override = opsize16;
  const std::size_t z = opsize16 ? 2 : 4;
  std::uint8_t cls = kOneByte[op];

  if (cls == kVex) {
    auto v = decode_vex(c, op, addr16);
    if (v) v->operand_size_override = opsize16;
    return v;
  }

  if (cls == kEsc) {
    const auto op2 = c.next();
    if (!op2) return std::nullopt;
    if (*op2 == 0x38 || *op2 == 0x3a) {
      if (!c.next()) return std::nullopt;  // third opcode byte
      if (!skip_modrm(c, addr16)) return std::nullopt;
      if (*op2 == 0x3a && !c.take(1)) return std::nullopt;
      out.length = c.pos();
      return out;
    }
    cls = kTwoByte[*op2];
    if (cls == kBad) return std::nullopt;
    if (cls == kRelz) {
      const auto at = c.pos();
      if (!c.take(z)) return std::nullopt;
      out.flow = Flow::CondJumpRel;
      out.displacement = c.read_signed(at, z);
      out.length = c.pos();
      return out;
    }
    if ((cls == kM || cls == kMI8) && !skip_modrm(c, addr16)) return std::nullopt;
    if (cls == kMI8 && !c.take(1)) return std::nullopt;
    out.length = c.pos();
    return out;
  }

  switch (cls) {
    case kNone:
      break;
    case kM: {
      const auto modrm = skip_modrm(c, addr16);
      if (!modrm) return std::nullopt;
      if (op == 0xff) {
        const int reg = (*modrm >> 3) & 7;
        if (reg == 2 || reg == 3) out.flow = Flow::CallIndirect;
        else if (reg == 4 || reg == 5) out.flow = Flow::JumpIndirect;
        else if (reg == 7) return std::nullopt;
      } else if (op == 0xfe && ((*modrm >> 3) & 7) > 1) {
        return std::nullopt;
      }
      break;
    }
    case kI8:
      if (!c.take(1)) return std::nullopt;
      break;
    case kIz:
      if (!c.take(z)) return std::nullopt;
      break;
    case kMI8:
      if (!skip_modrm(c, addr16) || !c.take(1)) return std::nullopt;
      break;
    case kMIz:
      if (!skip_modrm(c, addr16) || !c.take(z)) return std::nullopt;
      break;
    case kI16:
      if (!c.take(2)) return std::nullopt;
      break;
    case kI16I8:
      if (!c.take(3)) return std::nullopt;
      break;
    case kRel8: {
      const auto at = c.pos();
      if (!c.take(1)) return std::nullopt;
      out.displacement = c.read_signed(at, 1);
      out.flow = op == 0xeb ? Flow::JumpRel : Flow::CondJumpRel;
      break;
    }
    case kRelz: {
      const auto at = c.pos();
      if (!c.take(z)) return std::nullopt;
      out.displacement = c.read_signed(at, z);
      out.flow = op == 0xe8 ? Flow::CallRel : Flow::JumpRel;
      break;
    }
    case kMoffs:
      if (!c.take(addr16 ? 2 : 4)) return std::nullopt;
      break;
    case kFar:
      if (!c.take(z + 2)) return std::nullopt;
      break;
    case kGrp3b:
    case kGrp3v: {
      const auto modrm = skip_modrm(c, addr16);
      if (!modrm) return std::nullopt;
      if (((*modrm >> 3) & 7) < 2 && !c.take(cls == kGrp3b ? 1 : z)) return std::nullopt;
      break;
    }
    default:
      return std::nullopt;
  }
  if (op == 0xc2 || op == 0xc3 || op == 0xca || op == 0xcb || op == 0xcf) out.flow = Flow::Return;
  out.length = c.pos();
  return out;
}

}  // namespace prd::x86
