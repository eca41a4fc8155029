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

#include "elfgen.hpp"

#include <cstring>

namespace prd::testing {
namespace {

void put16(std::vector<std::uint8_t>& b, std::size_t at, std::uint16_t v) {
  b[at] = static_cast<std::uint8_t>(v);
  b[at + 1] = static_cast<std::uint8_t>(v >> 8);
}

void put32(std::vector<std::uint8_t>& b, std::size_t at, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::size_t append(std::vector<std::uint8_t>& b, const void* p, std::size_t n) {
  const auto at = b.size();
  b.resize(at + n);
  if (n) std::memcpy(b.data() + at, p, n);
  return at;
}

void pad_to(std::vector<std::uint8_t>& b, std::size_t align) {
  while (b.size() % align) b.push_back(0);
}

}  // namespace

GenImage make_elf(const GenSpec& spec) {
  std::vector<std::uint8_t> b(52 + 32, 0);
  GenImage out;
  out.text_offset = static_cast<std::uint32_t>(b.size());
  out.text_vaddr = spec.base + out.text_offset;
  append(b, spec.text.data(), spec.text.size());
  const auto load_end = static_cast<std::uint32_t>(b.size());

  std::uint32_t shoff = 0;
  std::uint16_t shnum = 0, shstrndx = 0;
  if (spec.with_sections) {
    // .strtab
    std::string strtab(1, '\0');
    std::vector<std::uint32_t> name_at;
    for (const auto& s : spec.symbols) {
      name_at.push_back(static_cast<std::uint32_t>(strtab.size()));
      strtab += s.name;
      strtab.push_back('\0');
    }
    pad_to(b, 4);
    std::vector<std::uint8_t> symtab(16, 0);  // null symbol
    std::size_t first_global = 1;
    // Locals first, as the format requires.
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < spec.symbols.size(); ++i) {
        const auto& s = spec.symbols[i];
        if ((s.bind == 0) != (pass == 0)) continue;
        std::vector<std::uint8_t> e(16, 0);
        put32(e, 0, name_at[i]);
        put32(e, 4, s.undefined ? 0 : out.text_vaddr + s.value);
        put32(e, 8, s.size);
        e[12] = static_cast<std::uint8_t>((s.bind << 4) | s.type);
        put16(e, 14, s.undefined ? 0 : 1);
        symtab.insert(symtab.end(), e.begin(), e.end());
        if (pass == 0) ++first_global;
      }
    }
    const auto symtab_off = append(b, symtab.data(), symtab.size());
    const auto strtab_off = append(b, strtab.data(), strtab.size());
    const std::string shstr = std::string("\0.text\0.symtab\0.strtab\0.shstrtab\0", 33);
    const auto shstr_off = append(b, shstr.data(), shstr.size());
    pad_to(b, 4);
    shoff = static_cast<std::uint32_t>(b.size());
    shnum = 5;
    shstrndx = 4;
    b.resize(b.size() + 40 * shnum, 0);
    auto sh = [&](int idx, std::uint32_t name, std::uint32_t type, std::uint32_t flags, std::uint32_t addr,
                  std::uint32_t off, std::uint32_t size, std::uint32_t link, std::uint32_t info, std::uint32_t align,
                  std::uint32_t entsize) {
      const std::size_t at = shoff + 40 * idx;
      put32(b, at, name);
      put32(b, at + 4, type);
      put32(b, at + 8, flags);
      put32(b, at + 12, addr);
      put32(b, at + 16, off);
      put32(b, at + 20, size);
      put32(b, at + 24, link);
      put32(b, at + 28, info);
      put32(b, at + 32, align);
      put32(b, at + 36, entsize);
    };
    sh(1, 1, 1, 6, out.text_vaddr, out.text_offset, static_cast<std::uint32_t>(spec.text.size()), 0, 0, 1, 0);
    sh(2, 7, 2, 0, 0, static_cast<std::uint32_t>(symtab_off), static_cast<std::uint32_t>(symtab.size()), 3,
       static_cast<std::uint32_t>(first_global), 4, 16);
    sh(3, 15, 3, 0, 0, static_cast<std::uint32_t>(strtab_off), static_cast<std::uint32_t>(strtab.size()), 0, 0, 1, 0);
    sh(4, 23, 3, 0, 0, static_cast<std::uint32_t>(shstr_off), static_cast<std::uint32_t>(shstr.size()), 0, 0, 1, 0);
  }

  const std::uint8_t ident[16] = {0x7f, 'E', 'L', 'F', 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0};
  std::memcpy(b.data(), ident, 16);
  put16(b, 16, 2);  // ET_EXEC
  put16(b, 18, 3);  // EM_386
  put32(b, 20, 1);
  put32(b, 24, out.text_vaddr);
  put32(b, 28, 52);
  put32(b, 32, shoff);
  put32(b, 36, 0);
  put16(b, 40, 52);
  put16(b, 42, 32);
  put16(b, 44, 1);
  put16(b, 46, 40);
  put16(b, 48, shnum);
  put16(b, 50, shstrndx);

  put32(b, 52, 1);  // PT_LOAD
  put32(b, 56, 0);
  put32(b, 60, spec.base);
  put32(b, 64, spec.base);
  put32(b, 68, load_end);
  put32(b, 72, load_end + spec.extra_load_bytes);
  put32(b, 76, spec.flags);
  put32(b, 80, 0x1000);

  out.bytes = std::move(b);
  return out;
}

GenSpec random_spec(std::mt19937& rng) {
  GenSpec spec;
  spec.base = 0x08000000u + 0x1000u * std::uniform_int_distribution<std::uint32_t>(0, 0x3000)(rng);
  const auto text_size = std::uniform_int_distribution<std::size_t>(16, 512)(rng);
  spec.text.resize(text_size);
  for (auto& byte : spec.text) byte = static_cast<std::uint8_t>(rng());
  spec.with_sections = std::uniform_int_distribution<int>(0, 9)(rng) != 0;
  spec.extra_load_bytes = std::uniform_int_distribution<int>(0, 1)(rng) ? 0 : 0x100;
  const auto nsym = std::uniform_int_distribution<int>(1, 8)(rng);
  std::uint32_t at = 0;
  for (int i = 0; i < nsym && at < text_size; ++i) {
    GenSymbol s;
    s.name = "fn" + std::to_string(i) + "_" + std::to_string(rng() % 1000);
    s.value = at;
    s.size = std::min<std::uint32_t>(static_cast<std::uint32_t>(text_size) - at, 1 + rng() % 64);
    s.bind = static_cast<std::uint8_t>(rng() % 3 == 0 ? 0 : 1);
    s.type = static_cast<std::uint8_t>(rng() % 4 == 0 ? 1 : 2);
    at += s.size;
    spec.symbols.push_back(std::move(s));
  }
  return spec;
}

}  // namespace prd::testing
