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

// Minimal ELF32/i386 executables written byte by byte, independent of the
// library's own reader and writer.

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace prd::testing {

struct GenSymbol {
  std::string name;
  std::uint32_t value = 0;
  std::uint32_t size = 0;
  std::uint8_t type = 2;  // STT_FUNC
  std::uint8_t bind = 1;  // STB_GLOBAL
  bool undefined = false;
};

struct GenSpec {
  std::uint32_t base = 0x08048000;
  std::vector<std::uint8_t> text;  // placed right after the headers
  std::vector<GenSymbol> symbols;  // values are offsets into text unless undefined
  bool with_sections = true;
  std::uint32_t flags = 5;  // PF_R | PF_X
  std::uint32_t extra_load_bytes = 0;  // memsz - filesz of the single PT_LOAD
};

struct GenImage {
  std::vector<std::uint8_t> bytes;
  std::uint32_t text_offset = 0;
  std::uint32_t text_vaddr = 0;
};

GenImage make_elf(const GenSpec& spec);

// A random valid spec: 1..8 symbols, 16..512 text bytes, page-aligned base.
GenSpec random_spec(std::mt19937& rng);

}  // namespace prd::testing
