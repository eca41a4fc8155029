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

// Building the payload: a position-independent, statically linked object
// whose sections all live in one loadable segment, so it can be copied into
// the original binary verbatim.

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "prd/elf.hpp"

namespace prd::recompile {

struct BuildConfig {
  std::string compiler = "gcc";
  std::vector<std::string> extra_flags;
  std::string linker_script;  // required
  std::vector<std::string> sources;
  std::string output;
  // Libraries appended after the sources (e.g. a small static libc).
  std::vector<std::string> link_libraries;
};

// Compiler invocation for `config`; a pure function of its argument.
std::vector<std::string> build_command(const BuildConfig& config);

// Linker script with a single PT_LOAD covering headers, code, read-only
// data, data and bss.
const std::string& default_linker_script();

struct PayloadReport {
  bool has_interpreter_segment = false;
  std::size_t loadable_segment_count = 0;
  std::vector<std::string> undefined_dynamic_symbols;
  // det_* symbol -> offset from the start of the loadable segment.
  std::map<std::string, std::uint32_t> entry_symbol_offsets;
  // symbol named by a placeholder marker -> offset of its 32-bit immediate.
  std::map<std::string, std::uint32_t> placeholder_offsets;
  // Segment offsets of words that need the load base added.
  std::vector<std::uint32_t> relative_relocations;
  // Dynamic relocations of any other type.
  std::vector<std::string> unsupported_relocations;

  bool valid() const noexcept {
    return !has_interpreter_segment && loadable_segment_count == 1 && undefined_dynamic_symbols.empty() &&
           unsupported_relocations.empty();
  }
  std::vector<std::string> problems() const;
};

// Throws NotElf (and the other parse errors) for bytes that are not ELF32/i386.
PayloadReport validate_payload(std::span<const std::uint8_t> bytes);

struct PayloadSegment {
  std::vector<std::uint8_t> bytes;  // file-backed part
  elf::Address vaddr = 0;
  std::uint32_t mem_size = 0;
  std::uint32_t flags = 0;
};

// Contents of the single loadable segment. Throws InvalidPayload if the
// payload does not have exactly one.
PayloadSegment payload_segment(std::span<const std::uint8_t> bytes);

struct BuildResult {
  int exit_code = 0;
  std::string output;  // merged stdout + stderr
};

// Runs build_command(config). Throws ToolchainFailure if the compiler cannot
// be started.
BuildResult run_build(const BuildConfig& config);

}  // namespace prd::recompile
