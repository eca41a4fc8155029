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

#include "prd/recompile.hpp"

#include <cstdio>

#include "prd/codegen.hpp"
#include "prd/error.hpp"
#include "process.hpp"

namespace prd::recompile {

std::vector<std::string> build_command(const BuildConfig& config) {
  if (config.linker_script.empty()) throw Error(Errc::MissingLinkerScript, "no linker script configured");
  if (config.sources.empty()) throw Error(Errc::InvalidArgument, "no source files");
  if (config.output.empty()) throw Error(Errc::InvalidArgument, "no output path");

  // -ffixed-ebx keeps the caller's GOT pointer intact for PLT calls made
  // from the payload; the epilogue addresses the frame through %ebp.
  std::vector<std::string> cmd = {config.compiler,
                                  "-m32",
                                  "-O1",
                                  "-fPIC",
                                  "-ffixed-ebx",
                                  "-fno-omit-frame-pointer",
                                  "-fno-stack-protector",
                                  "-fcf-protection=none",
                                  "-ffreestanding",
                                  "-nostdlib"};
  cmd.insert(cmd.end(), config.extra_flags.begin(), config.extra_flags.end());
  cmd.insert(cmd.end(), {"-shared", "-static-pie", "-T", config.linker_script});
  cmd.insert(cmd.end(), config.sources.begin(), config.sources.end());
  cmd.insert(cmd.end(), config.link_libraries.begin(), config.link_libraries.end());
  cmd.insert(cmd.end(), {"-o", config.output});
  return cmd;
}

const std::string& default_linker_script() {
  static const std::string script = R"(/* Single-segment layout for detour payloads. */
PHDRS
{
  payload PT_LOAD FILEHDR PHDRS FLAGS(7);
  dynamic PT_DYNAMIC;
}

SECTIONS
{
  . = SIZEOF_HEADERS;
  .hash      : { *(.hash) } :payload
  .gnu.hash  : { *(.gnu.hash) } :payload
  .dynsym    : { *(.dynsym) } :payload
  .dynstr    : { *(.dynstr) } :payload
  .rel.dyn   : { *(.rel.dyn) *(.rel.*) } :payload
  .text      : { *(.text .text.*) } :payload
  .rodata    : { *(.rodata .rodata.*) } :payload
  .eh_frame  : { *(.eh_frame) } :payload
  .dynamic   : { *(.dynamic) } :payload :dynamic
  .got       : { *(.got) *(.got.plt) } :payload
  .data      : { *(.data .data.*) } :payload
  .bss       : { *(.bss .bss.*) *(COMMON) } :payload
  /DISCARD/  : { *(.note.GNU-stack) *(.comment) *(.interp) *(.note.*) }
}
)";
  return script;
}

std::vector<std::string> PayloadReport::problems() const {
  std::vector<std::string> out;
  if (has_interpreter_segment) out.push_back("payload requests an interpreter (PT_INTERP)");
  if (loadable_segment_count != 1) {
    out.push_back("payload has " + std::to_string(loadable_segment_count) + " loadable segments, expected 1");
  }
  for (const auto& s : undefined_dynamic_symbols) out.push_back("undefined dynamic symbol " + s);
  for (const auto& r : unsupported_relocations) out.push_back("unsupported relocation " + r);
  return out;
}

PayloadReport validate_payload(std::span<const std::uint8_t> bytes) {
  const auto image = elf::parse_elf(bytes);
  PayloadReport report;
  const elf::ProgramHeader* load = nullptr;
  for (const auto& p : image.segments) {
    if (p.type == elf::kPtInterp) report.has_interpreter_segment = true;
    if (p.type == elf::kPtLoad) {
      ++report.loadable_segment_count;
      if (load == nullptr) load = &p;
    }
  }
  for (const auto& s : image.dynamic_symbols()) {
    if (!s.defined && !s.name.empty() && s.binding != elf::Binding::Weak) {
      report.undefined_dynamic_symbols.push_back(s.name);
    }
  }
  if (load == nullptr) return report;

  for (const auto& s : image.symbols()) {
    if (!s.defined || !load->contains(s.address)) continue;
    if (s.name.starts_with("det_") && s.is_function()) {
      report.entry_symbol_offsets[s.name] = s.address - load->vaddr;
    } else if (s.name.starts_with(codegen::kPlaceholderMarkerPrefix)) {
      report.placeholder_offsets[s.name.substr(codegen::kPlaceholderMarkerPrefix.size())] = s.address - load->vaddr;
    }
  }
  for (const auto& sec : image.sections) {
    if (sec.type != elf::kShtRel) continue;
    for (const auto& r : image.relocations(sec.name)) {
      if (r.type == elf::kR386Relative && load->contains(r.offset) && r.offset - load->vaddr + 4 <= load->filesz) {
        report.relative_relocations.push_back(r.offset - load->vaddr);
      } else {
        char where[16];
        std::snprintf(where, sizeof where, "0x%x", r.offset);
        report.unsupported_relocations.push_back(sec.name + " type " + std::to_string(r.type) + " at " + where);
      }
    }
  }
  return report;
}

PayloadSegment payload_segment(std::span<const std::uint8_t> bytes) {
  const auto image = elf::parse_elf(bytes);
  const elf::ProgramHeader* load = nullptr;
  for (const auto& p : image.segments) {
    if (p.type != elf::kPtLoad) continue;
    if (load != nullptr) throw Error(Errc::InvalidPayload, "more than one loadable segment");
    load = &p;
  }
  if (load == nullptr) throw Error(Errc::InvalidPayload, "no loadable segment");
  PayloadSegment seg;
  const auto data = image.file_bytes();
  seg.bytes.assign(data.begin() + load->offset, data.begin() + load->offset + load->filesz);
  seg.vaddr = load->vaddr;
  seg.mem_size = load->memsz;
  seg.flags = load->flags;
  return seg;
}

BuildResult run_build(const BuildConfig& config) {
  const auto cmd = build_command(config);
  detail::ProcessOptions options;
  options.merge_stderr = true;
  options.search_path = true;
  try {
    const auto r = detail::run_process(cmd, options);
    return {r.signaled ? 128 + r.signal : r.exit_code, r.output};
  } catch (const Error& e) {
    throw Error(Errc::ToolchainFailure, e.what());
  }
}

}  // namespace prd::recompile
