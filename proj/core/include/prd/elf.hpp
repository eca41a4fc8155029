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

// In-memory model of 32-bit little-endian x86 ELF files.
//
// The image keeps the original file bytes as its backing store; header
// tables are decoded into the structures below and re-encoded in place on
// serialization, so an unmodified image round-trips byte for byte and any
// section this code does not understand is carried along untouched.

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace prd::elf {

using Address = std::uint32_t;

inline constexpr std::uint16_t kEtExec = 2;
inline constexpr std::uint16_t kEtDyn = 3;
inline constexpr std::uint16_t kEm386 = 3;

inline constexpr std::uint32_t kPtNull = 0;
inline constexpr std::uint32_t kPtLoad = 1;
inline constexpr std::uint32_t kPtDynamic = 2;
inline constexpr std::uint32_t kPtInterp = 3;
inline constexpr std::uint32_t kPtPhdr = 6;

inline constexpr std::uint32_t kPfX = 1;
inline constexpr std::uint32_t kPfW = 2;
inline constexpr std::uint32_t kPfR = 4;

inline constexpr std::uint32_t kShtSymtab = 2;
inline constexpr std::uint32_t kShtStrtab = 3;
inline constexpr std::uint32_t kShtNobits = 8;
inline constexpr std::uint32_t kShtRel = 9;
inline constexpr std::uint32_t kShtDynsym = 11;

inline constexpr std::uint8_t kSttObject = 1;
inline constexpr std::uint8_t kSttFunc = 2;

inline constexpr std::uint32_t kR386Relative = 8;
inline constexpr std::uint32_t kR386JumpSlot = 7;

inline constexpr std::size_t kEhdrSize = 52;
inline constexpr std::size_t kPhdrSize = 32;
inline constexpr std::size_t kShdrSize = 40;
inline constexpr std::uint32_t kPageSize = 0x1000;

struct FileHeader {
  std::array<std::uint8_t, 16> ident{};
  std::uint16_t type = 0;
  std::uint16_t machine = 0;
  std::uint32_t version = 0;
  Address entry = 0;
  std::uint32_t phoff = 0;
  std::uint32_t shoff = 0;
  std::uint32_t flags = 0;
  std::uint16_t ehsize = 0;
  std::uint16_t phentsize = 0;
  std::uint16_t phnum = 0;
  std::uint16_t shentsize = 0;
  std::uint16_t shnum = 0;
  std::uint16_t shstrndx = 0;
};

struct ProgramHeader {
  std::uint32_t type = 0;
  std::uint32_t offset = 0;
  Address vaddr = 0;
  Address paddr = 0;
  std::uint32_t filesz = 0;
  std::uint32_t memsz = 0;
  std::uint32_t flags = 0;
  std::uint32_t align = 0;

  bool contains(Address a) const noexcept { return a >= vaddr && a - vaddr < memsz; }
};

struct SectionHeader {
  std::string name;  // resolved through the section-name string table
  std::uint32_t name_offset = 0;
  std::uint32_t type = 0;
  std::uint32_t flags = 0;
  Address addr = 0;
  std::uint32_t offset = 0;
  std::uint32_t size = 0;
  std::uint32_t link = 0;
  std::uint32_t info = 0;
  std::uint32_t addralign = 0;
  std::uint32_t entsize = 0;
};

enum class Binding { Local, Global, Weak, Other };

struct SymbolEntry {
  std::string name;
  Address address = 0;
  std::uint32_t size_bytes = 0;
  Binding binding = Binding::Local;
  std::uint8_t type = 0;  // STT_*
  std::uint16_t section_index = 0;
  bool defined = false;  // has a location in this image (not UND, not ABS/COMMON)

  bool is_function() const noexcept { return type == kSttFunc; }
};

struct Relocation {
  Address offset = 0;
  std::uint32_t type = 0;
  std::uint32_t symbol_index = 0;
};

class ElfImage {
 public:
  FileHeader header;
  std::vector<ProgramHeader> segments;
  std::vector<SectionHeader> sections;

  // Decoded at parse time; not refreshed by later mutations.
  const std::vector<SymbolEntry>& symbols() const noexcept { return symbols_; }
  const std::vector<SymbolEntry>& dynamic_symbols() const noexcept { return dynamic_symbols_; }
  bool has_symtab() const noexcept { return has_symtab_; }
  // External symbol name -> PLT stub address.
  const std::map<std::string, Address, std::less<>>& plt_map() const noexcept { return plt_; }
  std::optional<Address> got_base() const noexcept { return got_base_; }

  bool is_pie() const noexcept { return header.type == kEtDyn; }
  const SectionHeader* find_section(std::string_view name) const noexcept;
  const ProgramHeader* segment_at(Address a) const noexcept;  // PT_LOAD containing a

  // All relocations of the given SHT_REL sections (by name prefix ".rel").
  std::vector<Relocation> relocations(std::string_view section_name) const;

  std::span<const std::uint8_t> file_bytes() const noexcept { return data_; }
  std::size_t file_size() const noexcept { return data_.size(); }

 private:
  friend ElfImage parse_elf(std::span<const std::uint8_t> bytes);
  friend struct ImageAccess;

  std::vector<std::uint8_t> data_;
  std::vector<SymbolEntry> symbols_;
  std::vector<SymbolEntry> dynamic_symbols_;
  bool has_symtab_ = false;
  std::map<std::string, Address, std::less<>> plt_;
  std::optional<Address> got_base_;
};

ElfImage parse_elf(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> serialize_elf(const ElfImage& image);

/// Exact-name lookup in .symtab. Prefers a defined entry when a name is
/// present more than once.
const SymbolEntry& find_symbol(const ElfImage& image, std::string_view name);

Address plt_entry_for(const ElfImage& image, std::string_view external_symbol);

// Bytes [address, address + length) as mapped from the file. Throws OutOfRange
// when the range is not file-backed by a single PT_LOAD.
std::vector<std::uint8_t> read_virtual(const ElfImage& image, Address address, std::size_t length);

struct AppendOptions {
  std::uint32_t align = 16;       // alignment of the payload's load address; power of two
  std::uint32_t flags = kPfR | kPfX;
  std::uint32_t mem_size = 0;     // bytes to reserve in memory; 0 means payload.size()
};

struct AppendResult {
  Address load_address = 0;       // where payload[0] is mapped
  Address segment_vaddr = 0;
  std::uint32_t segment_offset = 0;
  bool relocated_phdrs = false;   // program-header table moved into the new segment
};

/// Maps `payload` in a new PT_LOAD placed above every existing segment.
///
/// The program-header table needs one more entry. When the 32 bytes after the
/// table are unused zero padding it grows in place; otherwise the whole table
/// is rewritten at the start of the new segment and e_phoff / PT_PHDR are
/// pointed at the copy. Outside the ELF header and the table itself, no
/// pre-existing segment byte changes.
AppendResult append_segment(ElfImage& image, std::span<const std::uint8_t> payload,
                            const AppendOptions& options = {});

void patch_text(ElfImage& image, Address address, std::span<const std::uint8_t> bytes);

// Overwrites file-backed bytes of any PT_LOAD (used for payload fix-ups).
void write_virtual(ElfImage& image, Address address, std::span<const std::uint8_t> bytes);

}  // namespace prd::elf
