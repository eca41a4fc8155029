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

#include "prd/elf.hpp"

#include <algorithm>
#include <cstring>

#include "prd/error.hpp"

namespace prd::elf {

struct ImageAccess {
  static std::vector<std::uint8_t>& data(ElfImage& image) { return image.data_; }
};

namespace {

constexpr std::uint8_t kMagic[4] = {0x7f, 'E', 'L', 'F'};
constexpr std::uint16_t kShnUndef = 0;
constexpr std::uint16_t kShnLoreserve = 0xff00;
constexpr std::uint16_t kPnXnum = 0xffff;

std::string hex(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v));
  return buf;
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8(std::size_t off) const { return bytes_[off]; }
  std::uint16_t u16(std::size_t off) const {
    return static_cast<std::uint16_t>(bytes_[off] | (bytes_[off + 1] << 8));
  }
  std::uint32_t u32(std::size_t off) const {
    return static_cast<std::uint32_t>(bytes_[off]) | (static_cast<std::uint32_t>(bytes_[off + 1]) << 8) |
           (static_cast<std::uint32_t>(bytes_[off + 2]) << 16) |
           (static_cast<std::uint32_t>(bytes_[off + 3]) << 24);
  }
  bool fits(std::uint64_t off, std::uint64_t len) const { return off + len <= bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
};

void put16(std::vector<std::uint8_t>& out, std::size_t off, std::uint16_t v) {
  out[off] = static_cast<std::uint8_t>(v);
  out[off + 1] = static_cast<std::uint8_t>(v >> 8);
}

void put32(std::vector<std::uint8_t>& out, std::size_t off, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out[off + i] = static_cast<std::uint8_t>(v >> (8 * i));
}

bool ranges_overlap(std::uint64_t a, std::uint64_t alen, std::uint64_t b, std::uint64_t blen) {
  if (alen == 0 || blen == 0) return false;
  return a < b + blen && b < a + alen;
}

std::uint64_t align_up(std::uint64_t v, std::uint64_t a) { return (v + a - 1) / a * a; }

std::string c_string(std::span<const std::uint8_t> bytes, const SectionHeader& strtab, std::uint32_t off) {
  if (off >= strtab.size) return {};
  const auto* begin = bytes.data() + strtab.offset + off;
  const auto* end = bytes.data() + strtab.offset + strtab.size;
  const auto* nul = std::find(begin, end, std::uint8_t{0});
  return std::string(reinterpret_cast<const char*>(begin), static_cast<std::size_t>(nul - begin));
}

// The invariants every accepted or serialized image must satisfy.
void check_layout(const FileHeader& h, const std::vector<ProgramHeader>& segments,
                  std::size_t file_size) {
  const std::uint64_t ph_bytes = std::uint64_t{h.phnum} * kPhdrSize;
  const std::uint64_t sh_bytes = std::uint64_t{h.shnum} * kShdrSize;
  if (h.phnum != segments.size()) {
    throw Error(Errc::LayoutConflict, "e_phnum disagrees with the program-header list");
  }
  if (h.phnum > 0 && h.phoff + ph_bytes > file_size) {
    throw Error(Errc::LayoutConflict, "program-header table extends past end of file");
  }
  if (h.shnum > 0 && h.shoff + sh_bytes > file_size) {
    throw Error(Errc::LayoutConflict, "section-header table extends past end of file");
  }
  if (ranges_overlap(h.phoff, ph_bytes, h.shoff, sh_bytes)) {
    throw Error(Errc::LayoutConflict, "program- and section-header tables overlap");
  }
  if (ranges_overlap(0, kEhdrSize, h.phoff, ph_bytes) || ranges_overlap(0, kEhdrSize, h.shoff, sh_bytes)) {
    throw Error(Errc::LayoutConflict, "header table overlaps the ELF header");
  }
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& a = segments[i];
    if (std::uint64_t{a.offset} + a.filesz > file_size) {
      throw Error(Errc::LayoutConflict, "segment " + std::to_string(i) + " extends past end of file");
    }
    if (a.type != kPtLoad) continue;
    if (a.filesz > a.memsz) {
      throw Error(Errc::LayoutConflict, "segment " + std::to_string(i) + " has filesz > memsz");
    }
    for (std::size_t j = i + 1; j < segments.size(); ++j) {
      const auto& b = segments[j];
      if (b.type != kPtLoad) continue;
      if (ranges_overlap(a.vaddr, a.memsz, b.vaddr, b.memsz)) {
        throw Error(Errc::LayoutConflict, "loadable segments " + std::to_string(i) + " and " +
                                              std::to_string(j) + " overlap in memory");
      }
      if (ranges_overlap(a.offset, a.filesz, b.offset, b.filesz)) {
        throw Error(Errc::LayoutConflict, "loadable segments " + std::to_string(i) + " and " +
                                              std::to_string(j) + " overlap in the file");
      }
    }
  }
}

std::vector<SymbolEntry> read_symbols(std::span<const std::uint8_t> bytes, const std::vector<SectionHeader>& sections,
                                      const SectionHeader& symtab) {
  if (symtab.link >= sections.size()) {
    throw Error(Errc::TruncatedFile, "symbol table links to missing string table");
  }
  const auto& strtab = sections[symtab.link];
  Reader r(bytes);
  std::vector<SymbolEntry> out;
  const std::uint32_t count = symtab.size / 16;
  for (std::uint32_t i = 1; i < count; ++i) {
    const std::size_t off = symtab.offset + std::size_t{i} * 16;
    SymbolEntry s;
    s.name = c_string(bytes, strtab, r.u32(off));
    s.address = r.u32(off + 4);
    s.size_bytes = r.u32(off + 8);
    const std::uint8_t info = r.u8(off + 12);
    s.section_index = r.u16(off + 14);
    switch (info >> 4) {
      case 0: s.binding = Binding::Local; break;
      case 1: s.binding = Binding::Global; break;
      case 2: s.binding = Binding::Weak; break;
      default: s.binding = Binding::Other; break;
    }
    s.type = info & 0xf;
    s.defined = s.section_index != kShnUndef && s.section_index < kShnLoreserve;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

const SectionHeader* ElfImage::find_section(std::string_view name) const noexcept {
  for (const auto& s : sections) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

const ProgramHeader* ElfImage::segment_at(Address a) const noexcept {
  for (const auto& p : segments) {
    if (p.type == kPtLoad && p.contains(a)) return &p;
  }
  return nullptr;
}

std::vector<Relocation> ElfImage::relocations(std::string_view section_name) const {
  std::vector<Relocation> out;
  const auto* sec = find_section(section_name);
  if (sec == nullptr || sec->type != kShtRel) return out;
  Reader r(data_);
  for (std::uint32_t off = 0; off + 8 <= sec->size; off += 8) {
    const auto info = r.u32(sec->offset + off + 4);
    out.push_back({r.u32(sec->offset + off), info & 0xff, info >> 8});
  }
  return out;
}

ElfImage parse_elf(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(Errc::NotElf, "missing ELF magic");
  }
  if (bytes.size() < kEhdrSize) {
    throw Error(Errc::TruncatedFile, "file shorter than the ELF header");
  }
  if (bytes[4] != 1) {
    throw Error(Errc::UnsupportedClass, bytes[4] == 2 ? "64-bit ELF" : "unknown ELF class");
  }
  if (bytes[5] != 1) {
    throw Error(Errc::UnsupportedClass, "big-endian ELF");
  }

  Reader r(bytes);
  ElfImage image;
  FileHeader& h = image.header;
  std::copy_n(bytes.begin(), 16, h.ident.begin());
  h.type = r.u16(16);
  h.machine = r.u16(18);
  h.version = r.u32(20);
  h.entry = r.u32(24);
  h.phoff = r.u32(28);
  h.shoff = r.u32(32);
  h.flags = r.u32(36);
  h.ehsize = r.u16(40);
  h.phentsize = r.u16(42);
  h.phnum = r.u16(44);
  h.shentsize = r.u16(46);
  h.shnum = r.u16(48);
  h.shstrndx = r.u16(50);

  if (h.machine != kEm386) {
    throw Error(Errc::UnsupportedMachine, "e_machine " + std::to_string(h.machine));
  }
  if ((h.phnum > 0 && h.phentsize != kPhdrSize) || (h.shnum > 0 && h.shentsize != kShdrSize)) {
    throw Error(Errc::NotElf, "unexpected header entry size");
  }
  if (!r.fits(h.phoff, std::uint64_t{h.phnum} * kPhdrSize)) {
    throw Error(Errc::TruncatedFile, "program-header table past end of file");
  }
  if (!r.fits(h.shoff, std::uint64_t{h.shnum} * kShdrSize)) {
    throw Error(Errc::TruncatedFile, "section-header table past end of file");
  }

  for (std::uint16_t i = 0; i < h.phnum; ++i) {
    const std::size_t off = h.phoff + std::size_t{i} * kPhdrSize;
    ProgramHeader p{r.u32(off),      r.u32(off + 4),  r.u32(off + 8),  r.u32(off + 12),
                    r.u32(off + 16), r.u32(off + 20), r.u32(off + 24), r.u32(off + 28)};
    if (!r.fits(p.offset, p.filesz)) {
      throw Error(Errc::TruncatedFile, "segment " + std::to_string(i) + " past end of file");
    }
    image.segments.push_back(p);
  }

  for (std::uint16_t i = 0; i < h.shnum; ++i) {
    const std::size_t off = h.shoff + std::size_t{i} * kShdrSize;
    SectionHeader s;
    s.name_offset = r.u32(off);
    s.type = r.u32(off + 4);
    s.flags = r.u32(off + 8);
    s.addr = r.u32(off + 12);
    s.offset = r.u32(off + 16);
    s.size = r.u32(off + 20);
    s.link = r.u32(off + 24);
    s.info = r.u32(off + 28);
    s.addralign = r.u32(off + 32);
    s.entsize = r.u32(off + 36);
    if (s.type != kShtNobits && s.type != 0 && !r.fits(s.offset, s.size)) {
      throw Error(Errc::TruncatedFile, "section " + std::to_string(i) + " past end of file");
    }
    image.sections.push_back(std::move(s));
  }
  if (h.shstrndx != 0 && h.shstrndx < image.sections.size()) {
    const auto shstr = image.sections[h.shstrndx];
    for (auto& s : image.sections) s.name = c_string(bytes, shstr, s.name_offset);
  }

  check_layout(h, image.segments, bytes.size());
  image.data_.assign(bytes.begin(), bytes.end());

  for (const auto& s : image.sections) {
    if (s.type == kShtSymtab && !image.has_symtab_) {
      image.symbols_ = read_symbols(bytes, image.sections, s);
      image.has_symtab_ = true;
    } else if (s.type == kShtDynsym && image.dynamic_symbols_.empty()) {
      image.dynamic_symbols_ = read_symbols(bytes, image.sections, s);
    }
  }

  if (const auto* got = image.find_section(".got.plt")) {
    image.got_base_ = got->addr;
  } else if (const auto* got2 = image.find_section(".got")) {
    image.got_base_ = got2->addr;
  }

  // PLT: each R_386_JUMP_SLOT names a GOT slot; the stub is the PLT entry
  // whose indirect jump reads that slot (absolute `ff 25` in position-dependent
  // code, `ff a3` relative to the GOT base in PIC).
  const auto slots = image.relocations(".rel.plt");
  std::vector<const SectionHeader*> plt_sections;
  for (const char* name : {".plt.sec", ".plt"}) {
    if (const auto* s = image.find_section(name)) plt_sections.push_back(s);
  }
  std::uint32_t jump_slot_index = 0;
  for (const auto& rel : slots) {
    if (rel.type != kR386JumpSlot) continue;
    const auto sym_index = rel.symbol_index;
    if (sym_index == 0 || sym_index > image.dynamic_symbols_.size()) continue;
    const auto& name = image.dynamic_symbols_[sym_index - 1].name;
    std::optional<Address> stub;
    for (const auto* plt : plt_sections) {
      for (std::uint32_t entry = 0; entry + 6 <= plt->size && !stub; entry += 4) {
        const std::size_t off = plt->offset + entry;
        if (r.u8(off) != 0xff) continue;
        const auto operand = r.u32(off + 2);
        const bool absolute = r.u8(off + 1) == 0x25 && operand == rel.offset;
        const bool pic = r.u8(off + 1) == 0xa3 && image.got_base_ && *image.got_base_ + operand == rel.offset;
        if (!absolute && !pic) continue;
        // Step back over an endbr32 landing pad when the entry starts with one.
        Address at = plt->addr + entry;
        if (entry >= 4 && r.u32(off - 4) == 0xfb1e0ff3) at -= 4;
        stub = at;
      }
      if (stub) break;
    }
    if (!stub) {
      if (const auto* plt = image.find_section(".plt")) stub = plt->addr + 16 * (jump_slot_index + 1);
    }
    if (stub) image.plt_.emplace(name, *stub);
    ++jump_slot_index;
  }
  return image;
}

std::vector<std::uint8_t> serialize_elf(const ElfImage& image) {
  const auto& h = image.header;
  const auto& data = image.file_bytes();
  check_layout(h, image.segments, data.size());

  std::vector<std::uint8_t> out(data.begin(), data.end());
  std::copy(h.ident.begin(), h.ident.end(), out.begin());
  put16(out, 16, h.type);
  put16(out, 18, h.machine);
  put32(out, 20, h.version);
  put32(out, 24, h.entry);
  put32(out, 28, h.phoff);
  put32(out, 32, h.shoff);
  put32(out, 36, h.flags);
  put16(out, 40, h.ehsize);
  put16(out, 42, h.phentsize);
  put16(out, 44, h.phnum);
  put16(out, 46, h.shentsize);
  put16(out, 48, h.shnum);
  put16(out, 50, h.shstrndx);

  for (std::size_t i = 0; i < image.segments.size(); ++i) {
    const auto& p = image.segments[i];
    const std::size_t off = h.phoff + i * kPhdrSize;
    put32(out, off, p.type);
    put32(out, off + 4, p.offset);
    put32(out, off + 8, p.vaddr);
    put32(out, off + 12, p.paddr);
    put32(out, off + 16, p.filesz);
    put32(out, off + 20, p.memsz);
    put32(out, off + 24, p.flags);
    put32(out, off + 28, p.align);
  }
  if (h.shnum != image.sections.size() && h.shnum != 0) {
    throw Error(Errc::LayoutConflict, "e_shnum disagrees with the section list");
  }
  for (std::size_t i = 0; i < image.sections.size() && h.shnum != 0; ++i) {
    const auto& s = image.sections[i];
    const std::size_t off = h.shoff + i * kShdrSize;
    put32(out, off, s.name_offset);
    put32(out, off + 4, s.type);
    put32(out, off + 8, s.flags);
    put32(out, off + 12, s.addr);
    put32(out, off + 16, s.offset);
    put32(out, off + 20, s.size);
    put32(out, off + 24, s.link);
    put32(out, off + 28, s.info);
    put32(out, off + 32, s.addralign);
    put32(out, off + 36, s.entsize);
  }
  return out;
}

const SymbolEntry& find_symbol(const ElfImage& image, std::string_view name) {
  if (!image.has_symtab()) throw Error(Errc::StrippedBinary, "image has no .symtab");
  const SymbolEntry* fallback = nullptr;
  for (const auto& s : image.symbols()) {
    if (s.name != name) continue;
    if (s.defined) return s;
    if (fallback == nullptr) fallback = &s;
  }
  if (fallback != nullptr) return *fallback;
  throw Error(Errc::SymbolNotFound, std::string(name));
}

Address plt_entry_for(const ElfImage& image, std::string_view external_symbol) {
  if (image.plt_map().empty()) throw Error(Errc::NoPlt, "image has no PLT jump slots");
  auto it = image.plt_map().find(external_symbol);
  if (it == image.plt_map().end()) throw Error(Errc::SymbolNotImported, std::string(external_symbol));
  return it->second;
}

std::vector<std::uint8_t> read_virtual(const ElfImage& image, Address address, std::size_t length) {
  const auto* seg = image.segment_at(address);
  if (seg == nullptr || std::uint64_t{address - seg->vaddr} + length > seg->filesz) {
    throw Error(Errc::OutOfRange, "no file-backed mapping for [" + hex(address) + ", +" +
                                      std::to_string(length) + ")");
  }
  const auto data = image.file_bytes();
  const auto begin = data.begin() + seg->offset + (address - seg->vaddr);
  return {begin, begin + static_cast<std::ptrdiff_t>(length)};
}

void write_virtual(ElfImage& image, Address address, std::span<const std::uint8_t> bytes) {
  const auto* seg = image.segment_at(address);
  if (seg == nullptr || std::uint64_t{address - seg->vaddr} + bytes.size() > seg->filesz) {
    throw Error(Errc::OutOfRange, "no file-backed mapping for [" + hex(address) + ", +" +
                                      std::to_string(bytes.size()) + ")");
  }
  auto& data = ImageAccess::data(image);
  std::copy(bytes.begin(), bytes.end(), data.begin() + seg->offset + (address - seg->vaddr));
}

void patch_text(ElfImage& image, Address address, std::span<const std::uint8_t> bytes) {
  const auto* seg = image.segment_at(address);
  if (seg == nullptr) throw Error(Errc::OutOfRange, hex(address) + " is not mapped");
  if ((seg->flags & kPfX) == 0) {
    throw Error(Errc::NotExecutableRange, hex(address) + " lies in a non-executable segment");
  }
  if (std::uint64_t{address - seg->vaddr} + bytes.size() > seg->filesz) {
    throw Error(Errc::OutOfRange, "patch at " + hex(address) + " runs past the end of its segment");
  }
  write_virtual(image, address, bytes);
}

namespace {

// Can the program-header table take one more entry without moving it?
// Returns the index of the PT_LOAD that must grow to keep the table mapped,
// -1 when none needs to, or nullopt when in-place growth is not possible.
std::optional<int> in_place_growth(const ElfImage& image) {
  const auto& h = image.header;
  const std::uint64_t table_end = h.phoff + std::uint64_t{h.phnum} * kPhdrSize;
  const std::uint64_t slack_end = table_end + kPhdrSize;
  const auto data = image.file_bytes();
  if (slack_end > data.size()) return std::nullopt;
  if (!std::all_of(data.begin() + static_cast<std::ptrdiff_t>(table_end),
                   data.begin() + static_cast<std::ptrdiff_t>(slack_end), [](std::uint8_t b) { return b == 0; })) {
    return std::nullopt;
  }
  if (ranges_overlap(h.shoff, std::uint64_t{h.shnum} * kShdrSize, table_end, kPhdrSize)) return std::nullopt;
  for (const auto& s : image.sections) {
    if (s.type == kShtNobits || s.type == 0) continue;
    if (ranges_overlap(s.offset, s.size, table_end, kPhdrSize)) return std::nullopt;
  }
  int grow = -1;
  for (std::size_t i = 0; i < image.segments.size(); ++i) {
    const auto& p = image.segments[i];
    if (p.type != kPtLoad) continue;
    const bool holds_table = p.offset <= h.phoff && h.phoff < std::uint64_t{p.offset} + p.filesz;
    if (ranges_overlap(p.offset, p.filesz, table_end, kPhdrSize)) return std::nullopt;
    if (holds_table) {
      if (std::uint64_t{p.offset} + p.filesz != table_end || p.memsz != p.filesz) return std::nullopt;
      grow = static_cast<int>(i);
    }
  }
  if (grow >= 0) {
    const auto& p = image.segments[static_cast<std::size_t>(grow)];
    for (const auto& q : image.segments) {
      if (&q == &p || q.type != kPtLoad) continue;
      if (ranges_overlap(p.vaddr, std::uint64_t{p.memsz} + kPhdrSize, q.vaddr, q.memsz)) return std::nullopt;
    }
  }
  return grow;
}

}  // namespace

AppendResult append_segment(ElfImage& image, std::span<const std::uint8_t> payload, const AppendOptions& options) {
  if (payload.empty()) throw Error(Errc::InvalidArgument, "payload is empty");
  if (options.align == 0 || (options.align & (options.align - 1)) != 0) {
    throw Error(Errc::InvalidArgument, "alignment " + std::to_string(options.align) + " is not a power of two");
  }
  auto& h = image.header;
  if (std::uint32_t{h.phnum} + 1 >= kPnXnum) {
    throw Error(Errc::HeaderSpaceExhausted, "program-header count would overflow e_phnum");
  }
  if (h.phnum > 0 && h.phentsize != kPhdrSize) {
    throw Error(Errc::HeaderSpaceExhausted, "unexpected program-header entry size");
  }

  std::uint64_t max_end = 0;
  std::size_t insert_at = 0;
  for (std::size_t i = 0; i < image.segments.size(); ++i) {
    const auto& p = image.segments[i];
    if (p.type != kPtLoad) continue;
    max_end = std::max<std::uint64_t>(max_end, std::uint64_t{p.vaddr} + p.memsz);
    insert_at = i + 1;
  }

  const auto growth = in_place_growth(image);
  const bool relocate = !growth.has_value();
  const std::uint64_t seg_align = std::max<std::uint64_t>(kPageSize, options.align);
  const std::uint64_t table_bytes = (std::uint64_t{h.phnum} + 1) * kPhdrSize;
  const std::uint64_t payload_off = relocate ? align_up(table_bytes, options.align) : 0;
  const std::uint64_t mem_payload = std::max<std::uint64_t>(options.mem_size, payload.size());

  const std::uint64_t seg_vaddr = align_up(max_end, seg_align);
  auto& data = ImageAccess::data(image);
  const std::uint64_t seg_offset = align_up(data.size(), kPageSize) + seg_vaddr % kPageSize;
  if (seg_vaddr + payload_off + mem_payload > 0xffffffffull || seg_offset + payload_off + payload.size() > 0xffffffffull) {
    throw Error(Errc::HeaderSpaceExhausted, "appended segment does not fit a 32-bit address space");
  }

  data.resize(seg_offset + payload_off, 0);
  data.insert(data.end(), payload.begin(), payload.end());

  ProgramHeader load;
  load.type = kPtLoad;
  load.offset = static_cast<std::uint32_t>(seg_offset);
  load.vaddr = load.paddr = static_cast<Address>(seg_vaddr);
  load.filesz = static_cast<std::uint32_t>(payload_off + payload.size());
  load.memsz = static_cast<std::uint32_t>(payload_off + mem_payload);
  load.flags = options.flags;
  load.align = kPageSize;

  if (relocate) {
    h.phoff = load.offset;
    for (auto& p : image.segments) {
      if (p.type != kPtPhdr) continue;
      p.offset = load.offset;
      p.vaddr = p.paddr = load.vaddr;
      p.filesz = p.memsz = static_cast<std::uint32_t>(table_bytes);
    }
  } else {
    if (*growth >= 0) {
      auto& p = image.segments[static_cast<std::size_t>(*growth)];
      p.filesz += kPhdrSize;
      p.memsz += kPhdrSize;
    }
    for (auto& p : image.segments) {
      if (p.type != kPtPhdr) continue;
      p.filesz += kPhdrSize;
      p.memsz += kPhdrSize;
    }
  }
  image.segments.insert(image.segments.begin() + static_cast<std::ptrdiff_t>(insert_at), load);
  h.phnum = static_cast<std::uint16_t>(image.segments.size());
  if (h.phentsize == 0) h.phentsize = kPhdrSize;

  AppendResult result;
  result.segment_vaddr = load.vaddr;
  result.segment_offset = load.offset;
  result.load_address = static_cast<Address>(seg_vaddr + payload_off);
  result.relocated_phdrs = relocate;
  return result;
}

}  // namespace prd::elf
