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

#include "cli.hpp"

#include <sys/stat.h>

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "prd/codegen.hpp"
#include "prd/detour.hpp"
#include "prd/elf.hpp"
#include "prd/harness.hpp"
#include "prd/rankagg.hpp"
#include "prd/recompile.hpp"
#include "prd/rewrite.hpp"
#include "prd/sbfl.hpp"
#include "prd/spectra.hpp"

namespace prd::cli {
namespace fs = std::filesystem;

int exit_code_for(Errc code, Stage stage) noexcept {
  switch (code) {
    case Errc::MalformedProfile:
    case Errc::EmptyProfile:
    case Errc::DuplicateTestId:
    case Errc::DuplicateFunction:
    case Errc::NoTests:
    case Errc::UnknownFunction:
    case Errc::MalformedSpectra:
    case Errc::InvalidFraction:
    case Errc::NotElf:
    case Errc::UnsupportedClass:
    case Errc::UnsupportedMachine:
    case Errc::TruncatedFile:
    case Errc::LayoutConflict:
    case Errc::StrippedBinary:
    case Errc::InvalidArgument:
    case Errc::MalformedPlan:
    case Errc::MalformedSuite:
    case Errc::SuiteMismatch:
    case Errc::SpawnFailure:
    case Errc::Io:
      return kInputError;
    default:
      break;
  }
  switch (stage) {
    case Stage::Localize: return kLocalizationError;
    case Stage::Plan: return kPlanningError;
    case Stage::Rewrite: return kRewriteError;
    default: return kInputError;
  }
}

namespace {

struct Context {
  std::ostream& out;
  std::ostream& err;
  Stage stage = Stage::Input;

  void log(const std::string& line) const { err << "prd: " << line << "\n"; }
};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  const auto text = read_text(path);
  return {text.begin(), text.end()};
}

// Writes `data` to `path`, or to `out` when path is empty or "-".
void write_output(Context& ctx, const std::string& path, std::string_view data, bool force, bool executable = false) {
  if (path.empty() || path == "-") {
    ctx.out << data;
    return;
  }
  if (fs::exists(path) && !force) throw Error(Errc::Io, path + " exists (use --force to overwrite)");
  if (const auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream o(path, std::ios::binary | std::ios::trunc);
  if (!o) throw Error(Errc::Io, "cannot write " + path);
  o.write(data.data(), static_cast<std::streamsize>(data.size()));
  o.close();
  if (!o) throw Error(Errc::Io, "short write to " + path);
  if (executable) ::chmod(path.c_str(), 0755);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    out.push_back(item.substr(b, item.find_last_not_of(" \t") - b + 1));
  }
  return out;
}

const std::vector<std::string>& default_library_patterns() {
  static const std::vector<std::string> patterns = {
      "_start", "_init", "_fini", "__libc_csu_init", "__libc_csu_fini", "frame_dummy", "register_tm_clones",
      "deregister_tm_clones", "__do_global_dtors_aux", "__x86.get_pc_thunk.*", "_dl_relocate_static_pie"};
  return patterns;
}

bool matches(const std::string& name, const std::string& pattern) {
  if (!pattern.empty() && pattern.back() == '*') return name.starts_with(pattern.substr(0, pattern.size() - 1));
  return name == pattern;
}

// ---- spectra ---------------------------------------------------------------

struct SpectraOptions {
  std::string binary;
  std::string traces;
  std::string suite;
  std::string out;
  std::vector<std::string> library;
  bool strict = false;
  bool force = false;
};

std::optional<std::string> find_trace(const fs::path& dir, const std::string& id) {
  for (const auto& name : {id + ".callgrind", "callgrind.out." + id, id + ".out", id}) {
    if (fs::is_regular_file(dir / name)) return (dir / name).string();
  }
  return std::nullopt;
}

spectra::SpectraDocument build_spectra(Context& ctx, const SpectraOptions& o) {
  if (!fs::is_directory(o.traces)) throw Error(Errc::Io, "trace directory " + o.traces + " not found");
  const auto image = elf::parse_elf(read_bytes(o.binary));
  if (!image.has_symtab()) throw Error(Errc::StrippedBinary, o.binary + " has no .symtab");

  auto patterns = default_library_patterns();
  patterns.insert(patterns.end(), o.library.begin(), o.library.end());
  std::vector<spectra::FunctionRecord> functions;
  std::set<std::string> seen;
  for (const auto& s : image.symbols()) {
    if (!s.defined || !s.is_function() || s.name.empty() || !seen.insert(s.name).second) continue;
    spectra::FunctionRecord f;
    f.name = s.name;
    f.size_bytes = s.size_bytes;
    f.is_library = std::any_of(patterns.begin(), patterns.end(), [&](const auto& p) { return matches(s.name, p); });
    f.is_local = true;
    functions.push_back(std::move(f));
  }

  const auto suite = harness::suite_from_json(read_text(o.suite), fs::path(o.suite).parent_path().string());
  std::vector<spectra::TraceRun> runs;
  for (const auto& t : suite.tests) {
    const auto path = find_trace(o.traces, t.id);
    if (!path) throw Error(Errc::Io, "no trace for test " + t.id + " in " + o.traces);
    spectra::TraceRun run;
    run.meta.id = t.id;
    run.meta.kind = t.kind;
    if (t.recorded_verdict) {
      run.meta.verdict = *t.recorded_verdict;
    } else {
      const auto v = harness::run_test(o.binary, t);
      run.meta.verdict = v.pass ? spectra::Verdict::Pass : spectra::Verdict::Fail;
    }
    run.coverage = spectra::parse_callgrind(read_text(*path));
    runs.push_back(std::move(run));
  }
  auto built = spectra::build_matrix(runs, functions,
                                     o.strict ? spectra::UnknownPolicy::Error : spectra::UnknownPolicy::DropWithWarning);
  constexpr std::size_t kMaxWarnings = 8;
  for (std::size_t i = 0; i < built.warnings.size() && i < kMaxWarnings; ++i) ctx.log(built.warnings[i]);
  if (built.warnings.size() > kMaxWarnings) {
    ctx.log("... " + std::to_string(built.warnings.size() - kMaxWarnings) + " more undeclared functions dropped");
  }
  ctx.log(std::to_string(built.matrix.tests().size()) + " tests: " + std::to_string(built.matrix.failing_count()) +
          " failing, " + std::to_string(built.matrix.passing_count()) + " passing");
  return {fs::path(o.binary).filename().string(), std::move(built.matrix)};
}

// ---- localize --------------------------------------------------------------

struct LocalizeOptions {
  std::string spectra;
  std::string scores;
  std::string out;
  double fraction = rankagg::kDefaultFraction;
  std::uint64_t min_size = 45;
  std::optional<std::size_t> k;
  bool force = false;
};

rankagg::RankedList localize(const LocalizeOptions& o, const spectra::CoverageMatrix* matrix) {
  if (!o.scores.empty()) {
    const auto table = sbfl::score_table_from_json(read_text(o.scores));
    const auto k = o.k ? *o.k : rankagg::select_k(table.size(), o.fraction);
    auto list = rankagg::aggregate(rankagg::rank_matrix(table), k);
    list.fraction = o.fraction;
    return list;
  }
  sbfl::ScreeningConfig config;
  config.min_size_bytes = o.min_size;
  if (o.k) {
    const auto qualified = sbfl::screen(matrix->functions(), config);
    rankagg::select_k(qualified.size(), o.fraction);  // validates the fraction
    auto list = rankagg::aggregate(rankagg::rank_matrix(sbfl::score_table(*matrix, qualified)), *o.k);
    list.fraction = o.fraction;
    return list;
  }
  return rankagg::cgfl(*matrix, config, o.fraction);
}

// ---- plan ------------------------------------------------------------------

struct PlanOptions {
  std::string binary;
  std::string function;
  std::string cgfl;
  std::string refs;
  bool explicit_refs = false;
  bool no_ebx = false;
  std::string payload_symbol;
  std::string prototype;
  std::string decompiled;
  std::string types;
  std::string substitutions;
  std::string imports;
  std::string out;
  bool force = false;
};

struct PlanOutput {
  detour::DetourPlan plan;
  std::string source_path;  // empty when no source was emitted
  std::string script_path;
};

PlanOutput plan_stage(Context& ctx, const PlanOptions& o) {
  const auto image = elf::parse_elf(read_bytes(o.binary));
  detour::PlanOptions popts;
  popts.ebx_required = !o.no_ebx;
  if (o.explicit_refs) popts.references = split_list(o.refs);

  std::vector<std::string> candidates;
  if (!o.function.empty()) {
    candidates.push_back(o.function);
  } else if (!o.cgfl.empty()) {
    for (const auto& e : rankagg::ranked_list_from_json(read_text(o.cgfl)).entries) candidates.push_back(e.name);
  }
  if (candidates.empty()) throw Error(Errc::InvalidArgument, "no function given (--function or --cgfl)");

  std::string decompiled;
  if (!o.decompiled.empty()) {
    auto table = codegen::default_substitutions();
    if (!o.substitutions.empty()) {
      for (auto& [k, v] : codegen::substitutions_from_json(read_text(o.substitutions))) table[k] = v;
    }
    decompiled = codegen::normalize_decompiled_source(read_text(o.decompiled), table);
  }
  // A replacement source only fits the ranked functions it defines.
  if (o.function.empty() && o.prototype.empty() && !decompiled.empty()) {
    std::erase_if(candidates, [&](const auto& name) {
      const bool defined = codegen::find_prototype(decompiled, name).has_value();
      if (!defined) ctx.log("skipping " + name + ": not defined in " + o.decompiled);
      return !defined;
    });
    if (candidates.empty()) {
      throw Error(Errc::SymbolNotFound, o.decompiled + " defines none of the ranked functions");
    }
  }

  std::optional<detour::DetourPlan> plan;
  for (std::size_t i = 0; i < candidates.size() && !plan; ++i) {
    const auto& name = candidates[i];
    const auto symbol = o.payload_symbol.empty() ? "det_" + name : o.payload_symbol;
    try {
      plan = detour::plan_detour(image, name, symbol, popts);
    } catch (const Error& e) {
      // Walk down a ranked list; an explicit function must plan.
      if (candidates.size() == 1 || i + 1 == candidates.size()) throw;
      ctx.log("skipping " + name + ": " + e.what());
    }
  }
  const auto& p = *plan;
  ctx.log("planned " + p.function.name + ": r=" + std::to_string(p.references.size()) + ", " +
          std::to_string(p.encoded_cost) + "/" + std::to_string(p.budget_bytes) + " bytes");

  PlanOutput result{p, {}, {}};
  const fs::path dir = o.out;
  write_output(ctx, (dir / "plan.json").string(), detour::to_json(p), o.force);
  result.script_path = (dir / "payload.ld").string();
  write_output(ctx, result.script_path, recompile::default_linker_script(), o.force);

  std::string proto_text = o.prototype;
  if (proto_text.empty() && !decompiled.empty()) {
    proto_text = codegen::find_prototype(decompiled, p.function.name).value_or("");
  }
  if (proto_text.empty()) {
    ctx.log("no prototype for " + p.function.name + "; interface source not emitted");
    return result;
  }
  const auto proto = codegen::parse_prototype(proto_text);

  codegen::PayloadSource src;
  src.interface = codegen::interface_for(p, proto);
  src.decompiled = decompiled;
  if (!o.types.empty()) src.types = codegen::type_definitions_from_json(read_text(o.types));
  std::set<std::string> referenced;
  for (const auto& r : p.references) referenced.insert(r.name);
  for (const auto& sym : split_list(o.imports)) {
    if (!referenced.contains(sym)) src.imports.push_back(sym);
  }
  const auto stem = "det_" + p.function.name;
  result.source_path = (dir / (stem + ".c")).string();
  write_output(ctx, result.source_path, codegen::emit_payload_source(src), o.force);
  write_output(ctx, (dir / (stem + ".inc")).string(),
               codegen::emit_stack_epilogue(p.correction(), "prd_fix_" + stem), o.force);
  return result;
}

// ---- recompile / rewrite / check -------------------------------------------

struct RecompileOptions {
  std::vector<std::string> sources;
  std::string script;
  std::string out;
  std::string compiler = "gcc";
  std::vector<std::string> flags;
  std::vector<std::string> libs;
  bool force = false;
};

void recompile_stage(Context& ctx, const RecompileOptions& o) {
  if (fs::exists(o.out) && !o.force) throw Error(Errc::Io, o.out + " exists (use --force to overwrite)");
  recompile::BuildConfig config;
  config.compiler = o.compiler;
  config.extra_flags = o.flags;
  config.linker_script = o.script;
  config.sources = o.sources;
  config.output = o.out;
  config.link_libraries = o.libs;
  const auto r = recompile::run_build(config);
  if (r.exit_code != 0) {
    ctx.err << r.output;
    throw Error(Errc::ToolchainFailure, o.compiler + " exited with " + std::to_string(r.exit_code));
  }
  const auto report = recompile::validate_payload(read_bytes(o.out));
  for (const auto& problem : report.problems()) ctx.log(problem);
  if (!report.valid()) throw Error(Errc::InvalidPayload, o.out + " is not a valid payload");
  ctx.log("built " + o.out);
}

struct RewriteOptions {
  std::string binary;
  std::string payload;
  std::string plan;
  std::string out;
  bool force = false;
};

void rewrite_stage(Context& ctx, const RewriteOptions& o) {
  if (fs::exists(o.out) && !o.force) throw Error(Errc::Io, o.out + " exists (use --force to overwrite)");
  const auto image = elf::parse_elf(read_bytes(o.binary));
  const auto plan = detour::plan_from_json(read_text(o.plan));
  const auto payload = read_bytes(o.payload);
  ctx.stage = Stage::Rewrite;
  const auto r = rewrite::rewrite(image, payload, plan);
  ctx.stage = Stage::Input;
  write_output(ctx, o.out, std::string_view(reinterpret_cast<const char*>(r.bytes.data()), r.bytes.size()), o.force,
               true);
  char where[64];
  std::snprintf(where, sizeof where, "payload at 0x%x, detour target 0x%x", r.payload_base, r.detour_target);
  ctx.log(std::string("wrote ") + o.out + ": " + where);
}

struct CheckOptions {
  std::string binary;
  std::string patched;
  std::string suite;
  std::string comparator = "exit_code_digest";
  std::string out;
  bool force = false;
};

int check_stage(Context& ctx, const CheckOptions& o) {
  const auto comparator = harness::comparator_from_string(o.comparator);
  const auto suite = harness::suite_from_json(read_text(o.suite), fs::path(o.suite).parent_path().string());
  const auto original_path = fs::absolute(o.binary).string();
  const auto patched_path = fs::absolute(o.patched).string();
  const auto before = harness::run_suite(original_path, suite, comparator);
  const auto after = harness::run_suite(patched_path, suite, comparator);
  const auto report = harness::compare(before, after);
  write_output(ctx, o.out, harness::to_json(report), o.force);
  ctx.log(std::string("classification: ") + std::string(harness::to_string(report.classification)));
  const auto c = report.classification;
  return c == harness::Classification::TestEquivalent || c == harness::Classification::Mitigated ? kOk : kChanged;
}

template <typename F>
int guarded(Context& ctx, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    ctx.log(e.what());
    return exit_code_for(e.code(), ctx.stage);
  } catch (const fs::filesystem_error& e) {
    ctx.log(e.what());
    return kInputError;
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Context ctx{out, err};
  CLI::App app{"Partial recompilation toolchain: localize, detour, rewrite, check", "prd"};
  app.require_subcommand(1);

  SpectraOptions so;
  auto* spectra_cmd = app.add_subcommand("spectra", "Build coverage spectra from callgrind traces");
  spectra_cmd->add_option("--binary", so.binary, "Traced executable")->required();
  spectra_cmd->add_option("--traces", so.traces, "Directory of callgrind profiles, one per test")->required();
  spectra_cmd->add_option("--suite", so.suite, "Suite JSON")->required();
  spectra_cmd->add_option("--out", so.out, "Output spectra JSON (default stdout)");
  spectra_cmd->add_option("--library", so.library, "Function name or prefix* treated as library code");
  spectra_cmd->add_flag("--strict", so.strict, "Reject traces naming functions absent from the binary");
  spectra_cmd->add_flag("--force", so.force, "Overwrite outputs");

  LocalizeOptions lo;
  auto* localize_cmd = app.add_subcommand("localize", "Rank suspicious functions (CGFL)");
  auto* lo_spectra = localize_cmd->add_option("--spectra", lo.spectra, "Spectra JSON");
  auto* lo_scores = localize_cmd->add_option("--scores", lo.scores, "Precomputed score table JSON");
  lo_spectra->excludes(lo_scores);
  localize_cmd->add_option("--fraction", lo.fraction, "Fraction of qualified functions to keep")->capture_default_str();
  localize_cmd->add_option("--min-size", lo.min_size, "Minimum function size in bytes")->capture_default_str();
  localize_cmd->add_option("--k", lo.k, "Explicit list length");
  localize_cmd->add_option("--out", lo.out, "Output CGFL JSON (default stdout)");
  localize_cmd->add_flag("--force", lo.force, "Overwrite outputs");

  PlanOptions po;
  auto* plan_cmd = app.add_subcommand("plan", "Plan a detour and emit interface source");
  plan_cmd->add_option("--binary", po.binary, "Original executable")->required();
  plan_cmd->add_option("--function", po.function, "Function to detour");
  plan_cmd->add_option("--cgfl", po.cgfl, "CGFL JSON; first entry that fits is planned");
  auto* refs_opt = plan_cmd->add_option("--refs", po.refs, "Comma-separated reference names (verbatim)");
  plan_cmd->add_flag("--no-ebx", po.no_ebx, "Do not pass the caller's %ebx");
  plan_cmd->add_option("--payload-symbol", po.payload_symbol, "Detour interface symbol (default det_<function>)");
  plan_cmd->add_option("--prototype", po.prototype, "Prototype of the function, e.g. \"int f(int a)\"");
  plan_cmd->add_option("--decompiled", po.decompiled, "Decompiled (replacement) source of the function");
  plan_cmd->add_option("--types", po.types, "Type definitions JSON");
  plan_cmd->add_option("--substitutions", po.substitutions, "Keyword substitution JSON");
  plan_cmd->add_option("--imports", po.imports, "Comma-separated imports reached through unbound-symbol thunks");
  plan_cmd->add_option("--out", po.out, "Output directory")->required();
  plan_cmd->add_flag("--force", po.force, "Overwrite outputs");

  RecompileOptions ro;
  auto* recompile_cmd = app.add_subcommand("recompile", "Build a payload with the external toolchain");
  recompile_cmd->add_option("--sources", ro.sources, "C sources")->required();
  recompile_cmd->add_option("--script", ro.script, "Linker script")->required();
  recompile_cmd->add_option("--out", ro.out, "Payload output path")->required();
  recompile_cmd->add_option("--cc", ro.compiler, "Compiler")->capture_default_str();
  recompile_cmd->add_option("--flag", ro.flags, "Extra compiler flag");
  recompile_cmd->add_option("--lib", ro.libs, "Library argument appended after sources");
  recompile_cmd->add_flag("--force", ro.force, "Overwrite outputs");

  RewriteOptions wo;
  auto* rewrite_cmd = app.add_subcommand("rewrite", "Append a payload and install the detour");
  rewrite_cmd->add_option("--binary", wo.binary, "Original executable")->required();
  rewrite_cmd->add_option("--payload", wo.payload, "Payload ELF")->required();
  rewrite_cmd->add_option("--plan", wo.plan, "Plan JSON")->required();
  rewrite_cmd->add_option("--out", wo.out, "Patched executable")->required();
  rewrite_cmd->add_flag("--force", wo.force, "Overwrite outputs");

  CheckOptions co;
  auto* check_cmd = app.add_subcommand("check", "Compare original and patched binaries on a suite");
  check_cmd->add_option("--binary", co.binary, "Original executable")->required();
  check_cmd->add_option("--patched", co.patched, "Patched executable")->required();
  check_cmd->add_option("--suite", co.suite, "Suite JSON")->required();
  check_cmd->add_option("--comparator", co.comparator, "exit_code | exit_code_digest | crash_signal")
      ->capture_default_str();
  check_cmd->add_option("--out", co.out, "Report JSON (default stdout)");
  check_cmd->add_flag("--force", co.force, "Overwrite outputs");

  SpectraOptions pso;
  LocalizeOptions plo;
  PlanOptions ppo;
  RecompileOptions pro;
  std::string comparator = "exit_code_digest";
  auto* pipeline_cmd = app.add_subcommand("pipeline", "spectra, localize, plan, recompile, rewrite and check");
  pipeline_cmd->add_option("--binary", pso.binary, "Original executable")->required();
  pipeline_cmd->add_option("--traces", pso.traces, "Directory of callgrind profiles")->required();
  pipeline_cmd->add_option("--suite", pso.suite, "Suite JSON")->required();
  pipeline_cmd->add_option("--out", ppo.out, "Output directory")->required();
  pipeline_cmd->add_option("--library", pso.library, "Function name or prefix* treated as library code");
  pipeline_cmd->add_option("--fraction", plo.fraction, "Fraction of qualified functions to keep")
      ->capture_default_str();
  pipeline_cmd->add_option("--min-size", plo.min_size, "Minimum function size in bytes")->capture_default_str();
  pipeline_cmd->add_option("--function", ppo.function, "Function to detour (default: best ranked that fits)");
  auto* prefs_opt = pipeline_cmd->add_option("--refs", ppo.refs, "Comma-separated reference names");
  pipeline_cmd->add_flag("--no-ebx", ppo.no_ebx, "Do not pass the caller's %ebx");
  pipeline_cmd->add_option("--prototype", ppo.prototype, "Prototype of the function");
  pipeline_cmd->add_option("--decompiled", ppo.decompiled, "Replacement source of the function");
  pipeline_cmd->add_option("--types", ppo.types, "Type definitions JSON");
  pipeline_cmd->add_option("--substitutions", ppo.substitutions, "Keyword substitution JSON");
  pipeline_cmd->add_option("--imports", ppo.imports, "Comma-separated imports reached through thunks");
  pipeline_cmd->add_option("--cc", pro.compiler, "Compiler")->capture_default_str();
  pipeline_cmd->add_option("--comparator", comparator, "Verdict comparator")->capture_default_str();
  pipeline_cmd->add_flag("--force", ppo.force, "Overwrite outputs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kOk : kInputError;
  }

  if (spectra_cmd->parsed()) {
    return guarded(ctx, [&]() -> int {
      const auto doc = build_spectra(ctx, so);
      write_output(ctx, so.out, spectra::to_json(doc), so.force);
      return kOk;
    });
  }
  if (localize_cmd->parsed()) {
    return guarded(ctx, [&]() -> int {
      if (lo.spectra.empty() && lo.scores.empty()) throw Error(Errc::InvalidArgument, "need --spectra or --scores");
      std::optional<spectra::SpectraDocument> doc;
      if (!lo.spectra.empty()) doc = spectra::spectra_from_json(read_text(lo.spectra));
      ctx.stage = Stage::Localize;
      const auto list = localize(lo, doc ? &doc->matrix : nullptr);
      ctx.stage = Stage::Input;
      write_output(ctx, lo.out, rankagg::to_json(list), lo.force);
      return kOk;
    });
  }
  if (plan_cmd->parsed()) {
    po.explicit_refs = refs_opt->count() > 0;
    return guarded(ctx, [&]() -> int {
      ctx.stage = Stage::Plan;
      plan_stage(ctx, po);
      return kOk;
    });
  }
  if (recompile_cmd->parsed()) {
    return guarded(ctx, [&]() -> int {
      ctx.stage = Stage::Rewrite;
      recompile_stage(ctx, ro);
      return kOk;
    });
  }
  if (rewrite_cmd->parsed()) {
    return guarded(ctx, [&]() -> int {
      rewrite_stage(ctx, wo);
      return kOk;
    });
  }
  if (check_cmd->parsed()) {
    return guarded(ctx, [&]() -> int { return check_stage(ctx, co); });
  }
  if (pipeline_cmd->parsed()) {
    ppo.explicit_refs = prefs_opt->count() > 0;
    return guarded(ctx, [&]() -> int {
      const fs::path dir = ppo.out;
      pso.force = ppo.force;
      pso.out = (dir / "spectra.json").string();
      const auto doc = build_spectra(ctx, pso);
      write_output(ctx, pso.out, spectra::to_json(doc), pso.force);

      ctx.stage = Stage::Localize;
      const auto list = localize(plo, &doc.matrix);
      ctx.stage = Stage::Input;
      ppo.cgfl = (dir / "cgfl.json").string();
      write_output(ctx, ppo.cgfl, rankagg::to_json(list), ppo.force);

      ctx.stage = Stage::Plan;
      ppo.binary = pso.binary;
      const auto planned = plan_stage(ctx, ppo);
      ctx.stage = Stage::Input;
      if (planned.source_path.empty()) {
        ctx.log("no replacement source; stopping after planning");
        return kOk;
      }

      ctx.stage = Stage::Rewrite;
      pro.sources = {planned.source_path};
      pro.script = planned.script_path;
      pro.out = (dir / "payload.so").string();
      pro.force = ppo.force;
      recompile_stage(ctx, pro);
      ctx.stage = Stage::Input;

      RewriteOptions rw{pso.binary, pro.out, (dir / "plan.json").string(),
                        (dir / (fs::path(pso.binary).filename().string() + ".prd")).string(), ppo.force};
      rewrite_stage(ctx, rw);

      CheckOptions ck{pso.binary, rw.out, pso.suite, comparator, (dir / "report.json").string(), ppo.force};
      return check_stage(ctx, ck);
    });
  }
  return kInputError;
}

}  // namespace prd::cli
