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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace prd {

// Every failure the library reports. Grouped by the stage that raises it.
enum class Errc {
  // spectra
  MalformedProfile,
  EmptyProfile,
  DuplicateTestId,
  DuplicateFunction,
  NoTests,
  UnknownFunction,
  MalformedSpectra,
  // sbfl
  NoFailingTests,
  UnknownMetric,
  EmptyQualifiedSet,
  // rankagg
  InvalidFraction,
  ShapeMismatch,
  UnsortedRow,
  NonFiniteWeight,
  // elf
  NotElf,
  UnsupportedClass,
  UnsupportedMachine,
  TruncatedFile,
  LayoutConflict,
  SymbolNotFound,
  StrippedBinary,
  NoPlt,
  SymbolNotImported,
  HeaderSpaceExhausted,
  OutOfRange,
  NotExecutableRange,
  InvalidArgument,
  // detour
  UndecodableBody,
  BudgetExceeded,
  TargetOutOfRel32Range,
  PlanDoesNotFit,
  UnsupportedPie,
  MalformedPlan,
  // codegen
  EmptyPrototype,
  InvalidPrototype,
  MisalignedShift,
  UnresolvedDependency,
  // recompile
  MissingLinkerScript,
  InvalidPayload,
  ToolchainFailure,
  // harness
  SpawnFailure,
  SuiteMismatch,
  MalformedSuite,
  // rewrite
  PlaceholderUnresolved,
  Io,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace prd
