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

#include "prd/error.hpp"

namespace prd {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::MalformedProfile: return "MalformedProfile";
    case Errc::EmptyProfile: return "EmptyProfile";
    case Errc::DuplicateTestId: return "DuplicateTestId";
    case Errc::DuplicateFunction: return "DuplicateFunction";
    case Errc::NoTests: return "NoTests";
    case Errc::UnknownFunction: return "UnknownFunction";
    case Errc::MalformedSpectra: return "MalformedSpectra";
    case Errc::NoFailingTests: return "NoFailingTests";
    case Errc::UnknownMetric: return "UnknownMetric";
    case Errc::EmptyQualifiedSet: return "EmptyQualifiedSet";
    case Errc::InvalidFraction: return "InvalidFraction";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::UnsortedRow: return "UnsortedRow";
    case Errc::NonFiniteWeight: return "NonFiniteWeight";
    case Errc::NotElf: return "NotElf";
    case Errc::UnsupportedClass: return "UnsupportedClass";
    case Errc::UnsupportedMachine: return "UnsupportedMachine";
    case Errc::TruncatedFile: return "TruncatedFile";
    case Errc::LayoutConflict: return "LayoutConflict";
    case Errc::SymbolNotFound: return "SymbolNotFound";
    case Errc::StrippedBinary: return "StrippedBinary";
    case Errc::NoPlt: return "NoPlt";
    case Errc::SymbolNotImported: return "SymbolNotImported";
    case Errc::HeaderSpaceExhausted: return "HeaderSpaceExhausted";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::NotExecutableRange: return "NotExecutableRange";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::UndecodableBody: return "UndecodableBody";
    case Errc::BudgetExceeded: return "BudgetExceeded";
    case Errc::TargetOutOfRel32Range: return "TargetOutOfRel32Range";
    case Errc::PlanDoesNotFit: return "PlanDoesNotFit";
    case Errc::UnsupportedPie: return "UnsupportedPie";
    case Errc::MalformedPlan: return "MalformedPlan";
    case Errc::EmptyPrototype: return "EmptyPrototype";
    case Errc::InvalidPrototype: return "InvalidPrototype";
    case Errc::MisalignedShift: return "MisalignedShift";
    case Errc::UnresolvedDependency: return "UnresolvedDependency";
    case Errc::MissingLinkerScript: return "MissingLinkerScript";
    case Errc::InvalidPayload: return "InvalidPayload";
    case Errc::ToolchainFailure: return "ToolchainFailure";
    case Errc::SpawnFailure: return "SpawnFailure";
    case Errc::SuiteMismatch: return "SuiteMismatch";
    case Errc::MalformedSuite: return "MalformedSuite";
    case Errc::PlaceholderUnresolved: return "PlaceholderUnresolved";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace prd
