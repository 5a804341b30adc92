// Copyright 2026 The ifct Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace ifct {

/// Root of every error raised by the engine. `kind()` is the stable name
/// used in CLI diagnostics ("SchemaError: ...").
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define IFCT_DEFINE_ERROR(Name)                                        \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  };

// volume
IFCT_DEFINE_ERROR(FormatError)
IFCT_DEFINE_ERROR(IoError)
IFCT_DEFINE_ERROR(DimensionMismatch)
IFCT_DEFINE_ERROR(InvalidArgument)

// basefn
IFCT_DEFINE_ERROR(EmptyMask)
IFCT_DEFINE_ERROR(ZeroVector)
IFCT_DEFINE_ERROR(EmptyLabelSet)
IFCT_DEFINE_ERROR(ProviderError)

// guideline
IFCT_DEFINE_ERROR(SchemaError)
IFCT_DEFINE_ERROR(GraphError)
IFCT_DEFINE_ERROR(PredicateError)
IFCT_DEFINE_ERROR(PathMismatch)

// planner
IFCT_DEFINE_ERROR(UnresolvableProducer)
IFCT_DEFINE_ERROR(Unrepairable)

// executor
IFCT_DEFINE_ERROR(MissingAttribute)
IFCT_DEFINE_ERROR(UnitMismatch)
IFCT_DEFINE_ERROR(TypeMismatch)
IFCT_DEFINE_ERROR(NoLesionLeafUndefined)
IFCT_DEFINE_ERROR(ExecutionError)

// bench
IFCT_DEFINE_ERROR(SpecError)
IFCT_DEFINE_ERROR(NoConsistentPath)
IFCT_DEFINE_ERROR(LengthMismatch)
IFCT_DEFINE_ERROR(EmptyInput)

#undef IFCT_DEFINE_ERROR

}  // namespace ifct
