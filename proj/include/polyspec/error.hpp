// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace polyspec {

/// Failure categories used across the library. Every thrown error names the
/// violated precondition or invariant in its message.
enum class ErrorCode {
  TooFewVertices,
  SelfIntersecting,
  DuplicateVertex,
  DegenerateGeometry,
  MeshingFailed,
  NotStructuralMesh,
  TooSmall,
  PathDegenerate,
  VertexCountMismatch,
  DegeneratesAlongPath,
  ParameterOutOfRange,
  OutsideDomain,
  StepTooLarge,
  KappaOutOfRange,
  DegenerateTriangle,
  NoConvergence,
  DimensionTooSmall,
  TooFewEigenvalues,
  ResidualsTooLarge,
  NoMinimumInBracket,
  SamplingFailed,
  InvalidRational,
  InvalidIndices,
  InvalidArgument,
  IoError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

inline void require(bool cond, ErrorCode code, const std::string& msg) {
  if (!cond) raise(code, msg);
}

}  // namespace polyspec
