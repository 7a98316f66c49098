// Copyright 2026 The walshflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace walsh {

// Numeric values are mirrored by wf_status in the public C header.
enum class ErrorCode : int {
  NonPositiveWeight = 10,
  WeightsNotNormalized = 11,
  SignsNotBlockSorted = 12,
  WrongRayCount = 13,
  InvalidArgument = 14,
  DerivativeUnavailable = 20,
  NonPositiveTime = 21,
  QuadratureDiverged = 22,
  OriginNotDifferentiable = 23,
  NotInDomain = 24,
  EmptyInterval = 30,
  NotInExcursion = 31,
  OffLatticeStart = 40,
  SamplerInvalid = 41,
  BeforeHitting = 42,
  MissingIntermediateStart = 43,
  Empty = 50,
  ZeroExpected = 51,
  InsufficientSamples = 52,
  ConfigInvalid = 60,
  Io = 61,
  CheckFailed = 62,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(to_string(code)) + ": " + what);
}

}  // namespace walsh
