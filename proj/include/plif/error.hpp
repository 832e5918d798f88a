#pragma once

#include <stdexcept>
#include <string>

namespace plif {

enum class ErrorCode {
  Syntax,             // malformed network document
  InvalidNetwork,     // document parsed but violates model invariants
  UnknownNode,
  InvalidQuery,       // overlapping sets, bad state label, empty objective
  InvalidArgument,
  ThresholdAboveCpl,  // threshold lies above the least objective PL
  NoStartNodes,
  ZeroProbability,    // conditioning event has probability zero
  OpenPast,           // operation needs priors that a truncated model lacks
  FrontierTooWide,    // too many frontier clamps to enumerate
  ExpansionCap,       // lazy retrieval exceeded its node budget
  InconsistentModel,  // lazy resolver produced an invalid spec
  UnassignedFrontier,
  InvalidSchedule,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace plif
