#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace plif::cli {

// Exit codes shared by every subcommand.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,          // bad flags, unreadable or malformed input, unknown node
  kInvalid = 2,        // network violates invariants
  kAboveCpl = 3,       // threshold above the least objective PL
  kZeroEvidence = 4,   // conditioning event has probability zero
  kEngine = 5,         // frontier too wide, expansion cap, open past
  kNotSeparated = 6,   // dsep: sets are d-connected
};

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace plif::cli
