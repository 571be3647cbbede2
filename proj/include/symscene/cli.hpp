#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "symscene/relation_types.hpp"

namespace symscene::cli {

// Exit codes shared by every subcommand.
enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kInvalidInput = 2,
    kIo = 3,
    kSelector = 4,
    kTransport = 5,
    kInternal = 6,
};

// Thresholds from a JSON object whose keys are Thresholds field names;
// missing keys keep their defaults, unknown keys are rejected.
Thresholds parse_thresholds_json(const std::string& doc);

// args[0] is the program name. Errors are reported on err as one JSON line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace symscene::cli
