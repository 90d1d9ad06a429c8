#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace aoismpc {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 1,
    kExitInfeasible = 2,
    kExitRiskChain = 3,
    kExitNumerical = 4,
};

/// Entry point of the aoismpc tool. args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace aoismpc
