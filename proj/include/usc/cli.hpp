#pragma once

#include <string>

#include "usc/harness/bounds.hpp"
#include "usc/harness/trace.hpp"

namespace usc {

// Exit codes: 0 all checks pass, 2 a bound was violated, 1 config or IO error.
int CliMain(int argc, char** argv);

// Run summary followed by the bound checks; what `run` writes to report.txt.
std::string FormatRunReport(const harness::RunTrace& trace, const harness::BoundReport& report);

}  // namespace usc
