#pragma once

#include <iosfwd>

#include "tumor_cli/config.hpp"

namespace tumor_cli {

// Each command writes its artifacts plus resolved.ini into cfg.out_dir,
// closes the run with manifest.json, and returns the process exit code.
int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace tumor_cli
