#pragma once

#include <string>

namespace pvprof {

// Progress messages go to stderr when verbose output is enabled.
void set_verbose(bool on);
bool verbose();
void log_info(const std::string& message);

}  // namespace pvprof
