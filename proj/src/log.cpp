#include "pvprof/log.hpp"

#include <atomic>
#include <cstdio>

namespace pvprof {

namespace {
std::atomic<bool> g_verbose{false};
}

void set_verbose(bool on) { g_verbose = on; }
bool verbose() { return g_verbose; }

void log_info(const std::string& message) {
  if (g_verbose) std::fprintf(stderr, "pvprof: %s\n", message.c_str());
}

}  // namespace pvprof
