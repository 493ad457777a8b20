#include "reachguard/errors.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace reachguard {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kArgument: return "argument";
    case ErrorKind::kInvalidState: return "invalid-state";
    case ErrorKind::kConfiguration: return "configuration";
    case ErrorKind::kNumerical: return "numerical";
    case ErrorKind::kScenarioFormat: return "scenario-format";
    case ErrorKind::kOutOfRange: return "out-of-range";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

namespace {
std::mutex g_sink_mutex;
WarningSink g_sink;
}  // namespace

void set_warning_sink(WarningSink sink) {
  std::lock_guard lock(g_sink_mutex);
  g_sink = std::move(sink);
}

void warn(std::string_view message) {
  std::lock_guard lock(g_sink_mutex);
  if (g_sink) {
    g_sink(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

}  // namespace reachguard
