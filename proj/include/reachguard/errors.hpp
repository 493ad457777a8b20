#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace reachguard {

enum class ErrorKind {
  kArgument,
  kInvalidState,
  kConfiguration,
  kNumerical,
  kScenarioFormat,
  kOutOfRange,
  kIo,
};

const char* to_string(ErrorKind kind);

/// Library-wide exception. The kind decides the CLI exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Warnings go through a replaceable sink so tests can capture them.
using WarningSink = std::function<void(std::string_view)>;
void set_warning_sink(WarningSink sink);
void warn(std::string_view message);

}  // namespace reachguard
