#pragma once

#include <stdexcept>
#include <string>

namespace semtree {

// Exit codes used by the CLI.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitStage = 3,
};

// Bad invocation: unknown flags, out-of-range parameters, missing arguments.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent input data: file format violations, dimension
// mismatches, non-finite values, duplicate ids.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// A pipeline stage failed mid-flight (I/O, transport, iteration caps).
class StageError : public std::runtime_error {
 public:
  explicit StageError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace semtree
