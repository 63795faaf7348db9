#pragma once

#include <stdexcept>
#include <string>

namespace kqg {

// Exit-code mapping used by the CLI: config 2, numerical 3, missing prerequisite 4.
struct config_error : std::runtime_error {
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct numerical_error : std::runtime_error {
  explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct missing_artifact : std::runtime_error {
  explicit missing_artifact(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace kqg
