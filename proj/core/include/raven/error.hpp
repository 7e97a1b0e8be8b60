#pragma once

#include <stdexcept>
#include <string>

namespace raven {

// All toolkit failures surface as raven::Error; the message is the single-line
// diagnostic printed by the CLI.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace raven
