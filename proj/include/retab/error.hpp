#pragma once

#include <stdexcept>
#include <string>

namespace retab {

// Raised for problems the caller can fix: bad config values, malformed input
// files, schema mismatches. The CLI maps these to exit code 1; everything
// else (logic errors, broken invariants) exits 2.
class UserError : public std::runtime_error {
 public:
  explicit UserError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace retab
