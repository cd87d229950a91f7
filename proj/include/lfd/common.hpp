#pragma once

#include <stdexcept>
#include <string>

namespace lfd {

// File does not match its declared on-disk format (bad magic, truncated
// payload, inconsistent dimensions). The message names the offending field.
struct format_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem-level failure: missing file, unwritable path.
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An operation was called outside its contract (shape mismatch, invalid
// arguments, violated invariant).
struct contract_error : std::logic_error {
  using std::logic_error::logic_error;
};

// Random generation could not satisfy its postconditions within the retry
// budget (blocked world, degenerate polygon, uncoverable witness).
struct generation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw contract_error(msg);
}

}  // namespace lfd
