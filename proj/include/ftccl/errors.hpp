#pragma once

#include <stdexcept>
#include <string>

namespace ftccl {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Rejected input: malformed files, out-of-range indices, inconsistent partitions.
struct InputError : Error {
  using Error::Error;
};

/// A message or state transition that the protocol forbids.
struct ProtocolError : Error {
  using Error::Error;
};

/// The delivered-message cap was exceeded before termination.
struct LivelockError : Error {
  using Error::Error;
};

/// File read/write failure surfaced to the caller.
struct IoError : Error {
  using Error::Error;
};

}  // namespace ftccl
