#pragma once

#include <stdexcept>
#include <string>

namespace rek {

// Base class for all library errors. Subclasses map 1:1 to the failure
// kinds surfaced by the public API so callers can catch precisely.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct OutOfRange : Error {
  using Error::Error;
};
struct OverflowDetected : Error {
  using Error::Error;
};
struct EntropyUnavailable : Error {
  using Error::Error;
};
struct DimensionMismatch : Error {
  using Error::Error;
};
struct RoleConflict : Error {
  using Error::Error;
};
struct InvalidConfig : Error {
  using Error::Error;
};
struct BadKernel : Error {
  using Error::Error;
};
struct GridEmpty : Error {
  using Error::Error;
};
struct TooFewSamples : Error {
  using Error::Error;
};
struct InsufficientTrials : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

// Wire / transport failures.
struct WireError : Error {
  using Error::Error;
};
struct BadMagic : WireError {
  using WireError::WireError;
};
struct UnknownType : WireError {
  using WireError::WireError;
};
struct LengthMismatch : WireError {
  using WireError::WireError;
};
struct Truncated : WireError {
  using WireError::WireError;
};
struct Timeout : WireError {
  using WireError::WireError;
};
// An ERROR frame received from the remote side.
struct PeerError : WireError {
  PeerError(uint32_t code_, const std::string& what) : WireError(what), code(code_) {}
  uint32_t code;
};

}  // namespace rek
