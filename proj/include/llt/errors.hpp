#pragma once

#include <stdexcept>
#include <string>

namespace llt {

/// Bad argument values (non-positive scale, empty product, aliasing-violating step, ...).
class InvalidParameter : public std::invalid_argument {
 public:
  explicit InvalidParameter(const std::string& what) : std::invalid_argument(what) {}
};

/// A mathematical hypothesis the requested computation relies on does not hold
/// for the given input. This is a meaningful outcome, not a crash.
class Unsupported : public std::runtime_error {
 public:
  explicit Unsupported(const std::string& what) : std::runtime_error(what) {}
};

/// The characteristic function handed to an inversion is not Hermitian.
class InconsistentCf : public std::runtime_error {
 public:
  explicit InconsistentCf(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace llt
