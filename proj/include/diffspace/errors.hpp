#pragma once

#include <stdexcept>
#include <string>

namespace diffspace {

/// Base class for all library errors.
class error : public std::runtime_error {
 public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// Argument count does not match a map's or element's arity.
class arity_error : public error {
 public:
  explicit arity_error(const std::string& what) : error(what) {}
};

/// A guarded node (reciprocal, derivative budget) was evaluated outside
/// its declared domain. Raised instead of producing NaN.
class guard_violation : public error {
 public:
  explicit guard_violation(const std::string& what) : error(what) {}
};

/// Point/carrier variant mismatch or point outside the carrier.
class domain_error : public error {
 public:
  explicit domain_error(const std::string& what) : error(what) {}
};

/// Name lookup failure in a generator set or element registry.
class lookup_error : public error {
 public:
  explicit lookup_error(const std::string& what) : error(what) {}
};

/// Rejection sampling exhausted its attempt budget.
class sampling_error : public error {
 public:
  explicit sampling_error(const std::string& what) : error(what) {}
};

/// Atlas validation failure: overlap disagreement or a point no piece covers.
class atlas_error : public error {
 public:
  explicit atlas_error(const std::string& what) : error(what) {}
};

}  // namespace diffspace
