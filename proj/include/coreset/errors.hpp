#pragma once

#include <stdexcept>
#include <string>

namespace coreset {

/// Precondition violated by the caller (bad parameters, empty sets, mismatched dimensions).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Invalid experiment configuration. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input data. Maps to CLI exit code 3.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// An internal consistency check failed. Maps to CLI exit code 4.
class InvariantError : public std::logic_error {
 public:
  explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

// Literal messages avoid building a std::string on the success path.
inline void require(bool cond, const char* msg) {
  if (!cond) throw DomainError(msg);
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw DomainError(msg);
}

inline void ensure(bool cond, const char* msg) {
  if (!cond) throw InvariantError(msg);
}

inline void ensure(bool cond, const std::string& msg) {
  if (!cond) throw InvariantError(msg);
}

}  // namespace coreset
