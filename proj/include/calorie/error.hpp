#pragma once

#include <stdexcept>
#include <string>

namespace calorie {

/// Contract violation by the caller (bad shapes, invalid configuration).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (files, sessions, corpora).
class DataError : public Error {
 public:
  using Error::Error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw Error(message);
}

}  // namespace calorie
