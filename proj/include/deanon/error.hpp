#pragma once

#include <stdexcept>
#include <string>

namespace deanon {

// Raised on violated preconditions and malformed inputs throughout the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw Error(message);
}

}  // namespace deanon
