#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spacerloss {

/// Raised when a parameter or argument lies outside an operation's domain.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or non-conforming Newick input; `position` is a byte offset.
class NewickError : public std::runtime_error {
 public:
  NewickError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " (at offset " + std::to_string(position) + ")"),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Data too thin for an estimator (fewer than two shared spacers).
class InsufficientData : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace spacerloss
