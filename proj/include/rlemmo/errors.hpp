#pragma once

#include <stdexcept>
#include <string>

namespace rlemmo {

// Malformed input file or config value. The message names the offending field.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class BudgetExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidState : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace rlemmo
