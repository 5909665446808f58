#pragma once

#include <stdexcept>
#include <string>

namespace tablecount {

/// Malformed or inconsistent input (mismatched dimensions, bad margins, out-of-range parameters).
class ValidationError : public std::invalid_argument {
public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A configured resource cap (term count, permanent size, enumeration nodes) would be exceeded.
class BudgetError : public std::runtime_error {
public:
  explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tablecount
