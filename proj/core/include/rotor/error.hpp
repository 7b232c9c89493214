#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rotor {

/// Bad parameters or malformed input (orders, fixtures, config values).
class InvalidArgument : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A cyclic order that is a permutation of the 2d directions but fails the
/// separation condition required by the escape experiments.
class OrderViolation : public InvalidArgument {
  public:
    OrderViolation(const std::string& what, std::string order_text)
        : InvalidArgument(what), order_text_(std::move(order_text)) {}
    const std::string& order_text() const noexcept { return order_text_; }

  private:
    std::string order_text_;
};

/// A single particle ran past its step budget. Never swallowed: escape counts
/// would be wrong if a walk were silently truncated.
class BudgetExceeded : public std::runtime_error {
  public:
    BudgetExceeded(const std::string& what, std::uint64_t budget)
        : std::runtime_error(what), budget_(budget) {}
    std::uint64_t budget() const noexcept { return budget_; }

  private:
    std::uint64_t budget_;
};

/// A numerical solve or region setup that cannot be carried out.
class SolverError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace rotor
