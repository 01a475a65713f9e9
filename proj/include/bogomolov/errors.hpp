#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bogomolov {

enum class ErrorKind {
  CapExceeded,
  InconsistentOps,
  ParseError,
  NotAGroup,
  NotCentral,
  NotSubgroup,
  NotNormal,
  NotIsomorphism,
  NotHomomorphism,
  IndexOutOfRange,
  DimensionMismatch,
  PatternMismatch,
  SideConditionFailed,
  NonTransvectionInput,
  NonZeroRowSum,
  NotInMStar,
  UnsupportedContext,
  ValidationError,
  InternalError,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Parse failures carry the byte offset where parsing stopped.
class ParseError : public Error {
 public:
  ParseError(std::size_t position, std::string expected)
      : Error(ErrorKind::ParseError,
              "parse error at offset " + std::to_string(position) +
                  ": expected " + expected),
        position_(position),
        expected_(std::move(expected)) {}

  std::size_t position() const noexcept { return position_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t position_;
  std::string expected_;
};

}  // namespace bogomolov
