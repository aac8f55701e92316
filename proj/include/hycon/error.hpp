#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hycon {

/// Root of every exception thrown by the toolkit.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed text input. `line()` is 1-based; 0 when unknown.
class ParseError : public Error {
  public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

class DimensionError : public Error {
  public:
    using Error::Error;
};

/// A precondition on a scalar argument (gain, dwell time, node index...) failed.
class InvalidArgument : public Error {
  public:
    using Error::Error;
};

/// A numerical routine could not deliver a trustworthy answer.
class NumericalError : public Error {
  public:
    using Error::Error;
};

/// Simulation produced a non-finite state at hybrid time (t, j).
class DivergenceError : public NumericalError {
  public:
    DivergenceError(double t, std::size_t j)
        : NumericalError("non-finite state at (t=" + std::to_string(t) + ", j=" + std::to_string(j) + ")"),
          t_(t),
          j_(j) {}

    [[nodiscard]] double t() const noexcept { return t_; }
    [[nodiscard]] std::size_t j() const noexcept { return j_; }

  private:
    double t_;
    std::size_t j_;
};

}  // namespace hycon
