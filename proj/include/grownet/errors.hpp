#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace grownet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Inconsistent shapes: wrong input width, parameter vector of the wrong
/// length, malformed topology.
class DimensionError : public Error {
  public:
    using Error::Error;
};

/// A precondition on a scalar argument was violated (non-positive step,
/// tolerance, empty dataset, ...).
class InvalidArgument : public Error {
  public:
    using Error::Error;
};

class ConfigError : public Error {
  public:
    using Error::Error;
};

class IoError : public Error {
  public:
    using Error::Error;
};

class ParseError : public Error {
  public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_{line} {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

/// NaN or Inf produced by an objective.
class NumericalError : public Error {
  public:
    using Error::Error;
};

class NonDescentDirection : public Error {
  public:
    using Error::Error;
};

class LineSearchFailure : public Error {
  public:
    using Error::Error;
};

class NonConvergence : public Error {
  public:
    explicit NonConvergence(double best_norm)
        : Error("gradient tolerance not reached; best |grad|_inf = " +
                std::to_string(best_norm)),
          best_norm_{best_norm} {}

    [[nodiscard]] double best_norm() const noexcept { return best_norm_; }

  private:
    double best_norm_;
};

class EmbeddingError : public Error {
  public:
    using Error::Error;
};

/// Raised by composite embeddings; carries the index of the failing step.
class CompositeStepError : public EmbeddingError {
  public:
    CompositeStepError(std::size_t step, const std::string& what)
        : EmbeddingError("step " + std::to_string(step) + ": " + what), step_{step} {}

    [[nodiscard]] std::size_t step() const noexcept { return step_; }

  private:
    std::size_t step_;
};

/// Every α re-draw left the grown gradient at or below the stage tolerance.
class EmbedEscapeFailure : public Error {
  public:
    using Error::Error;
};

} // namespace grownet
