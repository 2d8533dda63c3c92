#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace trajmine {

/// Broad failure classes. The command-line tool maps these to exit codes.
enum class ErrorCategory { Config, Io, Data };

const char* to_string(ErrorCategory category) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCategory::Config, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::Io, what) {}
};

/// Invalid or degenerate geometric input (zero-area box, collinear polygon).
class GeometryError : public Error {
 public:
  explicit GeometryError(const std::string& what) : Error(ErrorCategory::Data, what) {}
};

class TrackerError : public Error {
 public:
  enum class Kind { EmptyPatch, ZeroVariance, SearchTooSmall };

  TrackerError(Kind kind, const std::string& what)
      : Error(ErrorCategory::Data, what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class OutOfOrderFrame : public Error {
 public:
  OutOfOrderFrame(std::int64_t frame, std::int64_t previous)
      : Error(ErrorCategory::Data, "frame " + std::to_string(frame) +
                                       " does not follow frame " + std::to_string(previous)) {}
};

class NoFlankingDetections : public Error {
 public:
  explicit NoFlankingDetections(std::int64_t frame)
      : Error(ErrorCategory::Data,
              "no detection entries on both sides of frame " + std::to_string(frame)) {}
};

/// Malformed line in a line-delimited input. Line numbers are 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : Error(ErrorCategory::Data, "line " + std::to_string(line) + ": " + reason), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class RangeError : public Error {
 public:
  RangeError(std::size_t line, const std::string& reason)
      : Error(ErrorCategory::Data, "line " + std::to_string(line) + ": " + reason), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class MissingFrame : public Error {
 public:
  explicit MissingFrame(std::int64_t index)
      : Error(ErrorCategory::Io, "missing frame " + std::to_string(index)), index_(index) {}

  std::int64_t index() const noexcept { return index_; }

 private:
  std::int64_t index_;
};

class ScheduleTooLong : public Error {
 public:
  ScheduleTooLong(std::size_t length, std::size_t cap)
      : Error(ErrorCategory::Config, "schedule length " + std::to_string(length) +
                                         " exceeds cap " + std::to_string(cap)) {}
};

class InfeasibleSpec : public Error {
 public:
  explicit InfeasibleSpec(const std::string& what) : Error(ErrorCategory::Config, what) {}
};

}  // namespace trajmine
