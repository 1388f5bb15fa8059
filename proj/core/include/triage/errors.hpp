#pragma once

// Exception taxonomy shared by every subsystem. Wire/CLI layers map these to
// protocol error codes and exit statuses.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace triage {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  static constexpr std::size_t kNoOffset = static_cast<std::size_t>(-1);

  explicit ParseError(const std::string& msg, std::size_t byte_offset = kNoOffset,
                      std::size_t line = 0)
      : Error(msg), byte_offset(byte_offset), line(line) {}

  std::size_t byte_offset;  // kNoOffset when unknown
  std::size_t line;         // 1-based; 0 when unknown
};

class MonotonicityError : public Error {
 public:
  MonotonicityError(const std::string& msg, std::uint64_t frame_no)
      : Error(msg), frame_no(frame_no) {}
  std::uint64_t frame_no;
};

class MissingResourceError : public Error {
 public:
  using Error::Error;
};

class IntegrityError : public Error {
 public:
  using Error::Error;
};

class NoNetworkError : public Error {
 public:
  using Error::Error;
};

class PreEpochError : public Error {
 public:
  using Error::Error;
};

class OutOfSessionError : public Error {
 public:
  using Error::Error;
};

class NoFrameError : public Error {
 public:
  using Error::Error;
};

class FilterParseError : public Error {
 public:
  explicit FilterParseError(const std::string& msg, std::string clause = {})
      : Error(msg), clause(std::move(clause)) {}
  std::string clause;
};

class BadPrefixError : public Error {
 public:
  using Error::Error;
};

class DuplicateTechniqueError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class UnknownProfileError : public Error {
 public:
  using Error::Error;
};

class UnknownPolicyError : public Error {
 public:
  using Error::Error;
};

class UnknownTechniqueError : public Error {
 public:
  using Error::Error;
};

class BackendError : public Error {
 public:
  using Error::Error;
};

class ScenarioError : public Error {
 public:
  using Error::Error;
};

class EvalError : public Error {
 public:
  using Error::Error;
};

class EmptyBodyError : public Error {
 public:
  using Error::Error;
};

class DepthError : public Error {
 public:
  using Error::Error;
};

class NoCandidatesError : public Error {
 public:
  using Error::Error;
};

}  // namespace triage
