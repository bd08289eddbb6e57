#pragma once

#include <stdexcept>
#include <string>

namespace toxtrig {

// Exit codes used by the command-line driver.
enum class ExitCode : int { Ok = 0, Usage = 1, Data = 2, Service = 3 };

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

/// Invalid configuration or invocation. `key_path` names the offending entry, e.g. "classifier.l2".
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ExitCode::Usage, what) {}
  ConfigError(const std::string& key_path, const std::string& what)
      : Error(ExitCode::Usage, key_path + ": " + what) {}
};

/// Input data violates a precondition (duplicate ids, degenerate corpora, too few examples).
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ExitCode::Data, what) {}
};

class CorpusError : public DataError {
 public:
  using DataError::DataError;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ExitCode::Data, what) {}
};

/// A third-party service could not be used at all.
class ServiceError : public Error {
 public:
  explicit ServiceError(const std::string& what) : Error(ExitCode::Service, what) {}
};

}  // namespace toxtrig
