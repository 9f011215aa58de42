#pragma once

#include <stdexcept>
#include <string>

namespace osr {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class EmptySampleSet : public Error {
 public:
  EmptySampleSet() : Error("empirical estimator holds no samples") {}
};

class SolverDiverged : public Error {
 public:
  using Error::Error;
};

class ZeroTail : public Error {
 public:
  explicit ZeroTail(double u)
      : Error("P(X >= " + std::to_string(u) + ") is zero") {}
};

class EpisodeTooLong : public Error {
 public:
  using Error::Error;
};

class GridTooCoarse : public Error {
 public:
  using Error::Error;
};

class CaseMismatch : public Error {
 public:
  using Error::Error;
};

class UninitializedArm : public Error {
 public:
  explicit UninitializedArm(std::size_t arm)
      : Error("arm " + std::to_string(arm) + " has never been pulled") {}
};

/// Configuration problems; `field` is the dotted path of the offending key.
class ConfigInvalid : public Error {
 public:
  ConfigInvalid(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class IoError : public Error {
 public:
  IoError(std::string path, const std::string& message)
      : Error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace osr
