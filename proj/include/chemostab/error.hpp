#pragma once

#include <stdexcept>
#include <string>

namespace chemostab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands live on different grids, or array sizes do not match a grid.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// A time or window argument falls outside the admissible range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// A NaN or Inf reached a public value type.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// A hypothesis inequality required by a formula does not hold.
class HypothesisFailure : public Error {
 public:
  HypothesisFailure(std::string clause, const std::string& what)
      : Error(what), clause_(std::move(clause)) {}
  const std::string& clause() const { return clause_; }

 private:
  std::string clause_;
};

/// Invalid user input. `key` is the dotted config path of the offending entry.
class ValidationError : public Error {
 public:
  ValidationError(std::string key, std::string clause)
      : Error(key + ": " + clause), key_(std::move(key)), clause_(std::move(clause)) {}
  const std::string& key() const { return key_; }
  const std::string& clause() const { return clause_; }

 private:
  std::string key_;
  std::string clause_;
};

}  // namespace chemostab
