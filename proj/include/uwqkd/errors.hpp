#pragma once

#include <stdexcept>
#include <string>

namespace uwqkd {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double best_estimate, double error_estimate)
      : std::runtime_error(what), best_(best_estimate), err_(error_estimate) {}
  double best_estimate() const { return best_; }
  double error_estimate() const { return err_; }

 private:
  double best_;
  double err_;
};

class BracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The criterion holds nowhere in the searched range.
class InfeasibleError : public BracketError {
 public:
  using BracketError::BracketError;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace uwqkd
