#pragma once

#include <stdexcept>
#include <string>

namespace mlkit {

// Invalid arguments, contract violations, bad state.
class ValueError : public std::runtime_error {
public:
  explicit ValueError(const std::string& msg) : std::runtime_error(msg) {}
};

// Problems in experiment configs (CLI front end).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Failures raised by a learning algorithm during fit/predict.
class LearnerError : public std::runtime_error {
public:
  explicit LearnerError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mlkit
