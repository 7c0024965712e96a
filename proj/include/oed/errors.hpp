#pragma once

#include <stdexcept>
#include <string>

namespace oed {

// Exit-code mapping used by the CLI: config errors -> 2, ill-posed -> 3,
// combinatorial guards -> 4.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class IllPosedError : public std::runtime_error {
 public:
  IllPosedError(const std::string& msg, int numerical_rank)
      : std::runtime_error(msg), rank(numerical_rank) {}
  int rank;
};

class ResonanceError : public std::runtime_error {
 public:
  ResonanceError(const std::string& msg, double omega)
      : std::runtime_error(msg), frequency(omega) {}
  double frequency;
};

class GuardError : public std::runtime_error {
 public:
  explicit GuardError(const std::string& msg) : std::runtime_error(msg) {}
};

class InsufficientDataError : public std::runtime_error {
 public:
  explicit InsufficientDataError(const std::string& msg)
      : std::runtime_error(msg) {}
};

}  // namespace oed
