#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace besra {

// Raised for scoring-family members that are valid but not evaluated here
// (negative alpha or beta).
class NotImplementedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// The hypothesized label has zero probability under every ensemble member,
// so the posterior reweighting is undefined.
class DegenerateEvidenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class InfeasibleTargetError : public std::runtime_error {
 public:
  InfeasibleTargetError(const std::string& what, double closest)
      : std::runtime_error(what), closest_(closest) {}

  // Closest MeanIR the generator could reach.
  double closest() const noexcept { return closest_; }

 private:
  double closest_;
};

}  // namespace besra
