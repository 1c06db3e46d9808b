#pragma once

#include <stdexcept>
#include <string>

namespace blockcm {

/// Raised when an argument lies outside the domain of an operation
/// (angles outside [0, pi/2], mode indices out of range, unphysical states).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when the intermediate map between collisions l-1 and l does not
/// exist because X_{l-1} is (numerically) singular.
class SingularStepError : public std::runtime_error {
 public:
  SingularStepError(int step, const std::string& what)
      : std::runtime_error(what), step_(step) {}

  int step() const noexcept { return step_; }

 private:
  int step_;
};

}  // namespace blockcm
