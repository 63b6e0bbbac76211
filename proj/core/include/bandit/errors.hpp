#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace bandit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data: shapes, probabilities, parameters, file contents.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A chain's data violates the declared hypothesis, detected while running an
/// algorithm (e.g. a Triangularizer pivot 1 - q(i,i) that is not positive).
class HypothesisViolation : public Error {
 public:
  HypothesisViolation(const std::string& what, std::optional<std::size_t> bandit,
                      std::optional<std::size_t> local_state)
      : Error(what), bandit_(bandit), local_state_(local_state) {}

  std::optional<std::size_t> bandit() const { return bandit_; }
  std::optional<std::size_t> local_state() const { return local_state_; }

 private:
  std::optional<std::size_t> bandit_;
  std::optional<std::size_t> local_state_;
};

/// Multiple reward types are only supported when transition rates do not
/// depend on the reward type, i.e. under linear utility.
class RoadblockError : public Error {
 public:
  using Error::Error;
};

/// A brute-force enumeration would exceed its configured size cap.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

/// Finalized data was produced for a different labeling than the one supplied.
class LabelingMismatch : public Error {
 public:
  using Error::Error;
};

class IterationLimit : public Error {
 public:
  using Error::Error;
};

}  // namespace bandit
