#pragma once

#include <stdexcept>
#include <string>

namespace jackfilter {

struct NotPSD : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TooFewPoints : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidSizes : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonFiniteState : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonFiniteObjective : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AllStartsFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BatchMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InsufficientHoldout : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SingularInnovation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TooManySubsets : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GridMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace jackfilter
