#pragma once

#include <stdexcept>
#include <string>

namespace odrs {

// Feasibility tolerance for sum constraints.
inline constexpr double kTol = 1e-9;

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A runtime assertion on an algorithmic invariant failed.
struct InvariantError : std::logic_error {
  using std::logic_error::logic_error;
};

// Problem too large for an exhaustive/exact routine.
struct SizeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParamError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

#define ODRS_ENSURE(cond, msg)                          \
  do {                                                  \
    if (!(cond)) throw ::odrs::InvariantError(msg);     \
  } while (0)

}  // namespace odrs
