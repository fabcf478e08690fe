#pragma once

#include <stdexcept>
#include <string>

namespace gw {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct LengthMismatch : Error {
  using Error::Error;
};

struct NegativeEntry : Error {
  using Error::Error;
};

struct AlphaOutOfRange : Error {
  using Error::Error;
};

struct RhoOutOfRange : Error {
  using Error::Error;
};

// A_delta(x) is empty for some source symbol: the standing model assumption
// (every symbol has at least one in-budget reproduction) is violated.
struct EmptyBall : Error {
  int symbol;
  explicit EmptyBall(int x, const std::string& label)
      : Error("empty distortion ball for symbol '" + label + "' (index " +
              std::to_string(x) + ")"),
        symbol(x) {}
};

// The guessing strategy puts zero mass on A_delta(x) while P_X(x) > 0: every
// moment of the guess count is infinite.
struct ZeroBallMass : Error {
  int symbol;
  explicit ZeroBallMass(int x, const std::string& label)
      : Error("strategy assigns zero mass to the ball of symbol '" + label +
              "' (index " + std::to_string(x) + "); guessing moments are infinite"),
        symbol(x) {}
};

struct InfiniteExponent : Error {
  int symbol;
  explicit InfiniteExponent(int x)
      : Error("exponent is infinite: no in-budget reproduction inside the "
              "strategy support for source symbol index " + std::to_string(x)),
        symbol(x) {}
};

struct InstanceTooLarge : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace gw
