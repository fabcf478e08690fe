#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gw/distortion.hpp"
#include "gw/source.hpp"

namespace gw {

/// Deterministic quantizer x -> xh with d(x, map[x]) <= delta for all x.
struct Quantizer {
  std::vector<int> map;
};

struct MajorizationVerdict {
  bool majorizes = false;
  std::optional<int> first_violated_prefix;  // 1-based prefix length of the first failure
};

// Does q majorize p? Prefix sums of the nonincreasing rearrangements are
// compared with <=, including the full-length sum (so vectors of unequal total
// mass compare one-sidedly). tol > 0 forgives float dust in the prefix sums.
MajorizationVerdict majorizes(std::span<const double> q, std::span<const double> p,
                              double tol = 0.0);

// Greedy covering order: repeatedly pick the reproduction symbol whose reverse
// ball covers the most residual source mass (smallest index on ties), and map
// the newly covered symbols to it. Zero-mass symbols get the smallest-index
// feasible reproduction. The induced law of map(X) majorizes the output law of
// every channel that meets the distortion budget almost surely.
Quantizer greedy_quantizer(const FiniteSource& source, const BallIndex& balls);

// Law of map(X).
std::vector<double> pushforward(const FiniteSource& source, const Quantizer& q, int nxh);

// Renyi entropy of order alpha in (0,1) u (1,inf), in nats; zero atoms are
// skipped; computed through log-sum-exp.
double renyi_entropy(std::span<const double> p, double alpha);

struct DistortionRenyiResult {
  double value = 0.0;  // H_alpha of the greedy quantizer's output law
  Quantizer quantizer;
};

// Smallest Renyi entropy of any almost-surely in-budget quantization of the
// source, attained by the greedy construction; alpha restricted to (0,1).
DistortionRenyiResult distortion_renyi(const FiniteSource& source, const DistortionModel& model,
                                       double alpha);

// Greedy value for any admissible alpha. For alpha > 1 this is only an upper
// bound on the infimum (the greedy optimality argument covers alpha < 1).
double greedy_renyi_upper(const FiniteSource& source, const DistortionModel& model, double alpha);

struct ExhaustiveOracleResult {
  double value = 0.0;
  Quantizer argmin;
  std::uint64_t enumerated = 0;
};

// Exact minimum of H_alpha over all feasible deterministic quantizers, by full
// enumeration. Throws InstanceTooLarge past `cap` feasible maps.
ExhaustiveOracleResult exhaustive_quantizer_oracle(const FiniteSource& source,
                                                   const DistortionModel& model, double alpha,
                                                   std::uint64_t cap = 1000000);

// Single-threaded reference for the oracle; must agree bit-for-bit.
ExhaustiveOracleResult exhaustive_quantizer_oracle_serial(const FiniteSource& source,
                                                          const DistortionModel& model,
                                                          double alpha,
                                                          std::uint64_t cap = 1000000);

}  // namespace gw
