#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gw/distortion.hpp"
#include "gw/moments.hpp"
#include "gw/source.hpp"

namespace gw {

/// Empirical-distribution class of length-n sequences over an alphabet.
struct TypeClass {
  int n = 0;
  std::vector<int> counts;

  std::vector<double> pmf() const;
};

// All types of length-n sequences over the given alphabet; the count matches
// the multiset coefficient C(n+m-1, m-1). Throws InstanceTooLarge past cap.
std::vector<TypeClass> enumerate_types(int n, int alphabet_size, std::uint64_t cap = 10000000);

// Representative sequence: symbol indices repeated in order.
std::vector<int> canonical_sequence(const TypeClass& t);

// Exact probability that an i.i.d. strategy block lands in the distortion ball
// of x_seq. Uses exact-arithmetic dynamic programming over the running
// distortion total when the model carries a rational table, and full
// enumeration of the reproduction space otherwise.
double exact_ball_probability(std::span<const int> x_seq, const Strategy& strategy,
                              const DistortionModel& model, std::uint64_t cap = 10000000);
double log_exact_ball_probability(std::span<const int> x_seq, const Strategy& strategy,
                                  const DistortionModel& model, std::uint64_t cap = 10000000);

// Explicit paths, exposed so they can be cross-checked.
double log_ball_probability_enumerate(std::span<const int> x_seq, const Strategy& strategy,
                                      const DistortionModel& model, std::uint64_t cap,
                                      bool parallel);
std::optional<double> log_ball_probability_dp(std::span<const int> x_seq,
                                              const Strategy& strategy,
                                              const DistortionModel& model,
                                              std::uint64_t state_cap = 50000000);

struct BlockMomentReport {
  int n = 0;
  double rho = 0.0;
  bool rho_integral = false;
  double log_expected_v = 0.0;
  double log_expected_g = 0.0;  // exact for integer rho, NaN otherwise
  double log_g_lower = 0.0;     // analytic bounds, any rho
  double log_g_upper = 0.0;
};

// Exact finite-n moments of block guessing under an i.i.d. strategy, grouped
// by source type (the ball probability is constant on each type class because
// the per-letter distortion average is permutation invariant).
BlockMomentReport exact_block_moment(const FiniteSource& source, const Strategy& strategy,
                                     const DistortionModel& model, int n, double rho,
                                     std::uint64_t cap = 10000000);

// Reference path summing over every source sequence; log E[V_rho].
double log_block_moment_per_sequence(const FiniteSource& source, const Strategy& strategy,
                                     const DistortionModel& model, int n, double rho,
                                     std::uint64_t cap, bool parallel);

struct ConvergenceRow {
  int n = 0;
  double rate_v = 0.0;  // (1/n) log E[V_rho]
  double rate_g = 0.0;  // (1/n) log E[G_rho] when rho integral, NaN otherwise
  double gap_v = 0.0;
  double gap_g = 0.0;
};

struct ConvergenceTable {
  double exponent = 0.0;  // single-letter limit for this strategy
  std::vector<ConvergenceRow> rows;
  bool last_three_monotone = false;  // strictly shrinking gap over the last three n
  double final_gap = 0.0;
  double fitted_envelope_c = 0.0;    // max over non-final rows of gap * n / log n
  bool final_under_envelope = false;
};

ConvergenceTable exponent_convergence_check(const FiniteSource& source, const Strategy& strategy,
                                            const DistortionModel& model, double rho,
                                            std::span<const int> n_list,
                                            std::uint64_t cap = 10000000);

/// Joint empirical counts of (source letter, reproduction letter) pairs,
/// consistent with a fixed base sequence.
struct ConditionalType {
  int nx = 0, nxh = 0;
  std::vector<int> joint;  // row-major

  int at(int a, int b) const { return joint[static_cast<std::size_t>(a) * nxh + b]; }
};

struct CensusCell {
  ConditionalType type;
  std::uint64_t size = 0;  // |T_V(x)|, exact
  bool feasible = false;   // average distortion within budget
};

// Exact partition of the reproduction space by conditional type relative to
// x_seq. The strategy probability is constant on every cell.
std::vector<CensusCell> conditional_type_census(std::span<const int> x_seq,
                                                const DistortionModel& model,
                                                std::uint64_t cap = 10000000);
double census_cell_log_prob(const CensusCell& cell, const Strategy& strategy);

}  // namespace gw
